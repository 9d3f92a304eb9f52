"""
Attacking a victim behind a wire protocol.

Real reconstruction models live behind APIs. The RemoteVictim client
speaks a small framed protocol (AVSP v1) over TCP or to a subprocess
via stdio; from the attack's point of view it is just another victim
whose render calls count against the query budget.

This demo launches the reference server as a subprocess and runs a
short black-box attack against the remote blur victim. It needs the
server package on PYTHONPATH (see server/ in this repository).
"""

import os
import subprocess
import sys
import time

import numpy as np

import freqattack as fa

SERVER_DIR = os.path.join(os.path.dirname(os.path.dirname(
    os.path.abspath(__file__))), "server")

# Launch the reference server on a local port.
port = 17117
env = dict(os.environ, PYTHONPATH=SERVER_DIR)
proc = subprocess.Popen([sys.executable, "-m", "avsp_server",
                         "--port", str(port), "--victim", "blur"], env=env)
time.sleep(1.0)

try:
    with fa.RemoteVictim(address=f"127.0.0.1:{port}") as victim:
        print("connected to", victim.name)

        clean = np.random.default_rng(2).random((2, 16, 16, 3))

        # Remote renders match the in-process implementation exactly.
        local = fa.BlurVictim()
        gap = np.abs(victim.render(clean) - local.render(clean)).max()
        print(f"remote vs in-process blur: max diff {gap:.2e}")

        # Every probe the attack makes is one round trip on the wire.
        cfg = fa.CmaConfig(population=8, iters=10, seed=0)
        adv, report = fa.cmaes_attack(victim, clean, cfg)
        print(f"attack used {report.query_count} remote queries, "
              f"final loss {report.final_loss:.6f}")
finally:
    proc.terminate()
    proc.wait(timeout=10)
