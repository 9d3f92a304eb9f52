"""AVSP v1 server loop and CLI.

One thread per connection; requests on a connection are handled strictly
in order (one in flight). Malformed frames get an op="error" response and
the connection is closed.
"""

from __future__ import annotations

import argparse
import logging
import socket
import sys
import threading

import numpy as np

from .framing import FrameError, encode_frame, read_request
from .victims import VICTIMS

log = logging.getLogger("avsp_server")


def handle_frame(header, payload, victim_name, expected_views=None):
    """Map one request frame to one response frame (bytes)."""
    frame_id = int(header["id"])
    op = header["op"]
    if op == "capabilities":
        return encode_frame(frame_id, "capabilities", extra={
            "name": victim_name,
            "differentiable": False,
            "expected_views": expected_views,
        })
    if op == "render":
        nv, h, w = (int(header[k]) for k in ("n_views", "height", "width"))
        if expected_views is not None and nv != expected_views:
            return encode_frame(frame_id, "error", extra={
                "message": f"expected {expected_views} views, got {nv}"})
        images = np.frombuffer(payload, dtype="<f8").reshape(nv, h, w, 3)
        try:
            out = VICTIMS[victim_name](images)
        except ValueError as exc:
            return encode_frame(frame_id, "error", extra={"message": str(exc)})
        return encode_frame(frame_id, "render", nv, h, w,
                            payload=np.ascontiguousarray(out, dtype="<f8").tobytes())
    return encode_frame(frame_id, "error",
                        extra={"message": f"unknown op {op!r}"})


def serve_connection(read, write, victim_name, expected_views=None):
    """Answer frames until end-of-stream; on a malformed frame send one
    error response and stop."""
    while True:
        try:
            frame = read_request(read)
        except FrameError as exc:
            try:
                write(encode_frame(-1, "error", extra={"message": str(exc)}))
            except OSError:
                pass
            return
        if frame is None:
            return
        header, payload = frame
        write(handle_frame(header, payload, victim_name, expected_views))


def serve_tcp(host, port, victim_name, expected_views=None, ready=None):
    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    srv.bind((host, port))
    srv.listen()
    log.info("listening on %s:%d (victim=%s)", host, srv.getsockname()[1],
             victim_name)
    if ready is not None:
        ready(srv.getsockname()[1])

    def worker(conn):
        with conn:
            serve_connection(conn.recv, conn.sendall, victim_name,
                             expected_views)

    try:
        while True:
            conn, _ = srv.accept()
            threading.Thread(target=worker, args=(conn,), daemon=True).start()
    finally:
        srv.close()


def serve_stdio(victim_name, expected_views=None):
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer

    def write(data):
        stdout.write(data)
        stdout.flush()

    serve_connection(stdin.read, write, victim_name, expected_views)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="avsp-server",
        description="Reference AVSP v1 victim server.")
    transport = parser.add_mutually_exclusive_group(required=True)
    transport.add_argument("--port", type=int, help="listen on this TCP port")
    transport.add_argument("--stdio", action="store_true",
                           help="serve one session over stdin/stdout")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--victim", choices=sorted(VICTIMS), default="identity")
    parser.add_argument("--expected-views", type=int, default=None)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.stdio:
            serve_stdio(args.victim, args.expected_views)
        else:
            serve_tcp(args.host, args.port, args.victim, args.expected_views)
    except OSError as exc:
        print(f"startup error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
