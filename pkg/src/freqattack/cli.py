"""Command-line harness: run attacks against chosen victims, compute
metrics, cross-evaluate transfer, and compare the frequency vs pixel
parameterizations at a fixed query budget.

Subcommands: attack, eval, transfer, efficiency. Exit codes: 0 success,
2 configuration error, 3 I/O error, 4 victim/remote error. Set
FREQATTACK_LOG to control log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
import time

import numpy as np

from .attacks.cmaes import CmaConfig, cmaes_attack
from .attacks.nes import NesConfig, nes_pgd_attack
from .attacks.pgd import PgdConfig, pgd_attack
from .errors import ConfigError, FreqAttackError, RemoteError, Unsupported
from .images import (load_fimg, load_png, psnr, save_fimg, save_png, ssim)
from .losses import LossConfig, adv_loss
from .protocol import RemoteVictim
from .victims import make_victim

log = logging.getLogger("freqattack")

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VICTIM = 4

METHODS = ("whitebox-pgd", "nes", "cmaes")
LOCAL_VICTIMS = ("identity", "black", "blur", "toysplat")


# ---------------------------------------------------------------------------
# plumbing

def atomic_write_bytes(path, data):
    """Write-temp-then-rename so readers never see partial files."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path, obj):
    atomic_write_bytes(path, (json.dumps(obj, indent=2, sort_keys=True)
                              + "\n").encode("utf-8"))


def atomic_save_png(path, view):
    import io
    from PIL import Image
    q = np.clip(np.round(np.asarray(view) * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(q, mode="RGB").save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def atomic_save_fimg(path, images):
    nv, h, w, _ = images.shape
    header = f"FIMG v1 {nv} {h} {w}\n".encode("ascii")
    atomic_write_bytes(path, header + np.ascontiguousarray(
        images, dtype="<f8").tobytes())


def atomic_write_csv(path, rows, header):
    import io
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_bytes(path, buf.getvalue().encode("utf-8"))


def load_image_set(paths):
    """One .fimg file is a whole view stack; PNGs are one view each."""
    if len(paths) == 1 and paths[0].endswith(".fimg"):
        return load_fimg(paths[0])
    return np.stack([load_png(p) for p in paths])


def resolve_victim(args):
    spec = args.victim
    if spec.startswith("remote:"):
        return RemoteVictim(address=spec.split(":", 1)[1])
    if spec == "remote":
        if not getattr(args, "remote", None):
            raise ConfigError("victim 'remote' needs --remote host:port")
        return RemoteVictim(address=args.remote)
    if spec in LOCAL_VICTIMS:
        return make_victim(spec)
    raise ConfigError(
        f"unknown victim {spec!r}; expected one of {LOCAL_VICTIMS} or remote:<host:port>")


def build_attack_config(args):
    loss = LossConfig(lam=args.lam)
    epsilon = args.epsilon_255 / 255.0
    eta = args.eta_255 / 255.0
    if args.method == "whitebox-pgd":
        return PgdConfig(epsilon=epsilon, eta=eta, iters=args.iters, loss=loss)
    if args.method == "nes":
        return NesConfig(samples=args.samples, sigma=args.sigma,
                         n=args.block_size, s=args.low_freq, epsilon=epsilon,
                         eta=eta, iters=args.iters, loss=loss, seed=args.seed,
                         use_dct=not args.no_dct)
    if args.method == "cmaes":
        return CmaConfig(population=args.pop, sigma_init=args.sigma_init,
                         n=args.block_size, s=args.low_freq, epsilon=epsilon,
                         iters=args.iters, loss=loss, seed=args.seed,
                         use_dct=not args.no_dct)
    raise ConfigError(f"unknown method {args.method!r}")


def run_one_attack(victim, clean, args, cfg=None):
    cfg = cfg or build_attack_config(args)
    if args.method == "whitebox-pgd":
        if not victim.differentiable:
            raise ConfigError(f"{victim.name} is not differentiable; "
                              "whitebox-pgd needs gradient access")
        return pgd_attack(victim, clean, cfg)
    if args.method == "nes":
        return nes_pgd_attack(victim, clean, cfg)
    return cmaes_attack(victim, clean, cfg)


def rendered_metrics(victim, images, reference, loss_cfg):
    """psnr/ssim of render(images) vs reference, plus the self-render loss."""
    rendered = victim.render(images)
    out = {
        "loss": float(adv_loss(images, rendered, loss_cfg)),
        "psnr": float(psnr(rendered, reference)),
    }
    try:
        out["ssim"] = float(ssim(rendered, reference))
    except FreqAttackError:
        out["ssim"] = None  # image smaller than the SSIM window
    return out, rendered


# ---------------------------------------------------------------------------
# subcommands

def cmd_attack(args):
    clean = load_image_set(args.input)
    victim = resolve_victim(args)
    loss_cfg = LossConfig(lam=args.lam)
    os.makedirs(args.out, exist_ok=True)

    start = time.perf_counter()
    adv, report = run_one_attack(victim, clean, args)
    report.wall_time_s = time.perf_counter() - start

    report.clean_metrics, clean_render = rendered_metrics(
        victim, clean, clean, loss_cfg)
    report.adv_metrics, adv_render = rendered_metrics(
        victim, adv, clean, loss_cfg)
    report.adv_metrics["input_psnr"] = float(psnr(adv, clean))
    # the PNG copies are quantized; report that input PSNR separately
    quantized = np.round(adv * 255.0) / 255.0
    report.adv_metrics["input_psnr_quantized"] = float(psnr(quantized, clean))

    out = args.out
    atomic_save_fimg(os.path.join(out, "adv.fimg"), adv)
    for i in range(adv.shape[0]):
        atomic_save_png(os.path.join(out, f"adv_view{i}.png"), adv[i])
        atomic_save_png(os.path.join(out, f"clean_render_view{i}.png"),
                        clean_render[i])
        atomic_save_png(os.path.join(out, f"adv_render_view{i}.png"),
                        adv_render[i])
    atomic_write_json(os.path.join(out, "report.json"), report.to_dict())
    atomic_write_csv(os.path.join(out, "trace.csv"),
                     [(q, v) for q, v in report.loss_trace],
                     header=("query", "loss"))
    log.info("attack %s on %s: %d queries, final loss %s",
             args.method, victim.name, report.query_count, report.final_loss)
    print(f"wrote {out}/report.json (queries={report.query_count})")
    return 0


def eval_metrics(victim, adv, clean, loss_cfg):
    clean_m, _ = rendered_metrics(victim, clean, clean, loss_cfg)
    adv_m, _ = rendered_metrics(victim, adv, clean, loss_cfg)
    adv_m["input_psnr"] = float(psnr(adv, clean))
    return {"victim": victim.name, "clean": clean_m, "adv": adv_m}


def cmd_eval(args):
    clean = load_image_set(args.input)
    adv = load_image_set(args.adv)
    if adv.shape != clean.shape:
        raise ConfigError(
            f"adv shape {adv.shape} does not match clean shape {clean.shape}")
    victim = resolve_victim(args)
    table = eval_metrics(victim, adv, clean, LossConfig(lam=args.lam))
    os.makedirs(args.out, exist_ok=True)
    atomic_write_json(os.path.join(args.out, "eval.json"), table)
    print(json.dumps(table, indent=2, sort_keys=True))
    return 0


def cmd_transfer(args):
    names = [v.strip() for v in args.victim.split(",") if v.strip()]
    if len(names) < 2:
        raise ConfigError(f"transfer needs >= 2 victims, got {names}")
    clean = load_image_set(args.input)
    adv = load_image_set(args.adv)
    if adv.shape != clean.shape:
        raise ConfigError(
            f"adv shape {adv.shape} does not match clean shape {clean.shape}")
    loss_cfg = LossConfig(lam=args.lam)
    matrix = []
    for name in names:
        victim = make_victim(name) if name in LOCAL_VICTIMS else \
            RemoteVictim(address=name.split(":", 1)[1])
        row = eval_metrics(victim, adv, clean, loss_cfg)
        row["delta_loss"] = row["adv"]["loss"] - row["clean"]["loss"]
        row["delta_psnr"] = row["clean"]["psnr"] - row["adv"]["psnr"]
        matrix.append(row)
    result = {"victims": names, "matrix": matrix}
    os.makedirs(args.out, exist_ok=True)
    atomic_write_json(os.path.join(args.out, "transfer.json"), result)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def cmd_efficiency(args):
    if args.method not in ("nes", "cmaes"):
        raise ConfigError("efficiency compares the black-box methods; "
                          f"got {args.method!r}")
    clean = load_image_set(args.input)
    victim = resolve_victim(args)
    os.makedirs(args.out, exist_ok=True)

    arms = {}
    rows = []
    for arm, no_dct in (("dct", False), ("pixel", True)):
        args.no_dct = no_dct
        start = time.perf_counter()
        _, report = run_one_attack(victim, clean, args)
        report.wall_time_s = time.perf_counter() - start
        arms[arm] = report.to_dict()
        rows.extend((arm, q, v) for q, v in report.loss_trace)
    atomic_write_csv(os.path.join(args.out, "efficiency.csv"), rows,
                     header=("arm", "query", "loss"))
    summary = {
        "method": args.method,
        "seed": args.seed,
        "dct_final_loss": arms["dct"]["final_loss"],
        "pixel_final_loss": arms["pixel"]["final_loss"],
        "arms": arms,
    }
    atomic_write_json(os.path.join(args.out, "efficiency.json"), summary)
    print(f"dct final loss {summary['dct_final_loss']} vs "
          f"pixel {summary['pixel_final_loss']}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def build_parser():
    parser = argparse.ArgumentParser(
        prog="freqattack",
        description="Black-box adversarial attacks on image-to-image victims "
                    "via low-frequency block-DCT perturbations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_method=True):
        if need_method:
            p.add_argument("--method", choices=METHODS, default="nes")
        p.add_argument("--victim", default="toysplat",
                       help="identity | black | blur | toysplat | remote[:host:port]")
        p.add_argument("--input", nargs="+", required=True,
                       help="one .fimg file or one PNG per view")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--epsilon-255", dest="epsilon_255", type=int, default=8)
        p.add_argument("--eta-255", dest="eta_255", type=int, default=2)
        p.add_argument("--iters", type=int, default=100)
        p.add_argument("--samples", type=int, default=40,
                       help="antithetic pairs per iteration (nes)")
        p.add_argument("--pop", type=int, default=40,
                       help="population per generation (cmaes)")
        p.add_argument("--block-size", dest="block_size", type=int, default=8)
        p.add_argument("--low-freq", dest="low_freq", type=int, default=3)
        p.add_argument("--lambda", dest="lam", type=float, default=0.05)
        p.add_argument("--sigma", type=float, default=0.1,
                       help="nes search deviation in coefficient units")
        p.add_argument("--sigma-init", dest="sigma_init", type=float,
                       default=1.0, help="cmaes initial step size")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-dct", dest="no_dct", action="store_true",
                       help="sample noise directly in pixel space")
        p.add_argument("--remote", help="host:port for --victim remote")

    p_attack = sub.add_parser("attack", help="run one attack")
    common(p_attack)
    p_attack.set_defaults(func=cmd_attack)

    p_eval = sub.add_parser("eval", help="metrics for an adversarial set")
    common(p_eval, need_method=False)
    p_eval.add_argument("--adv", nargs="+", required=True,
                        help="adversarial set: one .fimg or PNGs")
    p_eval.set_defaults(func=cmd_eval)

    p_transfer = sub.add_parser("transfer",
                                help="cross-evaluate one adversarial set on several victims")
    common(p_transfer, need_method=False)
    p_transfer.add_argument("--adv", nargs="+", required=True)
    p_transfer.set_defaults(func=cmd_transfer)

    p_eff = sub.add_parser("efficiency",
                           help="frequency vs pixel parameterization at equal budget")
    common(p_eff)
    p_eff.set_defaults(func=cmd_efficiency)

    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("FREQATTACK_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Unsupported as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RemoteError, TimeoutError) as exc:
        print(f"victim error: {exc}", file=sys.stderr)
        return EXIT_VICTIM
    except FreqAttackError as exc:
        print(f"victim error: {exc}", file=sys.stderr)
        return EXIT_VICTIM


if __name__ == "__main__":
    sys.exit(main())
