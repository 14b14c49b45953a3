"""``stegokey`` command line.

Exit codes: 0 success, 2 attack did not single out a key, 3 bad input.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .attack import GridKeySpace, correlation_attack, length_window
from .codec import EmbedConfig, KeyCandidate, as_bits, as_bytes, embed, extract
from .noise import compute_noise, summary
from .prng import RNG_KINDS
from .stats import build_mixture, plan_attack
from .theory import TheoryParams, format_bound, hiding_capacity, hiding_redundancy, unicity_lower_bound
from .workbench import (
    PGMError,
    nstar_curve,
    read_pgm,
    redundancy_curve,
    rows_csv,
    run_sweep,
    sweep_csv,
    synth_cover,
    write_pgm,
)

EXIT_OK = 0
EXIT_ATTACK_FAILED = 2
EXIT_INPUT = 3


class InputError(Exception):
    pass


def _config(args):
    return EmbedConfig(
        operation=getattr(args, "op", "replace"),
        reserve_header=not args.no_header,
        header_pixels=args.header_pixels,
        rng_kind=args.rng,
    )


def _emit(args, payload, text=None):
    if args.json or text is None:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _rate_grid(spec):
    if ":" in spec:
        lo, hi, steps = spec.split(":")
        return [float(x) for x in np.linspace(float(lo), float(hi), int(steps))]
    return [float(x) for x in spec.split(",")]


def cmd_embed(args):
    cover = read_pgm(args.cover)
    with open(args.msg, "rb") as f:
        message = f.read()
    if not message:
        raise InputError("message file is empty")
    key = KeyCandidate(args.seed, len(message))
    stego = embed(cover, as_bits(message), key, _config(args))
    write_pgm(stego, args.out)
    rate = key.n_bits / (cover.size - _config(args).skip)
    _emit(args, {"out": args.out, "seed": key.seed, "message_len_bytes": key.message_len_bytes, "r": rate},
          f"embedded {key.message_len_bytes} bytes (r = {rate:.4f}) into {args.out}")
    return EXIT_OK


def cmd_extract(args):
    stego = read_pgm(args.stego)
    data = as_bytes(extract(stego, KeyCandidate(args.seed, args.len), _config(args)))
    if args.out in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(args.out, "wb") as f:
            f.write(data)
    return EXIT_OK


def cmd_noise(args):
    stego = read_pgm(args.stego)
    field = compute_noise(stego, args.radius, _config(args).skip)
    info = summary(field, args.rate)
    if args.out:
        field.values.astype("<f8").tofile(args.out)
        with open(args.out + ".json", "w") as f:
            json.dump(info, f, indent=2, sort_keys=True)
            f.write("\n")
    _emit(args, info)
    return EXIT_OK


def cmd_plan(args):
    model = build_mixture(args.r, args.sigma, args.A)
    plan = plan_attack(model, args.keys, args.pm)
    print(json.dumps({"mixture": model.to_dict(), "plan": plan.to_dict()}, indent=2, sort_keys=True))
    return EXIT_OK


def _parse_window(spec, noise, eligible):
    if spec == "auto":
        return length_window(summary(noise)["r_hat"], eligible)
    try:
        lo, hi = (int(x) for x in spec.split(":"))
    except ValueError:
        raise InputError(f"--len-window expects auto or MIN:MAX, got {spec!r}") from None
    if not 1 <= lo <= hi:
        raise InputError(f"bad length window {spec!r}")
    return range(lo, hi + 1)


def cmd_attack(args):
    stego = read_pgm(args.stego)
    config = _config(args)
    noise = compute_noise(stego, 1, config.skip)
    lengths = _parse_window(args.len_window, noise, config.eligible(stego.size))
    keyspace = GridKeySpace(args.seed_bits, lengths)
    result = correlation_attack(
        stego, keyspace, config, rate=args.rate, sigma=args.sigma, p_m=args.pm,
        threads=args.threads, noise=noise,
    )
    report = result.to_dict(timing=args.timing)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.report:
        with open(args.report, "w") as f:
            f.write(text + "\n")
    if args.json:
        print(text)
    else:
        found = result.recovered.to_dict() if result.recovered else None
        print(f"{result.outcome} ({result.stage}): {found}; {len(keyspace)} keys, "
              f"{result.timing.get('keys_per_second', 0):.0f} keys/s", file=sys.stderr)
    return EXIT_OK if result.success else EXIT_ATTACK_FAILED


def cmd_theory(args):
    rows = []
    for r in _rate_grid(args.rates):
        params = TheoryParams.for_lsb(r, args.key_bits, args.pixels, args.eps)
        rows.append({
            "r": r,
            "capacity": hiding_capacity(r / 2),
            "redundancy": hiding_redundancy(r),
            "bound": unicity_lower_bound(params),
        })
    if args.json:
        print(json.dumps([dict(x, bound=None if math.isinf(x["bound"]) else x["bound"]) for x in rows], indent=2))
        return EXIT_OK
    print(f"{'r':>8} {'C':>10} {'redundancy':>12} {'bound':>14}")
    for x in rows:
        print(f"{x['r']:8.4f} {x['capacity']:10.6f} {x['redundancy']:12.6f} {format_bound(x['bound']):>14}")
    return EXIT_OK


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def cmd_sweep(args):
    if args.curve == "redundancy":
        rows = redundancy_curve(_rate_grid(args.rates))
        _write_text(args.out, rows_csv(rows, ["r", "capacity", "message_rate", "redundancy"]))
        return EXIT_OK
    if args.curve == "nstar":
        rows = nstar_curve(_rate_grid(args.rates), args.sigma, args.keys, args.pm)
        _write_text(args.out, rows_csv(rows, ["r", "n", "T", "n_star"]))
        return EXIT_OK
    if args.cover:
        cover = read_pgm(args.cover)
    else:
        cover = synth_cover(args.width, args.height, texture_sigma=args.texture_sigma, gen_seed=args.gen_seed)
    lengths = [int(x) for x in args.lengths.split(",") if x.strip()]
    seed_bits = 16 if args.full_keyspace else args.seed_bits
    rows = run_sweep(cover, lengths, seed_bits, args.trials, _config(args), gen_seed=args.gen_seed,
                     threads=args.threads, p_m=args.pm)
    _write_text(args.out, sweep_csv(rows))
    return EXIT_OK


def _add_codec_flags(p):
    p.add_argument("--no-header", action="store_true", help="do not reserve the 64-pixel header region")
    p.add_argument("--header-pixels", type=int, default=64)


def build_parser():
    parser = argparse.ArgumentParser(prog="stegokey", description="keyed LSB embedding and stego-key recovery")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--rng", choices=RNG_KINDS, default="borland_lcg")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="hide a message file in a PGM cover")
    p.add_argument("--cover", required=True)
    p.add_argument("--msg", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--op", choices=("replace", "plus_minus_one"), default="replace")
    p.add_argument("--out", required=True)
    _add_codec_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="read a message back with a known key")
    p.add_argument("--stego", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--len", type=int, required=True, help="message length in bytes")
    p.add_argument("--out", default="-")
    _add_codec_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("noise", help="parity-signed residuals and their moments")
    p.add_argument("--stego", required=True)
    p.add_argument("--out", help="residuals as little-endian float64; a .json sidecar is written next to it")
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--rate", type=float, help="use this rate for sigma^2 instead of the estimate")
    _add_codec_flags(p)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("plan", help="sample count and threshold for the key test")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--keys", type=int, required=True)
    p.add_argument("--pm", type=float, default=0.01)
    p.add_argument("--A", type=float, default=0.5)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("attack", help="recover the stego key from a stego image")
    p.add_argument("--stego", required=True)
    p.add_argument("--seed-bits", type=int, default=16)
    p.add_argument("--len-window", default="auto", help="auto or MIN:MAX message length in bytes")
    p.add_argument("--pm", type=float, default=0.01)
    p.add_argument("--rate", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    p.add_argument("--report")
    p.add_argument("--timing", action="store_true", help="include elapsed time and keys/s in the report")
    _add_codec_flags(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("theory", help="capacity, redundancy and unicity bound over rates")
    p.add_argument("--key-bits", type=float, default=16)
    p.add_argument("--pixels", type=int, default=153600)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--rates", default="0:1:11", help="comma list or LO:HI:STEPS")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("sweep", help="CSV curves and embed/attack experiment tables")
    p.add_argument("--curve", choices=("redundancy", "nstar", "attack"), default="attack")
    p.add_argument("--rates", default="0:1:101")
    p.add_argument("--sigma", type=float, default=1.5)
    p.add_argument("--keys", type=int, default=1 << 16)
    p.add_argument("--pm", type=float, default=0.01)
    p.add_argument("--cover")
    p.add_argument("--width", type=int, default=480)
    p.add_argument("--height", type=int, default=320)
    p.add_argument("--texture-sigma", type=float, default=7.0)
    p.add_argument("--gen-seed", type=int, default=0)
    p.add_argument("--lengths", default="100,200,1000,2000,5000,10000,18800")
    p.add_argument("--seed-bits", type=int, default=12)
    p.add_argument("--full-keyspace", action="store_true", help="search all 16-bit seeds")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", default="-")
    _add_codec_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, PGMError, ValueError, OSError) as exc:
        print(f"stegokey: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
