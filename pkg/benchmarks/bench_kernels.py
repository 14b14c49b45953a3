"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--keys 2048] [--n 46080] [--repeat 3]

Reports keys/s for ``count_exceed`` (the keyspace scan) and paths/s for
``walk_path`` on a 320x480 eligible range, and checks both backends agree.
"""
import argparse
import time

import numpy as np

from stegokey.kernels import backend_module
from stegokey.prng import rng_code

ELIGIBLE = 320 * 480 - 64


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--keys", type=int, default=2048)
    ap.add_argument("--n", type=int, default=46080, help="path prefix scored per key")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--rng", default="borland_lcg")
    args = ap.parse_args(argv)

    kind = rng_code(args.rng)
    rng = np.random.default_rng(0)
    exceed = (rng.random(ELIGIBLE) < 0.4).astype(np.uint8)
    seeds = np.arange(args.keys, dtype=np.int64)
    lengths = np.full(args.keys, args.n // 8, dtype=np.int64)

    results = {}
    for name in ("jit", "numpy"):
        mod = backend_module(name)
        keys = args.keys if name == "jit" else min(args.keys, 256)
        # warm-up compiles the jit kernels
        mod.count_exceed(kind, exceed, seeds[:2], lengths[:2], args.n)
        mod.walk_path(kind, 1, args.n // 8, ELIGIBLE, args.n)
        t_scan, counts = best_of(
            args.repeat, lambda: mod.count_exceed(kind, exceed, seeds[:keys], lengths[:keys], args.n)
        )
        t_walk, _ = best_of(args.repeat, lambda: [mod.walk_path(kind, s, args.n // 8, ELIGIBLE, args.n) for s in range(32)])
        results[name] = counts
        print(f"{name:>5}: count_exceed {keys / t_scan:12,.0f} keys/s   walk_path {32 / t_walk:10,.0f} paths/s")

    k = len(results["numpy"])
    agree = np.array_equal(results["jit"][:k], results["numpy"])
    print(f"backends agree on {k} keys: {agree}")
    return 0 if agree else 1


if __name__ == "__main__":
    raise SystemExit(main())
