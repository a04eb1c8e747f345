"""Time the numba kernels against their numpy twins on the same inputs.

    python3 benchmarks/bench_kernels.py [--runs 20] [--db-size 12677]

Both flavours are imported directly from ``ddahash.kernels``, so the
``DDAHASH_NO_NUMBA`` switch does not matter here.  Every pair is checked
for identical output before it is timed; the first numba call (which
compiles) is excluded by the warm-up.
"""

import argparse
import sys

import numpy as np

from ddahash import bench, index, kernels, radon
from ddahash._accel import HAVE_NUMBA
from ddahash.codes import BinaryCode, pack_rows


def cases(db_size, seed):
    rng = np.random.default_rng(seed)
    ids = [str(i) for i in range(db_size)]
    short = index.CodeDatabase(ids, pack_rows(rng.integers(0, 2, (db_size, 16))), 16)
    long = index.CodeDatabase(ids, pack_rows(rng.integers(0, 2, (db_size, 512))), 512)
    idx = index.HashIndex(short, long)
    q_short = BinaryCode(pack_rows(rng.integers(0, 2, (1, 16)))[0], 16)
    q_long = long.query_words(BinaryCode(pack_rows(rng.integers(0, 2, (1, 512)))[0], 512))
    keys = q_short.to_int() ^ index.flip_masks(16, 2)

    img = rng.random((256, 256))
    theta = radon.default_angles(radon.N_ANGLES)
    cos, sin = np.cos(theta), np.sin(theta)

    return {
        "hamming_scan": lambda k: k(long.words, q_long),
        "first_hit": lambda k: k(long.words, q_long),
        "probe_rerank": lambda k: k(idx.offsets, idx.order, long.words, q_long, keys),
        "radon_splat": lambda k: k(img, cos, sin, 256),
    }


def same(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, atol=1e-9)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=bench.DEFAULT_RUNS)
    ap.add_argument("--db-size", type=int, default=12677)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1

    print(f"{'kernel':<14} {'numpy ms':>22} {'numba ms':>22} {'speedup':>8}")
    for name, call in cases(args.db_size, args.seed).items():
        k_np = getattr(kernels, f"{name}_numpy")
        k_nb = getattr(kernels, f"{name}_numba")
        if not same(call(k_np), call(k_nb)):
            print(f"{name}: numpy and numba disagree", file=sys.stderr)
            return 1
        t_np = bench.time_runs(name, lambda: call(k_np), args.runs)
        t_nb = bench.time_runs(name, lambda: call(k_nb), args.runs)
        cols = []
        for t in (t_np, t_nb):
            lo, hi = t.ci()
            cols.append(f"{t.mean * 1e3:9.3f} [{lo * 1e3:.3f},{hi * 1e3:.3f}]")
        print(f"{name:<14} {cols[0]:>22} {cols[1]:>22} {bench.speedup(t_np, t_nb):7.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
