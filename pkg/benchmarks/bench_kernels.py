"""Compare the numba and numpy subset-error kernels.

Usage: python3 benchmarks/bench_kernels.py [--rows 90] [--pool 60] [--batch 256]

The shapes mimic a GRASP neighbourhood block: every subset is the current
selection plus or minus one feature.
"""

import argparse
import time

import numpy as np

from relseq import _kernels
from relseq.bayes import fit_matrix


def make_problem(rows, pool, classes, batch, width, seed=0):
    rng = np.random.default_rng(seed)
    X = (rng.random((rows, pool)) < 0.3).astype(np.uint8)
    y = rng.integers(0, classes, rows)
    y[:classes] = np.arange(classes)
    model = fit_matrix(X, y, list(range(classes)))
    base = rng.choice(pool, size=width, replace=False)
    subsets = []
    for k in range(batch):
        s = set(base.tolist())
        s ^= {int(k % pool)}
        subsets.append(s)
    return (X, y.astype(np.int64), np.ascontiguousarray(model.alpha),
            np.ascontiguousarray(model.log1mp), np.ascontiguousarray(model.log_prior),
            _kernels.pack_subsets(subsets))


def timeit(fn, args, repeat):
    fn(*args)   # warm up (and JIT compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=90)
    ap.add_argument("--pool", type=int, default=60)
    ap.add_argument("--classes", type=int, default=2)
    ap.add_argument("--batch", type=int, default=256)
    ap.add_argument("--width", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    prob = make_problem(args.rows, args.pool, args.classes, args.batch, args.width)
    t_np = timeit(_kernels.subset_errors_numpy, prob, args.repeat)
    print(f"numpy  {t_np * 1e3:9.3f} ms per block of {args.batch}")
    if _kernels.subset_errors_numba is None:
        print("numba  unavailable (not installed or RELSEQ_DISABLE_NUMBA set)")
        return
    t_nb = timeit(_kernels.subset_errors_numba, prob, args.repeat)
    same = np.array_equal(_kernels.subset_errors_numpy(*prob),
                          _kernels.subset_errors_numba(*prob))
    print(f"numba  {t_nb * 1e3:9.3f} ms per block of {args.batch}")
    print(f"speedup {t_np / t_nb:.1f}x, identical results: {same}")


if __name__ == "__main__":
    main()
