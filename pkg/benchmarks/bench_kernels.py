"""Compare the numba and numpy kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is warmed up
once (triggering JIT compilation) and then timed with :func:`timeit.repeat`;
the best-of-repeat time per call is reported together with a check that both
backends return identical results.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from itermix import _kernels as kern

SIZES = ((630, 2), (5_000, 10), (20_000, 20))


def _cases(n: int, d: int, rng: np.random.Generator):
    points = rng.normal(size=(n, d))
    labels = (rng.random(n) < 0.05).astype(np.int64)
    query = rng.normal(size=d)
    queries = rng.normal(size=(200, d))
    return {
        "k_nearest": (kern.k_nearest_numpy, kern.k_nearest_numba, (points, query, 10)),
        "nearest_label": (kern.nearest_label_numpy, kern.nearest_label_numba, (points, labels, query, 1)),
        "knn_batch": (kern.knn_batch_numpy, kern.knn_batch_numba, (points, queries, 10)),
        "knn_positive_fraction": (kern.knn_positive_fraction_numpy, kern.knn_positive_fraction_numba,
                                  (points, labels, queries, 10)),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return bool(np.array_equal(a, b))


def _best(fn, args, repeat: int) -> float:
    number = 5
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not kern.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    header = f"{'kernel':<22} {'n':>7} {'d':>3} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'equal':>6}"
    print(header)
    print("-" * len(header))
    for n, d in SIZES:
        for name, (np_fn, nb_fn, fargs) in _cases(n, d, rng).items():
            equal = _same(np_fn(*fargs), nb_fn(*fargs))  # also warms up the JIT
            t_np = _best(np_fn, fargs, args.repeat)
            t_nb = _best(nb_fn, fargs, args.repeat)
            print(f"{name:<22} {n:>7} {d:>3} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} "
                  f"{t_np / t_nb:>7.1f}x {str(equal):>6}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
