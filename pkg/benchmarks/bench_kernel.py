"""Compare the compiled and pure-Python expression kernels.

    python3 benchmarks/bench_kernel.py [--rows N] [--repeat R]

Times ``eval_batch`` on catalog integrands and one full solve per backend,
and checks that both backends return bit-identical values.
"""

import argparse
import time

import numpy as np

from fracopt import kernel
from fracopt.apps import catalog_get
from fracopt.reduction import SolveConfig, optimize


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if "cython" not in kernel.BACKENDS:
        print("compiled kernel not built; only the Python backend is available")
    rng = np.random.default_rng(0)
    cases = [
        ("quadratic_bowl A", catalog_get("quadratic_bowl").problem.program_a, [-5, -5], [5, 5]),
        ("age_replacement B (64 nodes)", catalog_get("age_replacement_weibull").problem.program_b, [3, 0.003], [3, 3]),
    ]
    print(f"{'case':32s} {'backend':8s} {'rows/s':>14s} {'speedup':>8s}")
    for label, prog, lo, hi in cases:
        X = rng.uniform(lo, hi, size=(args.rows, 2))
        base, ref = None, None
        for name in sorted(kernel.BACKENDS, reverse=True):  # python first
            t = best_of(lambda: kernel.eval_batch(prog, X, backend=name), args.repeat)
            vals, _ = kernel.eval_batch(prog, X, backend=name)
            if ref is None:
                ref, base = vals, t
            else:
                assert np.array_equal(vals.view(np.int64), ref.view(np.int64)), "backends disagree"
            print(f"{label:32s} {name:8s} {args.rows / t:14.0f} {base / t:7.1f}x")

    p = catalog_get("age_replacement_weibull").problem
    cfg = SolveConfig()
    for name in sorted(kernel.BACKENDS, reverse=True):
        kernel._impl = kernel.get_backend(name)
        t = best_of(lambda: optimize(p, cfg), 1)
        print(f"{'solve age_replacement_weibull':32s} {name:8s} {t:13.2f}s")


if __name__ == "__main__":
    main()
