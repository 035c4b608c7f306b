"""Benchmark the compiled kernels against the pure-numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Exercises the two hot
paths — monomial evaluation and adaptive integration of a polynomial
vector field — on both backends and prints the speedups.
"""
import time

import numpy as np

from sparsedyn.features import monomial_exponents
from sparsedyn.kernels import COMPILED, _pykern

try:
    from sparsedyn.kernels import _ckern
except ImportError:
    _ckern = None

LORENZ_EXP = np.array(
    [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 0]], dtype=np.int64)
LORENZ_COEF = np.array(
    [[-10.0, 28.0, 0.0],
     [10.0, -1.0, 0.0],
     [0.0, 0.0, -8.0 / 3.0],
     [0.0, -1.0, 0.0],
     [0.0, 0.0, 1.0]])


def best_of(fn, repeats=5):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return min(timings)


def bench_poly_eval(backend):
    rng = np.random.default_rng(7)
    states = rng.standard_normal((5000, 3))
    exponents = monomial_exponents(3, 5)
    return best_of(lambda: backend.poly_eval(states, exponents))


def bench_integrate(backend):
    times = np.arange(0.0, 10.0, 0.002)
    x0 = np.array([-8.0, 8.0, 27.0])
    return best_of(
        lambda: backend.dopri5_poly(LORENZ_EXP, LORENZ_COEF, x0, times))


def main():
    if _ckern is None:
        print("compiled backend unavailable; build the extension first")
        return
    print(f"active import selects compiled backend: {COMPILED}")
    print(f"{'kernel':<24}{'pure (ms)':>12}{'compiled (ms)':>15}{'speedup':>10}")
    for label, bench in (("poly_eval 5000x3 deg5", bench_poly_eval),
                         ("dopri5 lorenz 5000 pts", bench_integrate)):
        t_pure = bench(_pykern)
        t_comp = bench(_ckern)
        print(f"{label:<24}{t_pure * 1e3:>12.3f}{t_comp * 1e3:>15.3f}"
              f"{t_pure / t_comp:>9.1f}x")


if __name__ == "__main__":
    main()
