"""Compare the compiled kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Problem sizes mirror the clustering workload: one basis-pursuit column of a
Case-3 sweep (about 25 observed rows, 449 dictionary columns), one lasso
column of the same size, and an exact in-radius for d = 3.
"""
import argparse
import importlib
import time

import numpy as np

from ssclp import _fallback


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def workloads(seed=0):
    rng = np.random.default_rng(seed)
    U = np.linalg.qr(rng.standard_normal((25, 3)))[0]
    A = np.hstack([U @ rng.standard_normal((3, 149)), rng.standard_normal((25, 300))])
    y = U @ rng.standard_normal(3)
    lam = float(np.max(np.abs(A.T @ A - np.diag(np.diag(A.T @ A))))) / 50.0
    P = rng.standard_normal((3, 60))
    return {
        "bp_simplex (25x449)": lambda m: m.bp_simplex(A, y),
        "lasso_cd (25x449)": lambda m: m.lasso_cd(A, y, lam, np.zeros(A.shape[1]),
                                                  1e-8, 20000),
        "polar_vertex_max (3x60)": lambda m: m.polar_vertex_max(P),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        compiled = importlib.import_module("ssclp._kernels")
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':28s} {'numpy [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in workloads().items():
        t_py, _ = _time(lambda: fn(_fallback), args.repeat)
        if compiled is None:
            print(f"{name:28s} {1e3 * t_py:12.2f} {'-':>14s} {'-':>8s}")
            continue
        t_c, _ = _time(lambda: fn(compiled), args.repeat)
        print(f"{name:28s} {1e3 * t_py:12.2f} {1e3 * t_c:14.2f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
