"""Compare the compiled kernels with their pure-Python fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
run on the same inputs by both backends; the script checks that the
outputs agree and prints the best-of-N wall time for each.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rsaalab._core import _fallback
from rsaalab.grid import GridND, node_values
from rsaalab.functions import make_biquartic, make_rastrigin_sep
from rsaalab.morse import grid_neighbors

try:
    from rsaalab._core import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def case_cn(mod):
    grid = GridND.uniform([[-2, 2]], 2047)
    h = grid.spacing[0]
    f = node_values(grid, make_biquartic(1))
    psi = np.ones(grid.size, dtype=complex) / np.sqrt(grid.size)
    base, off = np.full(grid.size, 2.0 / h**2), -1.0 / h**2
    s = np.linspace(0, 1, 2001)
    return lambda: mod.cn_tridiag_evolve(psi, base, off, f, 100.0, s, 50.0)


def case_flood(mod):
    spec = make_rastrigin_sep(2)
    ax = np.linspace(-5.12, 5.12, 301)
    X = np.stack([m.ravel() for m in np.meshgrid(ax, ax, indexing="ij")], axis=1)
    v = spec.value(X)
    order = np.lexsort((np.arange(v.size), v)).astype(np.intp)
    indptr, indices = grid_neighbors((301, 301))
    return lambda: mod.sublevel_flood(order, indptr, indices)


def case_langevin(mod):
    b = make_biquartic(1)
    coeffs = np.array(b.meta["grad_poly"])
    noise = np.random.default_rng(0).standard_normal((20000, 21))

    def run():
        x = np.full(21, b.meta["local_min"])
        hit = np.full(21, -1, dtype=np.intp)
        mod.langevin_poly_hits(x, coeffs, 2e-3, np.sqrt(2 * 2e-3 / 10.0), noise, -2.0, 2.0,
                               b.meta["saddle"], hit, 0)
        return x, hit
    return run


def agree(name, a, b):
    if name == "cn":
        return float(np.max(np.abs(a - b)))
    if name == "flood":
        return float(max(np.max(np.abs(np.asarray(x) - np.asarray(y))) if len(x) else 0 for x, y in zip(a, b)))
    return float(max(np.max(np.abs(a[0] - b[0])), np.max(np.abs(a[1] - b[1]))))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; only the fallback can be timed")
    print(f"{'kernel':<10}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, case in (("cn", case_cn), ("flood", case_flood), ("langevin", case_langevin)):
        tp, out_p = best_time(case(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:<10}{tp:>12.4f}{'-':>12}{'-':>10}{'-':>12}")
            continue
        tc, out_c = best_time(case(_kernels), args.repeat)
        print(f"{name:<10}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}{agree(name, out_p, out_c):>12.2e}")


if __name__ == "__main__":
    main()
