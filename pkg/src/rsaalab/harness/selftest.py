"""Quick closed-form checks run by ``rsaalab selftest``."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..adiabatic import AnnealSchedule, evolve
from ..classical import (OptimizerConfig, acceptance_probability, local_minimize, run_basin_hopping,
                         run_differential_evolution, run_gradient_descent)
from ..functions import ObjectiveSpec, make_biquartic, make_double_well, make_quadratic
from ..grid import GridND, build_laplacian
from ..morse import agmon_distance_1d, sublevel_pairing
from ..spectral import lowest_eigenpairs


def _box_laplacian() -> bool:
    # the discrete Dirichlet Laplacian on n interior nodes has eigenvalues (4/h²) sin²(kπh/2ℓ)
    n, ell = 63, math.pi
    sol = lowest_eigenpairs(build_laplacian(GridND.uniform([[0, ell]], n)), 2)
    h = ell / (n + 1)
    exact = [4 / h**2 * math.sin(k * math.pi * h / (2 * ell)) ** 2 for k in (1, 2)]
    return bool(np.allclose(sol.values, exact, rtol=1e-9))


def _double_well_barrier() -> bool:
    return abs(sublevel_pairing(make_double_well(1), resolution=20001).H_f - 1.0) < 1e-9


def _agmon_constant() -> bool:
    one = ObjectiveSpec("one", 1, [[0, 2]], lambda X: np.ones(len(X)))
    return abs(agmon_distance_1d(one, 0.0, 0.0, 2.0) - 2.0) < 1e-12


def _metropolis_rule() -> bool:
    return (acceptance_probability(-1.0, 0.5) == 1.0 and acceptance_probability(1.0, 0.0) == 0.0
            and abs(acceptance_probability(0.3, 0.7) * math.exp(0.3 / 0.7) - 1.0) < 1e-15)


def _quadratic_local() -> bool:
    q = make_quadratic(4)
    res = local_minimize(q, np.array([1.0, -2.0, 0.5, 3.0]))
    return bool(np.max(np.abs(res.x)) < 1e-6 and np.all(np.diff(res.history) < 0))


def _biquartic_local_trap() -> bool:
    res = local_minimize(make_biquartic(1), np.array([0.6]))
    return abs(res.x[0] - 0.6909) < 1e-3


def _gd_monotone() -> bool:
    q = make_quadratic(3)
    rec = run_gradient_descent(q, OptimizerConfig("gd", params={"x0": [2.0, -1.0, 0.5]}, budget=10_000))
    return rec.best_f < 1e-12


def _de_fixed_point() -> bool:
    q = make_quadratic(2)
    pop = np.tile([0.5, -0.25], (6, 1))
    rec = run_differential_evolution(q, OptimizerConfig("de", params={"F": 0.0, "population": pop,
                                                                      "max_generations": 3}))
    return bool(np.array_equal(rec.info["population"], pop))


def _zero_temperature_hopping() -> bool:
    dw = make_biquartic(1)
    rec = run_basin_hopping(dw, OptimizerConfig("basin_hopping", budget=3000,
                                                params={"temperature": 0.0, "x0": [-0.7]}))
    return abs(rec.best_x[0] - dw.minimizer[0]) < 1e-4


def _static_anneal() -> bool:
    grid = GridND.uniform([[-2, 2]], 127)
    st = evolve(grid, make_biquartic(1), AnnealSchedule(0.0, 1.0, steps=50), method="cn")
    return abs(st.overlap(st.initial) - 1.0) < 1e-10


CHECKS: list[tuple[str, Callable[[], bool]]] = [
    ("box Laplacian matches the discrete sine spectrum", _box_laplacian),
    ("double well barrier is 1", _double_well_barrier),
    ("Agmon distance of a constant", _agmon_constant),
    ("Metropolis acceptance rule", _metropolis_rule),
    ("L-BFGS solves a quadratic with monotone descent", _quadratic_local),
    ("L-BFGS from 0.6 stays in the biquartic upper well", _biquartic_local_trap),
    ("gradient descent on a quadratic", _gd_monotone),
    ("differential evolution with F=0 keeps an identical population", _de_fixed_point),
    ("zero-temperature basin hopping stays at the global minimum", _zero_temperature_hopping),
    ("λ_max = 0 anneal keeps the initial state", _static_anneal),
]


def run_selftest(echo=print) -> bool:
    ok = True
    for name, check in CHECKS:
        try:
            passed = bool(check())
            detail = ""
        except Exception as exc:
            passed, detail = False, f" ({type(exc).__name__}: {exc})"
        echo(f"{'PASS' if passed else 'FAIL'}  {name}{detail}")
        ok &= passed
    return ok
