"""Convexity honing: Langevin sampling at moderate β followed by gradient descent."""

from __future__ import annotations

import math

from ..functions.core import ObjectiveSpec
from .base import OptimizerConfig, RunRecord, execute, start_point, uniform_start
from .langevin import langevin_chain
from .local import gradient_descent_box


def honing_beta(dim: int, c: float = 4.0) -> float:
    """β = c log d, with log d floored at 1 so one-dimensional problems still get noise."""
    return c * max(math.log(dim), 1.0)


def run_convexity_honing(spec: ObjectiveSpec, cfg: OptimizerConfig) -> RunRecord:
    """Alternate a Langevin phase with a descent phase until the target is reached.

    Each round starts a fresh Langevin chain from a uniform point (the first
    from ``x0`` when given), runs ``phase1_steps`` steps at β = c log d,
    then runs backtracking gradient descent from the sampled point.
    ``phase1_steps = 0`` gives plain descent from the start point.

    Parameters: ``c`` (4), ``beta`` (overrides c log d), ``eta`` (1e-2),
    ``phase1_steps`` (500), ``gd_tol`` (1e-8), ``gd_max_iter`` (10 000),
    ``rounds`` (unbounded).
    """
    beta = float(cfg.param("beta", honing_beta(spec.dim, float(cfg.param("c", 4.0)))))
    eta = float(cfg.param("eta", 1e-2))
    n1 = int(cfg.param("phase1_steps", 500))
    tol = float(cfg.param("gd_tol", 1e-8))
    gd_iter = int(cfg.param("gd_max_iter", 10_000))
    rounds = cfg.param("rounds")

    def body(ev, rng):
        r = 0
        ev.info["beta"] = beta
        while rounds is None or r < int(rounds):
            x = start_point(spec, cfg, rng) if r == 0 else uniform_start(spec, rng)
            ev.value(x)
            x = langevin_chain(ev, x, eta, beta, n1, rng)
            res = gradient_descent_box(ev.value, ev.gradient, x, spec.lower, spec.upper, tol, gd_iter)
            r += 1
            ev.info.update(rounds=r, last_descent_f=res.f)

    return execute("convexity_honing", spec, cfg, body)
