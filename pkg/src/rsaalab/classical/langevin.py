"""Unadjusted Langevin dynamics and batched one-dimensional hitting times."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _core
from ..functions.core import ObjectiveSpec
from .base import OptimizerConfig, RunRecord, execute, reflect, start_point


def langevin_sigma(eta: float, beta: float) -> float:
    """Noise scale √(2η/β) (zero at β = ∞)."""
    return 0.0 if math.isinf(beta) else math.sqrt(2.0 * eta / beta)


def langevin_chain(ev, x, eta: float, beta: float, steps: int, rng: np.random.Generator,
                   noise_rotation=None, thin: int = 0) -> np.ndarray:
    """Advance ``x`` by ``steps`` Langevin updates through evaluator ``ev``.

    Each step costs one gradient and one value evaluation; the value keeps
    the evaluator's best-so-far exact.
    """
    spec = ev.spec
    sigma = langevin_sigma(eta, beta)
    lo, hi = spec.lower, spec.upper
    for k in range(steps):
        g = ev.gradient(x)
        xi = rng.standard_normal(spec.dim)
        if noise_rotation is not None:
            xi = noise_rotation @ xi
        x = reflect(x - eta * g + sigma * xi, lo, hi)
        ev.value(x)
        if thin and (k + 1) % thin == 0:
            ev.trace.append(x.copy())
    return x


def run_langevin(spec: ObjectiveSpec, cfg: OptimizerConfig) -> RunRecord:
    """x ← x - η∇f(x) + √(2η/β) ξ with reflection at the box.

    Parameters (``cfg.params``): ``eta`` (1e-3), ``beta`` (1e3, ``inf`` turns
    the noise off), ``steps`` (run until budget when absent), ``x0``,
    ``thin`` (record every ``thin``-th iterate), ``noise_rotation`` (matrix
    applied to each noise draw).
    """
    eta = float(cfg.param("eta", 1e-3))
    beta = float(cfg.param("beta", 1e3))
    if not eta > 0 or not beta > 0:
        raise ValueError("eta and beta must be positive")
    steps = cfg.param("steps")
    thin = int(cfg.param("thin", 0))
    R = cfg.param("noise_rotation")
    R = None if R is None else np.asarray(R, dtype=float)

    def body(ev, rng):
        x = start_point(spec, cfg, rng)
        ev.value(x)
        if thin:
            ev.trace.append(x.copy())
        n = cfg.budget if steps is None else int(steps)
        langevin_chain(ev, x, eta, beta, n, rng, R, thin)

    return execute("langevin", spec, cfg, body)


@dataclass
class HittingTimes:
    steps: np.ndarray
    eta: float
    beta: float

    @property
    def times(self) -> np.ndarray:
        t = self.steps.astype(float) * self.eta
        t[self.steps < 0] = np.inf
        return t

    @property
    def censored(self) -> int:
        return int(np.sum(self.steps < 0))

    @property
    def median_time(self) -> float:
        return float(np.median(self.times))


def langevin_hitting_times(grad_poly, x0: float, beta: float, threshold: float, *, eta: float = 2e-3,
                           trials: int = 21, seed: int = 0, lo: float = -2.0, hi: float = 2.0,
                           max_steps: int = 10**8, chunk: int = 1 << 15) -> HittingTimes:
    """First step at which 1D Langevin walkers started at ``x0`` fall below ``threshold``.

    ``grad_poly`` lists the coefficients of f' (highest degree first). All
    walkers share one noise array per chunk, drawn in a fixed order, so the
    result depends only on the arguments. Walkers that never hit report -1.
    """
    rng = np.random.default_rng(seed)
    coeffs = np.ascontiguousarray(grad_poly, dtype=float)
    x = np.full(trials, float(x0))
    hit = np.full(trials, -1, dtype=np.intp)
    sigma = langevin_sigma(eta, beta)
    done = 0
    while done < max_steps and np.any(hit < 0):
        n = min(chunk, max_steps - done)
        noise = rng.standard_normal((n, trials))
        _core.langevin_poly_hits(x, coeffs, eta, sigma, noise, lo, hi, threshold, hit, done)
        done += n
    return HittingTimes(hit, eta, beta)
