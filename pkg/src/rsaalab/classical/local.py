"""Projected L-BFGS and backtracking gradient descent on a box."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..functions.core import ObjectiveSpec
from .base import Evaluator, OptimizerConfig, execute, start_point

ARMIJO = 1e-4


@dataclass
class LocalResult:
    x: np.ndarray
    f: float
    evals: int
    converged: bool
    iterations: int
    history: list = field(default_factory=list)


def _projected_gradient_norm(x, g, lo, hi) -> float:
    return float(np.max(np.abs(np.clip(x - g, lo, hi) - x))) if x.size else 0.0


def _line_search(value, x, f, g, d, lo, hi, alpha, max_halvings=50):
    """Armijo backtracking along the projected path clip(x + αd)."""
    for _ in range(max_halvings):
        x_new = np.clip(x + alpha * d, lo, hi)
        step = x_new - x
        slope = float(g @ step)
        if slope >= 0 or not np.any(step):
            return None
        f_new = value(x_new)
        if f_new <= f + ARMIJO * slope and f_new < f:
            return x_new, f_new
        alpha *= 0.5
    return None


def lbfgs_box(value: Callable, grad: Callable, x0, lo, hi, tol: float = 1e-8, max_iter: int = 1000,
              memory: int = 10) -> LocalResult:
    """Limited-memory BFGS with bound projection.

    Components pinned at a bound with the step pointing outward are frozen
    for that iteration. Stops when the projected gradient ``clip(x - g) - x``
    is below ``tol`` in max-norm, when the line search cannot decrease f, or
    after ``max_iter`` iterations (``converged`` False).
    """
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    x = np.clip(np.asarray(x0, dtype=float).copy(), lo, hi)
    f, g = value(x), grad(x)
    history = [f]
    S, Y = [], []
    for it in range(max_iter):
        if _projected_gradient_norm(x, g, lo, hi) <= tol:
            return LocalResult(x, f, 0, True, it, history)
        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(S), reversed(Y)):
            a = (s @ q) / (y @ s)
            alphas.append(a)
            q -= a * y
        if S:
            q *= (S[-1] @ Y[-1]) / (Y[-1] @ Y[-1])
        for (s, y), a in zip(zip(S, Y), reversed(alphas)):
            q += s * (a - (y @ q) / (y @ s))
        d = -q
        pinned = ((x <= lo) & (d < 0)) | ((x >= hi) & (d > 0))
        d[pinned] = 0.0
        if g @ d >= 0:
            S.clear(), Y.clear()
            d = -g.copy()
            d[((x <= lo) & (d < 0)) | ((x >= hi) & (d > 0))] = 0.0
        alpha = 1.0 if S else min(1.0, 1.0 / max(np.max(np.abs(d)), 1e-300))
        found = _line_search(value, x, f, g, d, lo, hi, alpha)
        if found is None and S:
            S.clear(), Y.clear()
            d = -g.copy()
            d[((x <= lo) & (d < 0)) | ((x >= hi) & (d > 0))] = 0.0
            found = _line_search(value, x, f, g, d, lo, hi, min(1.0, 1.0 / max(np.max(np.abs(d)), 1e-300)))
        if found is None:
            # no decrease possible at working precision
            return LocalResult(x, f, 0, True, it, history)
        x_new, f_new = found
        g_new = grad(x_new)
        s, y = x_new - x, g_new - g
        if s @ y > 1e-12 * np.sqrt((s @ s) * (y @ y)):
            S.append(s), Y.append(y)
            if len(S) > memory:
                S.pop(0), Y.pop(0)
        x, f, g = x_new, f_new, g_new
        history.append(f)
    return LocalResult(x, f, 0, _projected_gradient_norm(x, g, lo, hi) <= tol, max_iter, history)


def gradient_descent_box(value: Callable, grad: Callable, x0, lo, hi, tol: float = 1e-8,
                         max_iter: int = 10_000) -> LocalResult:
    """Projected steepest descent with Armijo backtracking (step reused and grown by 2 after success)."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    x = np.clip(np.asarray(x0, dtype=float).copy(), lo, hi)
    f, g = value(x), grad(x)
    history = [f]
    alpha = 1.0
    for it in range(max_iter):
        if _projected_gradient_norm(x, g, lo, hi) <= tol:
            return LocalResult(x, f, 0, True, it, history)
        found = None
        a = alpha
        for _ in range(60):
            x_new = np.clip(x - a * g, lo, hi)
            step = x_new - x
            if not np.any(step):
                break
            f_new = value(x_new)
            if f_new <= f + ARMIJO * float(g @ step) and f_new < f:
                found = (x_new, f_new)
                break
            a *= 0.5
        if found is None:
            return LocalResult(x, f, 0, True, it, history)
        x, f = found
        g = grad(x)
        alpha = 2.0 * a
        history.append(f)
    return LocalResult(x, f, 0, _projected_gradient_norm(x, g, lo, hi) <= tol, max_iter, history)


def _unlimited(spec: ObjectiveSpec) -> Evaluator:
    return Evaluator(spec, OptimizerConfig("local", budget=2**62, timeout=1e12))


def local_minimize(spec: ObjectiveSpec, x0, tol: float = 1e-8, *, max_iter: int = 1000, memory: int = 10,
                   evaluator: Optional[Evaluator] = None) -> LocalResult:
    """Projected L-BFGS from ``x0`` on the box of ``spec``.

    Evaluations go through ``evaluator`` when given (so they count toward
    its budget and may raise :class:`Stop`); otherwise through a private,
    unlimited one. ``converged`` is False when ``max_iter`` ran out, in
    which case the best iterate found is returned.
    """
    ev = evaluator or _unlimited(spec)
    start = ev.evals
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (spec.dim,):
        raise ValueError(f"x0 must have shape ({spec.dim},)")
    res = lbfgs_box(ev.value, ev.gradient, x0, spec.lower, spec.upper, tol, max_iter, memory)
    res.evals = ev.evals - start
    return res


def run_gradient_descent(spec: ObjectiveSpec, cfg: OptimizerConfig):
    """Backtracking projected gradient descent from ``params['x0']`` (or a uniform start)."""
    tol = cfg.param("tol", 1e-8)
    max_iter = int(cfg.param("max_iter", 100_000))

    def body(ev, rng):
        x0 = start_point(spec, cfg, rng)
        res = gradient_descent_box(ev.value, ev.gradient, x0, spec.lower, spec.upper, tol, max_iter)
        ev.info.update(converged=res.converged, iterations=res.iterations)

    return execute("gradient_descent", spec, cfg, body)


__all__ = ["LocalResult", "lbfgs_box", "gradient_descent_box", "local_minimize", "run_gradient_descent"]
