"""Objective container, derivative bundle and finite-difference fallbacks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import OutOfDomain

EPS = np.finfo(float).eps
FD_STEP = np.cbrt(EPS)
# second differences lose two orders of h; the fourth root balances truncation and rounding
FD2_STEP = EPS ** 0.25

BatchFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DerivativeCaps:
    gradient: bool = False
    hessian: bool = False
    laplacian: bool = False


@dataclass(frozen=True)
class EvalBundle:
    value: float
    gradient: Optional[np.ndarray] = None
    hessian: Optional[np.ndarray] = None
    laplacian: Optional[float] = None


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    """A benchmark objective on an axis-aligned box.

    All callables are batched: they take an ``(N, d)`` array and return
    ``(N,)`` values, ``(N, d)`` gradients, ``(N, d, d)`` Hessians or ``(N,)``
    Laplacians. Missing derivatives fall back to central differences.
    """

    name: str
    dim: int
    box: np.ndarray
    value_fn: BatchFn
    grad_fn: Optional[BatchFn] = None
    hess_fn: Optional[BatchFn] = None
    lap_fn: Optional[BatchFn] = None
    minimizer: Optional[np.ndarray] = None
    min_value: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        box = _frozen(self.box).reshape(self.dim, 2)
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not np.all(box[:, 0] < box[:, 1]):
            raise ValueError(f"{self.name}: every axis needs lower < upper")
        object.__setattr__(self, "box", box)
        if self.minimizer is not None:
            object.__setattr__(self, "minimizer", _frozen(self.minimizer).reshape(self.dim))
            if self.min_value is None:
                object.__setattr__(self, "min_value", float(self.value_fn(self.minimizer[None])[0]))

    @property
    def derivative_caps(self) -> DerivativeCaps:
        return DerivativeCaps(self.grad_fn is not None, self.hess_fn is not None,
                              self.lap_fn is not None or self.hess_fn is not None)

    @property
    def lower(self) -> np.ndarray:
        return self.box[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.box[:, 1]

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)

    def _as_batch(self, x, check=True):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[-1] != self.dim:
            raise ValueError(f"{self.name}: expected points of dimension {self.dim}, got {X.shape[-1]}")
        if check and not np.all(self.contains(X)):
            bad = X[~self.contains(X)][0]
            raise OutOfDomain(f"{self.name}: point {bad} outside box {self.box.tolist()}")
        return X, single

    # -- evaluation -----------------------------------------------------
    def value(self, x, check=True):
        X, single = self._as_batch(x, check)
        v = np.asarray(self.value_fn(X), dtype=float)
        return float(v[0]) if single else v

    def gradient(self, x, check=True):
        X, single = self._as_batch(x, check)
        g = self.grad_fn(X) if self.grad_fn is not None else fd_gradient(self.value_fn, X)
        return g[0] if single else g

    def hessian(self, x, check=True):
        X, single = self._as_batch(x, check)
        if self.hess_fn is not None:
            H = self.hess_fn(X)
        elif self.grad_fn is not None:
            H = fd_jacobian(self.grad_fn, X)
        else:
            H = fd_hessian(self.value_fn, X)
        return H[0] if single else H

    def laplacian(self, x, check=True):
        X, single = self._as_batch(x, check)
        if self.lap_fn is not None:
            L = self.lap_fn(X)
        elif self.hess_fn is not None:
            L = np.trace(self.hess_fn(X), axis1=1, axis2=2)
        elif self.grad_fn is not None:
            L = fd_divergence(self.grad_fn, X)
        else:
            L = fd_laplacian(self.value_fn, X)
        return float(L[0]) if single else np.asarray(L)

    def __repr__(self):
        return f"ObjectiveSpec({self.name!r}, dim={self.dim})"


def evaluate(spec: ObjectiveSpec, x, gradient=False, hessian=False, laplacian=False) -> EvalBundle:
    """Evaluate ``spec`` at a single point with the requested derivatives.

    Raises ``OutOfDomain`` rather than clamping when ``x`` leaves the box.
    """
    x = np.asarray(x, dtype=float).reshape(spec.dim)
    value = spec.value(x)
    return EvalBundle(
        value=value,
        gradient=spec.gradient(x) if gradient else None,
        hessian=spec.hessian(x) if hessian else None,
        laplacian=spec.laplacian(x) if laplacian else None,
    )


# -- finite differences ---------------------------------------------------

def _steps(X, base):
    return base * (1.0 + np.abs(X))


def fd_gradient(fn: BatchFn, X: np.ndarray) -> np.ndarray:
    N, d = X.shape
    H = _steps(X, FD_STEP)
    G = np.empty((N, d))
    for i in range(d):
        Xp, Xm = X.copy(), X.copy()
        Xp[:, i] += H[:, i]
        Xm[:, i] -= H[:, i]
        G[:, i] = (fn(Xp) - fn(Xm)) / (Xp[:, i] - Xm[:, i])
    return G


def fd_jacobian(grad_fn: BatchFn, X: np.ndarray) -> np.ndarray:
    N, d = X.shape
    H = _steps(X, FD_STEP)
    J = np.empty((N, d, d))
    for i in range(d):
        Xp, Xm = X.copy(), X.copy()
        Xp[:, i] += H[:, i]
        Xm[:, i] -= H[:, i]
        J[:, :, i] = (grad_fn(Xp) - grad_fn(Xm)) / (Xp[:, i] - Xm[:, i])[:, None]
    return 0.5 * (J + J.transpose(0, 2, 1))


def fd_divergence(grad_fn: BatchFn, X: np.ndarray) -> np.ndarray:
    N, d = X.shape
    H = _steps(X, FD_STEP)
    out = np.zeros(N)
    for i in range(d):
        Xp, Xm = X.copy(), X.copy()
        Xp[:, i] += H[:, i]
        Xm[:, i] -= H[:, i]
        out += (grad_fn(Xp)[:, i] - grad_fn(Xm)[:, i]) / (Xp[:, i] - Xm[:, i])
    return out


def fd_hessian(fn: BatchFn, X: np.ndarray) -> np.ndarray:
    N, d = X.shape
    H = _steps(X, FD2_STEP)
    f0 = fn(X)
    out = np.empty((N, d, d))
    for i in range(d):
        Xp, Xm = X.copy(), X.copy()
        Xp[:, i] += H[:, i]
        Xm[:, i] -= H[:, i]
        out[:, i, i] = (fn(Xp) - 2 * f0 + fn(Xm)) / H[:, i] ** 2
        for j in range(i + 1, d):
            pts = []
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                Y = X.copy()
                Y[:, i] += si * H[:, i]
                Y[:, j] += sj * H[:, j]
                pts.append(fn(Y))
            out[:, i, j] = out[:, j, i] = (pts[0] - pts[1] - pts[2] + pts[3]) / (4 * H[:, i] * H[:, j])
    return out


def fd_laplacian(fn: BatchFn, X: np.ndarray) -> np.ndarray:
    N, d = X.shape
    H = _steps(X, FD2_STEP)
    f0 = fn(X)
    out = np.zeros(N)
    for i in range(d):
        Xp, Xm = X.copy(), X.copy()
        Xp[:, i] += H[:, i]
        Xm[:, i] -= H[:, i]
        out += (fn(Xp) - 2 * f0 + fn(Xm)) / H[:, i] ** 2
    return out


@dataclass
class FDReport:
    n_points: int
    gradient_error: float
    laplacian_error: float
    hessian_error: float

    @property
    def max_error(self) -> float:
        return max(self.gradient_error, self.laplacian_error, self.hessian_error)


def _rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = np.maximum(1.0, np.abs(b))
    return float(np.max(np.abs(a - b) / scale)) if a.size else 0.0


def fd_check(spec: ObjectiveSpec, n_points: int = 100, seed: int = 0) -> FDReport:
    """Compare analytic derivatives with central differences at random box points.

    Errors are relative with a floor of one: ``|a - b| / max(1, |b|)``.
    """
    rng = np.random.default_rng(seed)
    X = spec.lower + (spec.upper - spec.lower) * rng.random((n_points, spec.dim))
    g_err = l_err = h_err = 0.0
    if spec.grad_fn is not None:
        g_err = _rel_err(spec.grad_fn(X), fd_gradient(spec.value_fn, X))
        lap_ref = fd_divergence(spec.grad_fn, X)
        if spec.lap_fn is not None:
            l_err = _rel_err(spec.lap_fn(X), lap_ref)
        if spec.hess_fn is not None:
            h_err = _rel_err(spec.hess_fn(X), fd_jacobian(spec.grad_fn, X))
    return FDReport(n_points, g_err, l_err, h_err)


def certify_minimizer(spec: ObjectiveSpec, n_samples: int = 10_000, seed: int = 0) -> bool:
    """True when the recorded minimizer is no worse than ``n_samples`` Sobol points.

    The sample count is rounded up to a power of two, which Sobol balance needs.
    """
    from scipy.stats import qmc

    if spec.minimizer is None:
        return False
    m = max(0, int(np.ceil(np.log2(n_samples))))
    pts = qmc.Sobol(spec.dim, scramble=True, seed=seed).random_base2(m)
    X = qmc.scale(pts, spec.lower, spec.upper)
    return bool(spec.min_value <= np.min(spec.value_fn(X)) + 1e-12)
