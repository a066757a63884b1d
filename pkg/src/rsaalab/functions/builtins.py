"""The benchmark corpus: closed-form objectives with analytic derivatives."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .core import ObjectiveSpec

TWO_PI = 2.0 * np.pi


def _separable(name, dim, lo, hi, g, dg, d2g, minimizer=None, min_value=None, meta=None):
    """Build Σ g(x_i) from vectorized 1D callables."""

    def value(X):
        return np.sum(g(X), axis=1)

    def grad(X):
        return dg(X)

    def hess(X):
        D = d2g(X)
        out = np.zeros(X.shape + (X.shape[1],))
        idx = np.arange(X.shape[1])
        out[:, idx, idx] = D
        return out

    def lap(X):
        return np.sum(d2g(X), axis=1)

    box = np.tile([lo, hi], (dim, 1))
    return ObjectiveSpec(name, dim, box, value, grad, hess, lap,
                         minimizer=minimizer, min_value=min_value, meta=dict(meta or {}, separable=True))


# -- biquartic ------------------------------------------------------------

BIQUARTIC_SHIFT = 1.0 / 32.0


def _biquartic_raw(x):
    return x**4 - (x - BIQUARTIC_SHIFT) ** 2


def _biquartic_dg(x):
    return 4 * x**3 - 2 * (x - BIQUARTIC_SHIFT)


def _biquartic_d2g(x):
    return 12 * x**2 - 2.0


def biquartic_critical_points() -> np.ndarray:
    """The three real roots of 4x^3 - 2(x - 1/32), ascending."""
    # bracket each root using the inflection points of the derivative at ±1/sqrt(6)
    k = 1.0 / np.sqrt(6.0)
    brackets = [(-2.0, -k), (-k, k), (k, 2.0)]
    return np.array([brentq(_biquartic_dg, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
                     for a, b in brackets])


def make_biquartic(dim: int = 1) -> ObjectiveSpec:
    """x^4 - (x - 1/32)^2 + c summed over coordinates, with c making the minimum 0.

    The lower well (near -0.72) is global; the upper well (near +0.69) is a
    local minimum slightly higher.
    """
    crit = biquartic_critical_points()
    x_star = crit[0]
    c = -float(_biquartic_raw(x_star))
    meta = {"c": c, "critical_points": crit.tolist(), "local_min": float(crit[2]), "saddle": float(crit[1]),
            # per-coordinate derivative 4x^3 - 2x + 1/16, highest degree first
            "grad_poly": [4.0, 0.0, -2.0, 1.0 / 16.0]}
    name = "biquartic" if dim == 1 else f"biquartic{dim}"
    return _separable(name, dim, -2.0, 2.0,
                      lambda x: _biquartic_raw(x) + c, _biquartic_dg, _biquartic_d2g,
                      minimizer=np.full(dim, x_star), min_value=0.0, meta=meta)


# -- modified Rastrigin ---------------------------------------------------

# x^2 ((x^2 - 1)^2 + 4)((x^2 - 4)^2 + 1/8) as an exact polynomial
_X2 = Polynomial([0, 0, 1])
_RAST_POLY = _X2 * ((_X2 - 1) ** 2 + 4) * ((_X2 - 4) ** 2 + 0.125)
_RAST_DPOLY = _RAST_POLY.deriv()
_RAST_D2POLY = _RAST_DPOLY.deriv()


def _fi(x):
    return _RAST_POLY(x) - 100.0 * np.cos(TWO_PI * x)


def _dfi(x):
    return _RAST_DPOLY(x) + 200.0 * np.pi * np.sin(TWO_PI * x)


def _d2fi(x):
    return _RAST_D2POLY(x) + 400.0 * np.pi**2 * np.cos(TWO_PI * x)


def make_fi_1d() -> ObjectiveSpec:
    """One coordinate term of the modified Rastrigin function, on [-3, 3]."""
    return _separable("fi", 1, -3.0, 3.0, _fi, _dfi, _d2fi, minimizer=[0.0], min_value=-100.0)


def make_modified_rastrigin(d: int) -> ObjectiveSpec:
    """10 d + Σ f_i(x_i); global minimum -90 d at the origin."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return _separable("modified_rastrigin", d, -3.0, 3.0,
                      lambda x: _fi(x) + 10.0, _dfi, _d2fi,
                      minimizer=np.zeros(d), min_value=-90.0 * d)


# -- separable Rastrigin --------------------------------------------------

def make_rastrigin_sep(d: int = 2) -> ObjectiveSpec:
    """Σ x_i^2 - 10 cos(2π x_i) + 10 d on [-5.12, 5.12]^d."""
    return _separable(
        "rastrigin_sep", d, -5.12, 5.12,
        lambda x: x**2 - 10.0 * np.cos(TWO_PI * x) + 10.0,
        lambda x: 2 * x + 20.0 * np.pi * np.sin(TWO_PI * x),
        lambda x: 2.0 + 40.0 * np.pi**2 * np.cos(TWO_PI * x),
        minimizer=np.zeros(d), min_value=0.0)


# -- Levy -----------------------------------------------------------------

def _levy_terms(W):
    w1, w2 = W[:, 0], W[:, 1]
    a = np.pi * w1 + 1.0
    s1 = np.sin(np.pi * w1)
    sa = np.sin(a)
    s2 = np.sin(TWO_PI * w2)
    L1 = s1**2 + (w1 - 1) ** 2 * (1 + 10 * sa**2)
    L2 = (w2 - 1) ** 2 * (1 + s2**2)
    dL1 = (np.pi * np.sin(TWO_PI * w1) + 2 * (w1 - 1) * (1 + 10 * sa**2)
           + (w1 - 1) ** 2 * 10 * np.pi * np.sin(2 * a))
    dL2 = 2 * (w2 - 1) * (1 + s2**2) + (w2 - 1) ** 2 * TWO_PI * np.sin(4 * np.pi * w2)
    d2L1 = (2 * np.pi**2 * np.cos(TWO_PI * w1) + 2 * (1 + 10 * sa**2)
            + 40 * np.pi * (w1 - 1) * np.sin(2 * a) + 20 * np.pi**2 * (w1 - 1) ** 2 * np.cos(2 * a))
    d2L2 = (2 * (1 + s2**2) + 8 * np.pi * (w2 - 1) * np.sin(4 * np.pi * w2)
            + 8 * np.pi**2 * (w2 - 1) ** 2 * np.cos(4 * np.pi * w2))
    return (L1, L2), (dL1, dL2), (d2L1, d2L2)


def make_levy2() -> ObjectiveSpec:
    """Two-dimensional Levy function on [-10, 10]^2 with w = 1 + (x - 1)/4."""

    def w(X):
        return 1.0 + (X - 1.0) / 4.0

    def value(X):
        (L1, L2), _, _ = _levy_terms(w(X))
        return L1 + L2

    def grad(X):
        _, (d1, d2), _ = _levy_terms(w(X))
        return np.stack([d1, d2], axis=1) / 4.0

    def hess(X):
        _, _, (h1, h2) = _levy_terms(w(X))
        H = np.zeros((X.shape[0], 2, 2))
        H[:, 0, 0] = h1 / 16.0
        H[:, 1, 1] = h2 / 16.0
        return H

    def lap(X):
        _, _, (h1, h2) = _levy_terms(w(X))
        return (h1 + h2) / 16.0

    return ObjectiveSpec("levy2", 2, [[-10, 10], [-10, 10]], value, grad, hess, lap,
                         minimizer=[1.0, 1.0], min_value=0.0, meta={"separable": True})


# -- perturbed strongly convex -------------------------------------------

def default_convex_radius(d: int) -> float:
    return 3.0 * np.sqrt(d * np.log(d + 1.0))


def _radial_spec(name, d, R, F, dF_over_r, d2F, minimizer, meta):
    """Objective depending on x only through r = ‖x‖.

    ``F(r)``, ``F'(r)/r`` and ``F''(r)`` must be smooth at r = 0.
    """

    def value(X):
        return F(np.linalg.norm(X, axis=1))

    def grad(X):
        r = np.linalg.norm(X, axis=1)
        return X * dF_over_r(r)[:, None]

    def hess(X):
        r = np.linalg.norm(X, axis=1)
        a = dF_over_r(r)
        b = d2F(r)
        safe = np.where(r > 0, r, 1.0)
        U = X / safe[:, None]
        H = (b - a)[:, None, None] * U[:, :, None] * U[:, None, :]
        H[r == 0] = 0.0
        idx = np.arange(d)
        H[:, idx, idx] += a[:, None]
        return H

    def lap(X):
        r = np.linalg.norm(X, axis=1)
        return d2F(r) + (d - 1) * dF_over_r(r)

    return ObjectiveSpec(name, d, np.tile([-R, R], (d, 1)), value, grad, hess, lap,
                         minimizer=minimizer, meta=meta)


def make_perturbed_convex(d: int, kind: str = "oscillatory", *, sign: float = -1.0,
                          amplitude: float | None = None, frequency: float | None = None,
                          radius: float | None = None, c: float = 1.5, L: float = 1.0,
                          center=None) -> ObjectiveSpec:
    """Strongly convex quadratics carrying a bounded oscillating perturbation.

    kind="oscillatory"
        f(x) = ‖x‖² + sign·amplitude·‖x‖·sin(frequency·‖x‖²). Defaults are
        sign=-1, amplitude=1/d, frequency=d; ``sign=+1, amplitude=1,
        frequency=1`` gives the variant used for two-dimensional surface
        plots. The minimizer is the origin.
    kind="annulus"
        Pure quadratic (L/2)‖x - y‖² inside the ball of radius
        ρ = c·sqrt(d ln(d+1)) around y, and
        (L/2)‖x - y‖² + sin(d(‖x - y‖² - ρ²)/2) + 1 outside, with unit
        direction weight. The minimizer is y.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    R = default_convex_radius(d) if radius is None else float(radius)
    if kind == "oscillatory":
        a = 1.0 / d if amplitude is None else float(amplitude)
        w = float(d) if frequency is None else float(frequency)
        sa = sign * a

        def F(r):
            return r**2 + sa * r * np.sin(w * r**2)

        def dF_over_r(r):
            # sin(w r^2)/r written through sinc so r = 0 is regular
            return 2.0 + sa * (w * r * np.sinc(w * r**2 / np.pi) + 2 * w * r * np.cos(w * r**2))

        def d2F(r):
            return 2.0 + sa * (6 * w * r * np.cos(w * r**2) - 4 * w**2 * r**3 * np.sin(w * r**2))

        meta = {"kind": kind, "sign": sign, "amplitude": a, "frequency": w}
        return _radial_spec("perturbed_convex", d, R, F, dF_over_r, d2F, np.zeros(d), meta)

    if kind == "annulus":
        y = np.zeros(d) if center is None else np.asarray(center, dtype=float).reshape(d)
        rho2 = c**2 * d * np.log(d + 1.0)
        half = 2.0 * np.sqrt(rho2) if radius is None else float(radius)

        def phase(q):
            return d * (q - rho2) / 2.0

        def value(X):
            q = np.sum((X - y) ** 2, axis=1)
            out = 0.5 * L * q
            return np.where(q <= rho2, out, out + np.sin(phase(q)) + 1.0)

        def coef(q):
            return np.where(q <= rho2, L, L + d * np.cos(phase(q)))

        def grad(X):
            U = X - y
            return U * coef(np.sum(U**2, axis=1))[:, None]

        def hess(X):
            U = X - y
            q = np.sum(U**2, axis=1)
            outer = np.where(q <= rho2, 0.0, -(d**2) * np.sin(phase(q)))
            H = outer[:, None, None] * U[:, :, None] * U[:, None, :]
            idx = np.arange(d)
            H[:, idx, idx] += coef(q)[:, None]
            return H

        def lap(X):
            U = X - y
            q = np.sum(U**2, axis=1)
            return d * coef(q) + np.where(q <= rho2, 0.0, -(d**2) * np.sin(phase(q)) * q)

        box = np.stack([y - half, y + half], axis=1)
        meta = {"kind": kind, "radius": float(np.sqrt(rho2)), "L": L}
        return ObjectiveSpec("perturbed_convex_annulus", d, box, value, grad, hess, lap,
                             minimizer=y, min_value=0.0, meta=meta)

    raise ValueError(f"unknown kind {kind!r}")


# -- simple references ----------------------------------------------------

def make_quadratic(d: int = 1, mu: float = 2.0, box: float = 5.0) -> ObjectiveSpec:
    """(mu/2)‖x‖²; mu=2 gives ‖x‖²."""
    return _separable("quadratic", d, -box, box,
                      lambda x: 0.5 * mu * x**2, lambda x: mu * x, lambda x: np.full_like(x, mu),
                      minimizer=np.zeros(d), min_value=0.0, meta={"mu": mu})


def make_double_well(d: int = 1) -> ObjectiveSpec:
    """Symmetric (x² - 1)² per coordinate on [-2, 2]; two degenerate minima."""
    return _separable("double_well", d, -2.0, 2.0,
                      lambda x: (x**2 - 1) ** 2, lambda x: 4 * x * (x**2 - 1), lambda x: 12 * x**2 - 4,
                      minimizer=np.ones(d), min_value=0.0)


BUILTINS = {
    "biquartic": lambda d=1: make_biquartic(d),
    "modified_rastrigin": lambda d=1: make_modified_rastrigin(d),
    "fi": lambda d=1: make_fi_1d(),
    "rastrigin_sep": lambda d=2: make_rastrigin_sep(d),
    "levy2": lambda d=2: make_levy2(),
    "perturbed_convex": lambda d=2: make_perturbed_convex(d),
    "perturbed_convex_annulus": lambda d=2: make_perturbed_convex(d, "annulus"),
    "quadratic": lambda d=1: make_quadratic(d),
    "harmonic": lambda d=1: make_quadratic(d, mu=2.0, box=12.0),
    "double_well": lambda d=1: make_double_well(d),
}


def get_builtin(name: str, dim: int | None = None) -> ObjectiveSpec:
    """Look up a builtin by name; ``dim`` is ignored by fixed-dimension functions."""
    key = name.replace("-", "_").lower()
    if key not in BUILTINS:
        raise KeyError(f"unknown function {name!r}; choose from {sorted(BUILTINS)}")
    return BUILTINS[key]() if dim is None else BUILTINS[key](dim)
