"""Low-lying eigenpairs, spectral gaps, gap sweeps and ground-state potentials."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import splu

from .errors import BlockTooLarge, NoConvergence, NonPositiveGap
from .functions.core import ObjectiveSpec
from .functions.rotated import RotatedSeparable
from .grid import (GridND, SparseSymOperator, build_hamiltonian, build_laplacian, build_witten,
                   build_witten_from_potential, warn_if_truncated)

DEGENERACY_THRESHOLD = 1e-12


@dataclass
class EigenSolution:
    """Ascending eigenvalues with unit eigenvectors stored as columns."""

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    iterations: int
    shift: float = 0.0
    grid: Optional[GridND] = None

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def ground(self) -> np.ndarray:
        return self.vectors[:, 0]

    @property
    def raw_gap(self) -> float:
        return float(self.values[1] - self.values[0])

    @property
    def degenerate(self) -> bool:
        return self.raw_gap < DEGENERACY_THRESHOLD

    @property
    def gap(self) -> float:
        """E2 - E1, reported as exactly 0 below the degeneracy threshold."""
        return 0.0 if self.degenerate else self.raw_gap


def _factor(A: sp.csr_matrix, sigma: float):
    n = A.shape[0]
    lu = splu((A - sigma * sp.identity(n, format="csr")).tocsc())
    return lu.solve


def _lanczos_inverse(solve, n, nev, m, tol_theta, max_restarts, rng):
    """Largest-magnitude eigenpairs of the operator ``solve`` (a symmetric inverse).

    Explicitly restarted Lanczos with full reorthogonalization of every new
    vector against the current basis and the locked (converged) vectors.
    Returns (thetas, vectors, iterations, converged flag).
    """
    m = min(m, n)
    locked_vals, locked_vecs = [], np.zeros((n, 0))
    start = rng.standard_normal(n)
    iterations = 0
    for _ in range(max_restarts):
        want = nev - len(locked_vals)
        if want <= 0:
            break
        mm = min(m, n - locked_vecs.shape[1])
        Q = np.zeros((n, mm + 1))
        alpha, beta = np.zeros(mm), np.zeros(mm)
        v = start - locked_vecs @ (locked_vecs.T @ start)
        nv = np.linalg.norm(v)
        if nv == 0:
            v = rng.standard_normal(n)
            v -= locked_vecs @ (locked_vecs.T @ v)
            nv = np.linalg.norm(v)
        Q[:, 0] = v / nv
        steps = mm
        for j in range(mm):
            w = solve(Q[:, j])
            iterations += 1
            alpha[j] = Q[:, j] @ w
            for _pass in range(2):
                if locked_vecs.shape[1]:
                    w -= locked_vecs @ (locked_vecs.T @ w)
                w -= Q[:, :j + 1] @ (Q[:, :j + 1].T @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-14 * max(1.0, abs(alpha[j])):
                steps = j + 1
                break
            Q[:, j + 1] = w / beta[j]
        theta, S = eigh_tridiagonal(alpha[:steps], beta[:steps - 1])
        order = np.argsort(-np.abs(theta))
        theta, S = theta[order], S[:, order]
        resid_est = np.abs(beta[steps - 1] * S[-1, :])
        Y = Q[:, :steps] @ S[:, :want]
        newly = 0
        for i in range(want):
            if resid_est[i] <= tol_theta * abs(theta[i]) or steps < mm:
                newly += 1
            else:
                break
        if newly:
            y = Y[:, :newly]
            y -= locked_vecs @ (locked_vecs.T @ y)
            y, _ = np.linalg.qr(y)
            locked_vecs = np.hstack([locked_vecs, y])
            locked_vals.extend(theta[:newly].tolist())
        rest = Y[:, newly:want]
        start = rest.sum(axis=1) if rest.shape[1] else rng.standard_normal(n)
    converged = len(locked_vals) >= nev
    return np.array(locked_vals), locked_vecs, iterations, converged


def _polish_ground(A, E1, E2, v, max_iter=300, rtol=1e-13):
    """Inverse iteration from |v| at a shift just below E1.

    ``A - σI`` is then a nonsingular M-matrix, so iterates stay positive and
    the exponentially small tails are resolved to relative accuracy.
    """
    sigma = E1 - 0.05 * max(E2 - E1, 1e-10 * max(1.0, abs(E1)))
    solve = _factor(A, sigma)
    x = np.abs(v)
    x /= np.linalg.norm(x)
    for _ in range(max_iter):
        y = np.abs(solve(x))
        y /= np.linalg.norm(y)
        # relative change per node, so the tails converge too
        change = np.max(np.abs(y - x) / np.maximum(y, 1e-300))
        x = y
        if change < rtol:
            break
    return x


def lowest_eigenpairs(op, k: int = 2, tol: float = 1e-10, *, seed: int = 0, restart_dim: int = 64,
                      max_restarts: int = 200, shift: Optional[float] = None,
                      polish: Optional[bool] = None) -> EigenSolution:
    """The ``k`` lowest eigenpairs of a symmetric sparse operator.

    Shift-invert Lanczos: a first pass at the Gershgorin lower bound minus
    one locates the spectrum; when the wanted eigenvalues are clustered
    relative to their distance from that shift, a second pass refactors
    just below the estimated E1. ``tol`` bounds the residual
    ``‖Av - Ev‖`` relative to the Gershgorin norm bound of ``A``.

    The ground vector is made nonnegative. With ``polish`` (default: on for
    up to 10⁶ nodes) it is refined by positive inverse iteration so that
    -log ψ₁² is meaningful far into the tails.
    """
    if not 1 <= k <= 10:
        raise ValueError("k must be between 1 and 10")
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = op.matrix if isinstance(op, SparseSymOperator) else sp.csr_matrix(op)
    n = A.shape[0]
    if k > n:
        raise ValueError("k exceeds operator size")
    grid = op.grid if isinstance(op, SparseSymOperator) else None
    rng = np.random.default_rng(seed)
    diag = A.diagonal()
    radius = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(diag)
    g_lo, g_hi = float(np.min(diag - radius)), float(np.max(diag + radius))
    norm_bound = max(abs(g_lo), abs(g_hi), 1.0)
    nev = min(k + 1, n)

    def run(sigma):
        solve = _factor(A, sigma)
        theta, Y, its, ok = _lanczos_inverse(solve, n, nev, restart_dim, 1e-13, max_restarts, rng)
        vals = sigma + 1.0 / theta
        order = np.argsort(vals)
        return vals[order], Y[:, order], its, ok

    sigma = g_lo - 1.0 if shift is None else float(shift)
    vals, Y, its, ok = run(sigma)
    total = its
    if shift is None and ok and nev > 1:
        spread = vals[-1] - vals[0]
        if spread < 0.25 * (vals[0] - sigma):
            sigma = vals[0] - 0.5 * max(vals[1] - vals[0], 1e-8 * max(1.0, abs(vals[0])))
            vals, Y, its, ok = run(sigma)
            total += its
    if not ok:
        raise NoConvergence(f"Lanczos did not converge {nev} eigenpairs in {max_restarts} restarts",
                            iterations=total, residuals=None)
    vals, Y = vals[:k], Y[:, :k]
    # Rayleigh-Ritz in the found subspace sharpens values and orthogonality
    Qs, _ = np.linalg.qr(Y)
    Hs = Qs.T @ (A @ Qs)
    w, S = np.linalg.eigh(0.5 * (Hs + Hs.T))
    vals, Y = w, Qs @ S
    g = Y[:, 0]
    Y[:, 0] = g if g.sum() >= 0 else -g
    if polish is None:
        polish = n <= 1_000_000
    if polish and k >= 1:
        E2 = vals[1] if k > 1 else vals[0] + max(1.0, abs(vals[0]))
        Y[:, 0] = _polish_ground(A, vals[0], E2, Y[:, 0])
        vals[0] = float(Y[:, 0] @ (A @ Y[:, 0]))
        if k > 1:
            rest = Y[:, 1:] - np.outer(Y[:, 0], Y[:, 0] @ Y[:, 1:])
            Y[:, 1:], _ = np.linalg.qr(rest)
    residuals = np.linalg.norm(A @ Y - Y * vals, axis=0)
    if not ok or np.any(residuals > tol * norm_bound):
        raise NoConvergence(
            f"eigensolver did not reach tolerance {tol:g} (residuals {residuals})",
            iterations=total, residuals=residuals)
    return EigenSolution(np.asarray(vals), Y, residuals, total, sigma, grid)


def spectral_gap(op, tol: float = 1e-10, **kw) -> float:
    """E2 - E1, or 0 when the pair is numerically degenerate."""
    return lowest_eigenpairs(op, 2, tol, polish=False, **kw).gap


def ground_state_potential(sol: EigenSolution, floor: float = 1e-300) -> np.ndarray:
    """-log ψ₁² with the minimum shifted to 0; ψ₁² is floored at ``floor``."""
    psi = sol.ground
    p = np.maximum(psi**2 / np.max(psi**2), floor)
    out = -np.log(p)
    out -= out.min()
    return out.reshape(sol.grid.shape) if sol.grid is not None else out


# -- sweeps ---------------------------------------------------------------

@dataclass
class GapCurve:
    parameter: np.ndarray
    gap: np.ndarray
    scaling_mode: str = "raw"
    operator: str = "schrodinger"
    failures: list = field(default_factory=list)
    degenerate: list = field(default_factory=list)

    def __post_init__(self):
        self.parameter = np.asarray(self.parameter, dtype=float)
        self.gap = np.asarray(self.gap, dtype=float)
        if self.parameter.shape != self.gap.shape:
            raise ValueError("parameter and gap lengths differ")

    def log_fit(self):
        """Least-squares line through (parameter, log gap): slope, intercept, R²."""
        x, y = self.parameter, np.log(self.gap)
        slope, intercept = np.polyfit(x, y, 1)
        pred = slope * x + intercept
        ss_res = np.sum((y - pred) ** 2)
        ss_tot = np.sum((y - y.mean()) ** 2)
        return float(slope), float(intercept), float(1 - ss_res / ss_tot) if ss_tot > 0 else 1.0

    def to_csv(self, path):
        from .io import write_csv

        name = "lambda" if self.operator == "schrodinger" else "beta"
        label = "gap_over_lambda" if self.scaling_mode == "rescaled" else "gap"
        write_csv(path, [f"param_{name}", label], zip(self.parameter, self.gap))

    def to_svg(self, path, title=""):
        from .io import svg_line_chart

        svg_line_chart(path, [(self.operator, self.parameter, self.gap)], title=title, logy=True)


def _pool_size() -> int:
    try:
        return max(1, int(os.environ.get("RSAA_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def gap_sweep(spec: ObjectiveSpec, params: Sequence[float], grid: GridND, operator: str = "schrodinger",
              scaling_mode: str = "raw", tol: float = 1e-10) -> GapCurve:
    """One eigensolve per parameter value.

    operator="schrodinger" uses H(λ) = -Δ + λ²f; scaling_mode="rescaled"
    reports the gap of (1/λ)(-Δ) + λf, i.e. gap(H(λ))/λ.
    operator="witten" uses -Δ + β²‖∇f‖² - βΔf (φ = βf, stationary density
    ∝ e^{-2βf}). Points whose eigensolve fails are skipped and listed in
    ``failures``.
    """
    params = np.asarray(params, dtype=float)
    if np.any(params <= 0) or np.any(np.diff(params) <= 0):
        raise ValueError("parameters must be positive and ascending")
    if operator not in ("schrodinger", "witten"):
        raise ValueError(f"unknown operator {operator!r}")
    if scaling_mode not in ("raw", "rescaled"):
        raise ValueError(f"unknown scaling mode {scaling_mode!r}")
    L = build_laplacian(grid)

    def one(p):
        op = build_hamiltonian(grid, spec, p, L) if operator == "schrodinger" else build_witten(grid, spec, p, L)
        sol = lowest_eigenpairs(op, 2, tol, polish=False)
        g = sol.gap
        if operator == "schrodinger" and scaling_mode == "rescaled":
            g /= p
        return g, sol.degenerate

    with ThreadPoolExecutor(_pool_size()) as pool:
        futures = [pool.submit(one, p) for p in params]
    kept_p, kept_g, failures, degenerate = [], [], [], []
    for p, fut in zip(params, futures):
        try:
            g, deg = fut.result()
        except NoConvergence as exc:
            failures.append((float(p), str(exc)))
            continue
        kept_p.append(p)
        kept_g.append(g)
        if deg:
            degenerate.append(float(p))
    return GapCurve(np.array(kept_p), np.array(kept_g), scaling_mode, operator, failures, degenerate)


def block_gap(spec: ObjectiveSpec, lam: float, n: int, tol: float = 1e-10) -> float:
    if spec.dim > 3:
        raise BlockTooLarge(f"block {spec.name} has dimension {spec.dim} > 3")
    grid = GridND.uniform(spec.box, n)
    return lowest_eigenpairs(build_hamiltonian(grid, spec, lam), 2, tol, polish=False).gap


def separable_gap(rs, lam: float, n: int = 1023, tol: float = 1e-10) -> float:
    """Gap of -Δ + λ² Σ g_i as the minimum over block gaps.

    The operator is a Kronecker sum of the block operators, so its gap is
    exactly the smallest block gap. Rotation does not enter because -Δ is
    rotation invariant. ``n`` is the interior resolution per block axis.
    """
    blocks = rs.blocks if isinstance(rs, RotatedSeparable) else tuple(rs)
    for b in blocks:
        if b.dim > 3:
            raise BlockTooLarge(f"block {b.name} has dimension {b.dim} > 3")
    return min(block_gap(b, lam, n, tol) for b in blocks)


@dataclass
class TransformReport:
    lam: float
    gap_h: float
    gap_witten: float
    ground_energy_witten: float
    boundary_mass: float

    @property
    def relative_difference(self) -> float:
        return abs(self.gap_h - self.gap_witten) / self.gap_h


def transform_equivalence_report(spec: ObjectiveSpec, lam: float, grid: GridND,
                                 tol: float = 1e-10) -> TransformReport:
    """Compare gap(H(λ)) with the gap of the Witten operator built from φ = -log ψ₁."""
    L = build_laplacian(grid)
    sol = lowest_eigenpairs(build_hamiltonian(grid, spec, lam, L), 2, tol, polish=True)
    mass = warn_if_truncated(grid, sol.ground)
    phi = -np.log(np.maximum(sol.ground, 1e-300))
    wsol = lowest_eigenpairs(build_witten_from_potential(grid, phi, L), 2, tol, polish=False)
    return TransformReport(float(lam), sol.gap, wsol.gap, float(wsol.values[0]), mass)


def rayleigh_quotient(op, v) -> float:
    A = op.matrix if isinstance(op, SparseSymOperator) else op
    v = np.asarray(v, dtype=float)
    return float(v @ (A @ v) / (v @ v))


def adiabatic_gap_profile(spec: ObjectiveSpec, grid: GridND, lam_max: float, s_values,
                          tol: float = 1e-10) -> GapCurve:
    """Gap of -Δ + (λ_max² s) f along the schedule parameter s."""
    s_values = np.asarray(s_values, dtype=float)
    L = build_laplacian(grid)
    gaps = [lowest_eigenpairs(build_hamiltonian(grid, spec, lam_max * np.sqrt(s), L), 2, tol,
                              polish=False).gap for s in s_values]
    gaps = np.array(gaps)
    if np.any(gaps <= 0):
        raise NonPositiveGap("gap profile has a non-positive entry")
    return GapCurve(s_values, gaps, "raw", "schedule")
