"""Real-space adiabatic evolution along the linear schedule, plus runtime formulas.

The rescaled dynamics read (1/T) i ∂_s Φ = H(s) Φ with H(s) = -Δ + λ_max² s f
for s in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal, expm, logm, polar
from scipy.sparse.linalg import gmres

from . import _core
from .errors import LinearSolveFailure, MissingMinimizer, NonPositiveGap
from .functions.core import ObjectiveSpec
from .grid import GridND, build_hamiltonian, build_laplacian, node_values
from .spectral import GapCurve, lowest_eigenpairs


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear schedule b(s) = λ_max² s for the potential, a(s) = 1 for -Δ.

    ``steps`` is the Crank-Nicolson step count; ``None`` picks it from the
    Gershgorin rule ``dt ‖H(1)‖ <= dt_factor``.
    """

    lam_max: float
    T: float
    steps: Optional[int] = None
    dt_factor: float = 0.5

    def __post_init__(self):
        if self.lam_max < 0 or self.T < 0:
            raise ValueError("lam_max and T must be non-negative")

    def b(self, s):
        return self.lam_max**2 * np.asarray(s)

    def a(self, s):
        return np.ones_like(np.asarray(s, dtype=float))


@dataclass
class Checkpoint:
    s: float
    overlap: float
    energy_excess: float
    norm: float


@dataclass
class WaveState:
    amplitudes: np.ndarray
    grid: GridND
    method: str = "cn"
    steps: int = 0
    checkpoints: list = field(default_factory=list)
    initial: Optional[np.ndarray] = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def overlap(self, other) -> float:
        """|⟨other|ψ⟩|² with both sides normalized."""
        o = np.asarray(other, dtype=complex).ravel()
        a = self.amplitudes
        return float(abs(np.vdot(o, a)) ** 2 / (np.vdot(o, o).real * np.vdot(a, a).real))


def _hamiltonian_matrix(L, f, schedule, s):
    return L.matrix + sp.diags(schedule.b(s) * f)


def gershgorin_steps(grid: GridND, f: np.ndarray, schedule: AnnealSchedule) -> int:
    L = build_laplacian(grid)
    lo, hi = L.gershgorin_bounds()
    norm = hi + schedule.lam_max**2 * float(np.max(np.abs(f)))
    return max(1, int(math.ceil(schedule.T * norm / schedule.dt_factor)))


def _initial_state(kind, L, f, schedule, grid):
    if isinstance(kind, np.ndarray):
        psi = kind.astype(complex).ravel()
    elif kind == "uniform":
        psi = np.ones(grid.size, dtype=complex)
    elif kind == "ground":
        psi = lowest_eigenpairs(L.with_potential(schedule.b(0.0) * f), 1).ground.astype(complex)
    else:
        raise ValueError(f"unknown initial state {kind!r}")
    return psi / np.linalg.norm(psi)


def _checkpoint(psi, L, f, schedule, s):
    H = L.with_potential(schedule.b(s) * f)
    sol = lowest_eigenpairs(H, 1, polish=False)
    energy = float(np.vdot(psi, H.matrix @ psi).real / np.vdot(psi, psi).real)
    g = sol.ground
    overlap = float(abs(np.vdot(g, psi)) ** 2 / np.vdot(psi, psi).real)
    return Checkpoint(float(s), overlap, energy - float(sol.values[0]), float(np.linalg.norm(psi)))


def _cn_segment_nd(psi, L, f, schedule, s_points, tol):
    n = psi.size
    I = sp.identity(n, format="csr", dtype=complex)
    for s0, s1 in zip(s_points[:-1], s_points[1:]):
        H = _hamiltonian_matrix(L, f, schedule, 0.5 * (s0 + s1))
        itau = 0.5j * schedule.T * (s1 - s0)
        rhs = psi - itau * (H @ psi)
        A = (I + itau * H).tocsr()
        out, info = gmres(A, rhs, x0=psi, rtol=tol, atol=0.0, restart=50, maxiter=200)
        if info != 0:
            raise LinearSolveFailure(f"inner solve did not reach tolerance {tol:g} at s={s1:.6g}")
        psi = out
    return psi


def evolve_cn(grid, f, schedule, psi0, L, n_checkpoints=0, tol=1e-10):
    """Crank-Nicolson with the midpoint Hamiltonian; tridiagonal sweeps in 1D."""
    steps = schedule.steps or gershgorin_steps(grid, f, schedule)
    s_all = np.linspace(0.0, 1.0, steps + 1)
    marks = [0] if n_checkpoints <= 0 else sorted({int(round(k * steps / n_checkpoints))
                                                    for k in range(n_checkpoints + 1)})
    if marks[-1] != steps:
        marks.append(steps)
    psi = psi0.copy()
    checkpoints = []
    if n_checkpoints > 0:
        checkpoints.append(_checkpoint(psi, L, f, schedule, 0.0))
    for a, b in zip(marks[:-1], marks[1:]):
        seg = s_all[a:b + 1]
        if grid.ndim == 1:
            h = grid.spacing[0]
            psi = _core.cn_tridiag_evolve(psi, np.full(grid.size, 2.0 / h**2), -1.0 / h**2,
                                          np.ascontiguousarray(f, dtype=float),
                                          schedule.lam_max**2, seg, schedule.T)
        else:
            psi = _cn_segment_nd(psi, L, f, schedule, seg, tol)
        if n_checkpoints > 0:
            checkpoints.append(_checkpoint(psi, L, f, schedule, seg[-1]))
    return psi, steps, checkpoints


def _filon_weights(theta):
    out = np.ones_like(theta, dtype=complex)
    big = np.abs(theta) > 1e-8
    out[big] = (np.exp(1j * theta[big]) - 1.0) / (1j * theta[big])
    return out


def evolve_adiabatic_frame(grid, f, schedule, m=12, tol=0.05, ds0=1e-7, n_checkpoints=0):
    """Propagate in the instantaneous eigenbasis of the ``m`` lowest states (1D).

    Each step transports the frame with the orthogonal polar factor of the
    eigenvector overlap matrix and integrates the interaction-picture
    coupling over the step with exact oscillatory (Filon) weights, so the
    cost does not grow with T. Steps adapt so the frame rotation generator
    stays below ``tol``. Valid when the state stays in the low-lying
    subspace, which is what a slow schedule guarantees.
    """
    if grid.ndim != 1:
        raise ValueError("the adiabatic-frame propagator is one-dimensional")
    h = grid.spacing[0]
    n = grid.size
    m = min(m, n)
    off = np.full(n - 1, -1.0 / h**2)
    base = 2.0 / h**2

    def frame(s):
        return eigh_tridiagonal(base + schedule.b(s) * f, off, select="i", select_range=(0, m - 1))

    s = 0.0
    E0, V0 = frame(0.0)
    c = np.zeros(m, dtype=complex)
    c[0] = 1.0
    ds = ds0
    steps = 0
    marks = [k / n_checkpoints for k in range(1, n_checkpoints + 1)] if n_checkpoints > 0 else []
    checkpoints = [Checkpoint(0.0, 1.0, 0.0, 1.0)] if n_checkpoints > 0 else []
    while s < 1.0:
        ds = min(ds, 1.0 - s)
        if marks and s + ds > marks[0]:
            ds = marks[0] - s
        E1, V1 = frame(s + ds)
        V1 = V1 * np.sign(np.sum(V0 * V1, axis=0))
        O = polar(V1.T @ V0)[0]
        K = np.real(logm(O))
        if np.max(np.abs(K)) > tol and ds > 1e-14:
            ds *= 0.5
            continue
        e = 0.5 * (E0 + E1)
        W = _filon_weights(schedule.T * ds * (e[:, None] - e[None, :]))
        c = np.exp(-1j * schedule.T * ds * e) * (expm(K * W) @ c)
        s += ds
        steps += 1
        E0, V0 = E1, V1
        if marks and abs(s - marks[0]) < 1e-15:
            marks.pop(0)
            p = np.abs(c) ** 2
            checkpoints.append(Checkpoint(s, float(p[0] / p.sum()), float(p @ E0 - E0[0]),
                                          float(np.linalg.norm(c))))
        if np.max(np.abs(K)) < tol / 3:
            ds *= 1.5
    return V0 @ c, steps, checkpoints


def evolve(grid: GridND, spec: ObjectiveSpec, schedule: AnnealSchedule, *, method: str = "auto",
           initial="ground", checkpoints: int = 0, noise_eps: float = 0.0, seed: int = 0,
           max_cn_steps: int = 2_000_000, frame_size: int = 12, frame_tol: float = 0.05,
           tol: float = 1e-10) -> WaveState:
    """Evolve a state from s = 0 to s = 1.

    Parameters
    ----------
    method : {"cn", "adiabatic-frame", "auto"}
        ``auto`` uses Crank-Nicolson unless it would need more than
        ``max_cn_steps`` steps on a 1D grid, then the adiabatic frame.
    initial : {"ground", "uniform"} or array
        ``ground`` is the discrete ground state of -Δ (the s = 0
        Hamiltonian); ``uniform`` is the constant interior vector.
    checkpoints : int
        Number of equally spaced s checkpoints recording overlap with the
        instantaneous ground state (0 disables).
    noise_eps : float
        Half-width of a uniform perturbation added to node values of f.
    """
    L = build_laplacian(grid)
    f = node_values(grid, spec).astype(float)
    if noise_eps > 0:
        f = f + np.random.default_rng(seed).uniform(-noise_eps, noise_eps, f.shape)
    if method == "auto":
        steps = schedule.steps or gershgorin_steps(grid, f, schedule)
        method = "adiabatic-frame" if grid.ndim == 1 and steps > max_cn_steps else "cn"
    if method == "cn":
        psi0 = _initial_state(initial, L, f, schedule, grid)
        psi, steps, cps = evolve_cn(grid, f, schedule, psi0, L, checkpoints, tol)
    elif method == "adiabatic-frame":
        if not (isinstance(initial, str) and initial == "ground"):
            raise ValueError("the adiabatic-frame propagator starts from the ground state")
        psi0 = _initial_state("ground", L, f, schedule, grid)
        psi, steps, cps = evolve_adiabatic_frame(grid, f, schedule, frame_size, frame_tol,
                                                 n_checkpoints=checkpoints)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WaveState(np.asarray(psi, dtype=complex), grid, method, steps, cps, psi0)


def success_probability(state: WaveState, spec: ObjectiveSpec, eps: float, criterion: str = "value") -> float:
    """Mass of |ψ|² on nodes with f(x) - f(x*) <= eps (or ‖x - x*‖ <= eps)."""
    if spec.minimizer is None:
        raise MissingMinimizer(f"{spec.name} has no recorded minimizer")
    X = state.grid.nodes()
    if criterion == "value":
        ok = spec.value(X, check=False) - spec.min_value <= eps
    elif criterion == "distance":
        ok = np.linalg.norm(X - spec.minimizer, axis=1) <= eps
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    return float(state.probabilities[ok].sum())


def final_ground_overlap(state: WaveState, spec: ObjectiveSpec, lam_max: float) -> float:
    H = build_hamiltonian(state.grid, spec, lam_max)
    return state.overlap(lowest_eigenpairs(H, 1).ground)


# -- runtime formulas ---------------------------------------------------------

def adiabatic_theta(gap_curve, lam_max: float, Lam: float) -> float:
    """λ_max² Λ / δ(1)² + 12 ∫_0^1 λ_max⁴ Λ² / δ(s)³ ds by the trapezoid rule.

    ``gap_curve`` holds δ sampled on s-values covering [0, 1] (a GapCurve
    or a pair of arrays).
    """
    if isinstance(gap_curve, GapCurve):
        s, gap = gap_curve.parameter, gap_curve.gap
    else:
        s, gap = (np.asarray(a, dtype=float) for a in gap_curve)
    if np.any(gap <= 0):
        raise NonPositiveGap("gap samples must be positive")
    if abs(s[0]) > 1e-12 or abs(s[-1] - 1.0) > 1e-12:
        raise ValueError("gap samples must span s = 0 to s = 1")
    integral = np.trapezoid(gap**-3.0, s)
    return float(lam_max**2 * Lam / gap[-1] ** 2 + 12.0 * lam_max**4 * Lam**2 * integral)


def schedule_s_grid(points: int = 129, s_min: float = 1e-8) -> np.ndarray:
    """s = 0 followed by geometrically spaced samples from ``s_min`` to 1.

    The gap changes on the scale λ_max² s ~ 1, i.e. at tiny s when λ_max is
    large, so uniform samples in s would miss the dip.
    """
    return np.concatenate([[0.0], np.geomspace(s_min, 1.0, points - 1)])


def theta_for(spec: ObjectiveSpec, grid: GridND, lam_max: float, points: int = 129,
              Lam: Optional[float] = None):
    """θ for ``spec`` on ``grid`` with Λ = max |f| over nodes by default."""
    from .spectral import adiabatic_gap_profile

    curve = adiabatic_gap_profile(spec, grid, lam_max, schedule_s_grid(points))
    Lam = float(np.max(np.abs(node_values(grid, spec)))) if Lam is None else Lam
    return adiabatic_theta(curve, lam_max, Lam), curve, Lam


def required_lambda_max(d: float, L: float, eps: float, r: float) -> float:
    """max(8 d √L / ε, 4 / (√ε r))."""
    if min(d, L, eps, r) <= 0:
        raise ValueError("all arguments must be positive")
    return max(8.0 * d * math.sqrt(L) / eps, 4.0 / (math.sqrt(eps) * r))


def local_hessian_bound(spec: ObjectiveSpec, r: float, samples: int = 2001, seed: int = 0) -> float:
    """sup ‖∇²f‖ over the r-ball around the minimizer (dense scan in 1D, random in higher d)."""
    if spec.minimizer is None:
        raise MissingMinimizer(f"{spec.name} has no recorded minimizer")
    x0 = spec.minimizer
    if spec.dim == 1:
        X = (x0 + np.linspace(-r, r, samples))[:, None]
    else:
        rng = np.random.default_rng(seed)
        U = rng.standard_normal((samples, spec.dim))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        X = x0 + U * r * rng.random((samples, 1)) ** (1.0 / spec.dim)
    H = np.atleast_3d(spec.hessian(X, check=False)).reshape(len(X), spec.dim, spec.dim)
    return float(np.max(np.abs(np.linalg.eigvalsh(H))))


def lambda_max_for(spec: ObjectiveSpec, eps: float, radii=None):
    """Smallest required λ_max over candidate radii r; returns (λ_max, r, L)."""
    radii = np.geomspace(1e-3, 1.0, 61) if radii is None else np.asarray(radii, dtype=float)
    best = None
    for r in radii:
        L = local_hessian_bound(spec, float(r))
        lam = required_lambda_max(spec.dim, L, eps, float(r))
        if best is None or lam < best[0]:
            best = (lam, float(r), L)
    return best


@dataclass
class MarkovReport:
    lam: float
    eps: float
    tail: float
    mean_excess: float
    threshold: Optional[float] = None

    @property
    def markov_bound(self) -> float:
        return self.mean_excess / self.eps

    @property
    def passed(self) -> bool:
        return self.tail <= 0.2


def energy_markov_check(spec: ObjectiveSpec, grid: GridND, lam: float, eps: float, state=None,
                        threshold: Optional[float] = None) -> MarkovReport:
    """Tail mass P[f(X) - f(x*) >= ε] and E[f(X) - f(x*)] under |ψ|².

    ``state`` defaults to the ground state of H(λ).
    """
    if spec.minimizer is None:
        raise MissingMinimizer(f"{spec.name} has no recorded minimizer")
    if state is None:
        psi = lowest_eigenpairs(build_hamiltonian(grid, spec, lam), 1).ground
    else:
        psi = state.amplitudes if isinstance(state, WaveState) else np.asarray(state)
    p = np.abs(psi) ** 2
    p /= p.sum()
    excess = node_values(grid, spec) - spec.min_value
    return MarkovReport(float(lam), float(eps), float(p[excess >= eps].sum()), float(p @ excess), threshold)
