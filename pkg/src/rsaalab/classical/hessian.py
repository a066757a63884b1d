"""Rotation recovery from two finite-difference Hessians, then blockwise grid search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import BlockRecoveryFailed
from ..functions.core import ObjectiveSpec
from ..functions.rotated import RotatedSeparable
from .base import Evaluator, OptimizerConfig, RunRecord, execute
from .local import lbfgs_box


def fd_hessian_stencil(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Points and assembly weights of a fourth-order central Hessian stencil.

    Diagonal: (-f(±2h) + 16 f(±h) - 30 f(0)) / 12h². Off-diagonal: the
    Richardson combination (16 S(h) - S(2h)) / 48 h_i h_j of the four-point
    cross stencil S. Uses 4d + 1 + 8 d(d-1)/2 points.
    """
    d = x.size
    pts = [x]
    E = np.diag(h)
    for i in range(d):
        pts += [x + E[i], x - E[i], x + 2 * E[i], x - 2 * E[i]]
    for i, j in itertools.combinations(range(d), 2):
        for m in (1, 2):
            a, b = m * E[i], m * E[j]
            pts += [x + a + b, x + a - b, x - a + b, x - a - b]
    return np.array(pts)


def fd_hessian_from_values(v: np.ndarray, h: np.ndarray) -> np.ndarray:
    d = h.size
    f0 = v[0]
    H = np.empty((d, d))
    for i in range(d):
        fp, fm, fp2, fm2 = v[1 + 4 * i: 5 + 4 * i]
        H[i, i] = (-fp2 + 16 * fp - 30 * f0 + 16 * fm - fm2) / (12 * h[i] ** 2)
    k = 1 + 4 * d
    for i, j in itertools.combinations(range(d), 2):
        s1 = v[k] - v[k + 1] - v[k + 2] + v[k + 3]
        s2 = v[k + 4] - v[k + 5] - v[k + 6] + v[k + 7]
        H[i, j] = H[j, i] = (16 * s1 - s2) / (48 * h[i] * h[j])
        k += 8
    return H


def fd_hessian_black_box(ev: Evaluator, x: np.ndarray, step: float = 1e-4) -> np.ndarray:
    h = step * (1.0 + np.abs(x))
    return fd_hessian_from_values(ev.values(fd_hessian_stencil(x, h)), h)


@dataclass
class BlockRecovery:
    V: np.ndarray
    blocks: list
    off_block: float
    scale: float


def _pattern(M: np.ndarray, cut: float) -> np.ndarray:
    A = np.abs(M) > cut
    np.fill_diagonal(A, False)
    return A


def off_block_max(M: np.ndarray, blocks) -> float:
    mask = np.ones(M.shape, dtype=bool)
    for b in blocks:
        mask[np.ix_(b, b)] = False
    return float(np.max(np.abs(M[mask]))) if mask.any() else 0.0


def recover_blocks(H1: np.ndarray, H2: np.ndarray, threshold: float = 1e-6) -> BlockRecovery:
    """Eigenbasis V of H1 and the coordinate blocks of VᵀH2V.

    Entries of VᵀH1V or VᵀH2V above ``threshold`` times the largest entry
    of VᵀH2V are edges; connected components are the blocks.
    """
    _, V = np.linalg.eigh(0.5 * (H1 + H1.T))
    M1 = V.T @ H1 @ V
    M2 = V.T @ H2 @ V
    scale = max(float(np.max(np.abs(M2))), float(np.max(np.abs(M1))))
    cut = threshold * scale
    A = _pattern(M1, cut) | _pattern(M2, cut)
    n, labels = connected_components(csr_matrix(A), directed=False)
    blocks = [np.flatnonzero(labels == k) for k in range(n)]
    return BlockRecovery(V, blocks, off_block_max(M2, blocks), scale)


def _grid_offsets(k: int, radius: float, step: float) -> np.ndarray:
    ticks = np.arange(-radius, radius + 0.5 * step, step)
    mesh = np.meshgrid(*([ticks] * k), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _block_grid_search(ev: Evaluator, x: np.ndarray, VG: np.ndarray, radius: float, step: float,
                       chunk: int = 1 << 16) -> np.ndarray:
    """Best in-box point of x + V_G t over the grid t ∈ [-radius, radius]^k."""
    spec = ev.spec
    offsets = _grid_offsets(VG.shape[1], radius, step)
    best_f, best_t = np.inf, np.zeros(VG.shape[1])
    for start in range(0, offsets.shape[0], chunk):
        T = offsets[start:start + chunk]
        X = x + T @ VG.T
        inside = spec.contains(X)
        if not inside.any():
            continue
        v = ev.values(X[inside])
        k = int(np.argmin(v))
        if v[k] < best_f:
            best_f, best_t = v[k], T[inside][k]
    return x + VG @ best_t


def _block_polish(ev: Evaluator, x: np.ndarray, VG: np.ndarray, radius: float, tol: float) -> np.ndarray:
    """L-BFGS in the block coordinates t of x + V_G t, with central-difference gradients."""
    spec = ev.spec
    k = VG.shape[1]

    def value(t):
        X = x + VG @ t
        return ev.value(X) if spec.contains(X) else np.inf

    def grad(t):
        h = np.cbrt(np.finfo(float).eps) * (1.0 + np.abs(t))
        P = np.concatenate([t + np.diag(h), t - np.diag(h)])
        X = x + P @ VG.T
        if not np.all(spec.contains(X)):
            return np.zeros(k)
        v = ev.values(X)
        return (v[:k] - v[k:]) / (2 * h)

    res = lbfgs_box(value, grad, np.zeros(k), np.full(k, -radius), np.full(k, radius), tol, 500)
    return x + VG @ res.x


def run_hessian_algorithm(rs, cfg: OptimizerConfig) -> RunRecord:
    """Minimize a rotated block-separable function from value queries only.

    Hessians are taken by a fourth-order difference stencil at random points
    within ``sample_scale`` of the box center (per coordinate). The
    eigenbasis V of the first Hessian, refined by the sparsity pattern of
    VᵀH₂V, gives coordinate blocks. A third Hessian must be block diagonal
    in V up to ``verify_threshold``, otherwise the points are resampled. Each block is then searched on a grid of spacing ``grid_step``
    over [-radius, radius]^k around the box center and polished by L-BFGS.
    Finally the Hessian at the result must be block diagonal in V as well.

    Parameters: ``threshold`` (1e-6), ``verify_threshold`` (1e-4), ``fd_step`` (1e-4), ``max_block`` (3),
    ``grid_step`` (0.05), ``radius`` (half the narrowest box side),
    ``max_resample`` (5), ``sample_scale`` (1, capped at a quarter of the
    narrowest side), ``polish_tol`` (1e-10).

    Raises BlockRecoveryFailed when no sample yields blocks of at most
    ``max_block`` coordinates that pass the third-point check, or when the
    check at the result fails.
    """
    spec: ObjectiveSpec = rs.spec if isinstance(rs, RotatedSeparable) else rs
    thr = float(cfg.param("threshold", 1e-6))
    vthr = float(cfg.param("verify_threshold", 1e-4))
    fd_step = float(cfg.param("fd_step", 1e-4))
    max_block = int(cfg.param("max_block", 3))
    grid_step = float(cfg.param("grid_step", 0.05))
    half = 0.5 * (spec.upper - spec.lower)
    center = 0.5 * (spec.upper + spec.lower)
    radius = float(cfg.param("radius", np.min(half)))
    max_resample = int(cfg.param("max_resample", 5))
    scale = min(float(cfg.param("sample_scale", 1.0)), 0.5 * float(np.min(half)))
    polish_tol = float(cfg.param("polish_tol", 1e-10))
    failures = []

    def body(ev, rng):
        rec = None
        for attempt in range(max_resample):
            pts = center + scale * rng.uniform(-1, 1, size=(3, spec.dim))
            H1, H2, H3 = (fd_hessian_black_box(ev, p, fd_step) for p in pts)
            cand = recover_blocks(H1, H2, thr)
            sizes = [len(b) for b in cand.blocks]
            leak = off_block_max(cand.V.T @ H3 @ cand.V, cand.blocks)
            if max(sizes) <= max_block and leak <= vthr * cand.scale:
                rec = cand
                break
            failures.append({"sizes": sizes, "third_point_leak": leak / cand.scale})
        ev.info["resamples"] = len(failures)
        if rec is None:
            raise BlockRecoveryFailed(
                f"no block structure with blocks <= {max_block} after {max_resample} samples: {failures}")
        ev.info["blocks"] = [b.tolist() for b in rec.blocks]
        x = center.copy()
        for b in rec.blocks:
            x = _block_grid_search(ev, x, rec.V[:, b], radius, grid_step)
        for b in rec.blocks:
            x = _block_polish(ev, x, rec.V[:, b], radius, polish_tol)
        ev.info["V"] = rec.V
        H = fd_hessian_black_box(ev, x, fd_step)
        leak = off_block_max(rec.V.T @ H @ rec.V, rec.blocks)
        if leak > vthr * rec.scale:
            raise BlockRecoveryFailed(f"Hessian at the result couples recovered blocks (relative {leak / rec.scale:.2e})")

    return execute("hessian", spec, cfg, body)
