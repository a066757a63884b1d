"""Critical-point pairing by sublevel flooding, barriers, Eyring-Kramers rates, Agmon distance."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from . import _core
from .errors import NotAMorseSaddle, ResolutionTooCoarse
from .functions.core import ObjectiveSpec

DEFAULT_RESOLUTION = {1: 200_001, 2: 401, 3: 81}


@dataclass(frozen=True)
class MinSaddlePair:
    minimum: np.ndarray
    min_value: float
    saddle: np.ndarray
    saddle_value: float

    @property
    def barrier(self) -> float:
        return self.saddle_value - self.min_value


@dataclass
class MergeTree:
    """Sublevel components keyed by their birth node.

    ``nodes[k] = (location, birth_value, merge_value, parent)``; the root
    has merge value +inf and parent None.
    """

    nodes: dict = field(default_factory=dict)

    @property
    def leaves(self) -> list:
        return list(self.nodes)

    @property
    def root(self):
        return next(k for k, v in self.nodes.items() if v[3] is None)

    def path_to_root(self, key) -> list:
        out = [key]
        while self.nodes[out[-1]][3] is not None:
            out.append(self.nodes[out[-1]][3])
        return out

    def to_dot(self) -> str:
        lines = ["digraph merge_tree {", "  rankdir=BT;"]
        for k, (loc, birth, merge, parent) in self.nodes.items():
            where = ", ".join(f"{c:.4g}" for c in np.atleast_1d(loc))
            lines.append(f'  m{k} [label="min ({where})\\nf={birth:.6g}"];')
        for k, (loc, birth, merge, parent) in self.nodes.items():
            if parent is not None:
                lines.append(f'  m{k} -> m{parent} [label="{merge:.6g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass
class CriticalPairing:
    """Minima paired with the saddle values at which their components merge.

    ``pairs`` are sorted by decreasing barrier; ``H_f`` is the largest
    barrier (0 with a single minimum). ``value_band`` is the largest value
    change between a critical node and its grid neighbors, the resolution
    limit of the pairing.
    """

    pairs: list
    global_min: np.ndarray
    global_min_value: float
    value_band: float
    tree: MergeTree
    plateau: bool = False
    degenerate_minima: bool = False
    resolution: tuple = ()

    @property
    def H_f(self) -> float:
        return self.pairs[0].barrier if self.pairs else 0.0

    @property
    def n_minima(self) -> int:
        return len(self.pairs) + 1

    @property
    def barriers(self) -> np.ndarray:
        return np.array([p.barrier for p in self.pairs])

    def critical_points(self) -> dict:
        """Locations of minima and of merge saddles."""
        mins = [self.global_min] + [p.minimum for p in self.pairs]
        return {"minima": np.array(mins), "saddles": np.array([p.saddle for p in self.pairs])}

    def to_json(self) -> dict:
        return {
            "H_f": self.H_f,
            "global_min": np.atleast_1d(self.global_min).tolist(),
            "global_min_value": self.global_min_value,
            "value_band": self.value_band,
            "plateau": self.plateau,
            "degenerate_minima": self.degenerate_minima,
            "pairs": [{"minimum": np.atleast_1d(p.minimum).tolist(), "min_value": p.min_value,
                       "saddle": np.atleast_1d(p.saddle).tolist(), "saddle_value": p.saddle_value,
                       "barrier": p.barrier} for p in self.pairs],
        }


def grid_neighbors(shape) -> tuple:
    """CSR adjacency of the full (3^d - 1)-neighborhood on a box grid."""
    shape = tuple(int(s) for s in shape)
    N = int(np.prod(shape))
    idx = np.arange(N).reshape(shape)
    rows, cols = [], []
    for off in itertools.product((-1, 0, 1), repeat=len(shape)):
        if not any(off):
            continue
        src = tuple(slice(max(0, -o), s - max(0, o)) for o, s in zip(off, shape))
        dst = tuple(slice(max(0, o), s - max(0, -o)) for o, s in zip(off, shape))
        rows.append(idx[src].ravel())
        cols.append(idx[dst].ravel())
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    order = np.argsort(rows, kind="stable")
    rows, cols = rows[order], cols[order]
    indptr = np.zeros(N + 1, dtype=np.intp)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr).astype(np.intp), cols.astype(np.intp)


def flood(values: np.ndarray, shape) -> tuple:
    """Run the sublevel flood on node values laid out on a grid of ``shape``."""
    values = np.asarray(values, dtype=float).ravel()
    order = np.lexsort((np.arange(values.size), values)).astype(np.intp)
    indptr, indices = grid_neighbors(shape)
    return _core.sublevel_flood(order, indptr, indices), (indptr, indices)


def _refine_1d(spec, x, k, kind):
    """Root of f' bracketed by the neighbors of node ``k``; falls back to the node."""
    if spec.grad_fn is None or k == 0 or k == len(x) - 1:
        return x[k]
    a, b = x[k - 1], x[k + 1]
    g = lambda t: float(spec.grad_fn(np.array([[t]]))[0, 0])
    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if np.sign(ga) == np.sign(gb):
        return x[k]
    return brentq(g, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def sublevel_pairing(spec: ObjectiveSpec, resolution=None, box=None, *, refine: bool = True,
                     drop_below_band: bool = False) -> CriticalPairing:
    """Pair every local minimum with the value at which its sublevel component merges.

    Nodes include the box boundary. Components are born at local-minimum
    nodes; when two meet, the one with the higher minimum dies (ties by node
    index) and the current node value is its saddle value. In 1D with an
    analytic derivative, minima and saddles are refined to roots of f'.

    Raises ResolutionTooCoarse when a barrier is not larger than the value
    band, unless ``drop_below_band`` discards such pairs.
    """
    d = spec.dim
    if d > 3:
        raise ValueError("grid flooding supports d <= 3")
    box = spec.box if box is None else np.atleast_2d(np.asarray(box, dtype=float))
    n = DEFAULT_RESOLUTION[d] if resolution is None else resolution
    ns = (n,) * d if np.isscalar(n) else tuple(n)
    axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(box, ns)]
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=1)
    vals = spec.value(X)
    (births, deaths, elders, roots), (indptr, indices) = flood(vals, ns)

    crit = np.concatenate([births, deaths, roots])
    band = 0.0
    for c in np.unique(crit):
        nb = indices[indptr[c]:indptr[c + 1]]
        band = max(band, float(np.max(np.abs(vals[nb] - vals[c]))))

    _, counts = np.unique(vals, return_counts=True)
    plateau = bool(counts.max() > 0.01 * vals.size)

    exact = refine and d == 1 and spec.grad_fn is not None
    x1 = axes[0]

    def locate(k, kind):
        if exact:
            t = _refine_1d(spec, x1, k, kind)
            return np.array([t]), float(spec.value(np.array([t]), check=False))
        return X[k].copy(), float(vals[k])

    pairs, tree = [], MergeTree()
    mins = {}
    for k in list(roots) + list(births):
        mins[int(k)] = locate(int(k), "min")
    for b, dth, e in zip(births, deaths, elders):
        loc_s, val_s = locate(int(dth), "max")
        loc_m, val_m = mins[int(b)]
        pair = MinSaddlePair(loc_m, val_m, loc_s, val_s)
        if pair.barrier <= band:
            if drop_below_band:
                continue
            raise ResolutionTooCoarse(
                f"barrier {pair.barrier:.3g} at {loc_s} is within the value band {band:.3g}; refine the grid")
        pairs.append(pair)
        tree.nodes[int(b)] = (loc_m, val_m, val_s, int(e))
    for r in roots:
        loc, val = mins[int(r)]
        tree.nodes[int(r)] = (loc, val, math.inf, None)
    # children whose parent was dropped hang off the parent's parent
    for k, (loc, bv, mv, parent) in list(tree.nodes.items()):
        while parent is not None and parent not in tree.nodes:
            parent = None
        tree.nodes[k] = (loc, bv, mv, parent)

    pairs.sort(key=lambda p: (-p.barrier, p.min_value))
    g_loc, g_val = mins[int(roots[0])]
    degenerate = any(abs(p.min_value - g_val) <= band for p in pairs)
    return CriticalPairing(pairs, g_loc, g_val, band, tree, plateau, degenerate, ns)


# -- rates and distances ---------------------------------------------------

def eyring_kramers_gap(f_min: float, f_saddle: float, hess_min, hess_saddle, s: float,
                       prefactor: str = "stated") -> float:
    """Leading-order gap for the diffusion dX = -∇f dt + √s dB.

    prefactor="stated" gives (s|δ̂|/π) √(|det H°| / det H•) exp(-(2/s)(f° - f•)),
    with δ̂ the negative Hessian eigenvalue at the saddle.
    prefactor="kramers" gives the classical rate
    (|δ̂|/2π) √(det H• / |det H°|) exp(-(2/s)(f° - f•)). Both share the
    exponent; the O(s^{1/2} log s⁻¹) correction is not included (see
    :func:`eyring_kramers_band`).

    The Witten operator -Δ + β²‖∇f‖² - βΔf corresponds to s = 1/β and has
    gap 2β times the diffusion gap.
    """
    Hm = np.atleast_2d(np.asarray(hess_min, dtype=float))
    Hs = np.atleast_2d(np.asarray(hess_saddle, dtype=float))
    em = np.linalg.eigvalsh(Hm)
    es = np.linalg.eigvalsh(Hs)
    if np.any(em <= 0):
        raise NotAMorseSaddle("Hessian at the minimum must be positive definite")
    neg = es[es < 0]
    if neg.size != 1 or np.any(es == 0):
        raise NotAMorseSaddle(f"saddle Hessian needs exactly one negative eigenvalue, eigenvalues {es}")
    expo = math.exp(-(2.0 / s) * (f_saddle - f_min))
    if prefactor == "stated":
        ratio = math.sqrt(abs(np.prod(es)) / np.prod(em))
        return float(s * abs(neg[0]) / math.pi * ratio * expo)
    if prefactor == "kramers":
        ratio = math.sqrt(np.prod(em) / abs(np.prod(es)))
        return float(abs(neg[0]) / (2 * math.pi) * ratio * expo)
    raise ValueError(f"unknown prefactor {prefactor!r}")


def eyring_kramers_band(gap: float, s: float, kappa: float = 1.0) -> tuple:
    """Multiplicative band gap·(1 ± κ √s log(1/s)) for the dropped correction."""
    w = kappa * math.sqrt(s) * abs(math.log(1.0 / s))
    return gap * max(0.0, 1 - w), gap * (1 + w)


def eyring_kramers_from_pairing(spec: ObjectiveSpec, pairing: CriticalPairing, s: float,
                                prefactor: str = "stated") -> float:
    """Eyring-Kramers gap for the pair with the largest barrier."""
    if not pairing.pairs:
        raise NotAMorseSaddle("single-minimum landscape has no saddle")
    p = pairing.pairs[0]
    return eyring_kramers_gap(p.min_value, p.saddle_value, spec.hessian(p.minimum, check=False),
                              spec.hessian(p.saddle, check=False), s, prefactor)


def agmon_distance_1d(spec: ObjectiveSpec, E: float, a: float, b: float, n: int = 2001) -> float:
    """∫_a^b √((f(x) - E)₊) dx by composite Simpson on ``n`` points (made odd)."""
    if not a < b:
        raise ValueError("need a < b")
    n = int(n) + (1 - int(n) % 2)
    x = np.linspace(a, b, n)
    integrand = np.sqrt(np.maximum(spec.value(x[:, None]) - E, 0.0))
    return float(simpson(integrand, x=x))
