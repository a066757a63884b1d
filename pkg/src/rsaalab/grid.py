"""Uniform Dirichlet grids and sparse realizations of -Δ + V.

Only interior nodes are stored; boundary values are zero. Node ``j`` on axis
``i`` sits at ``min_i + (j + 1) h_i`` with ``h_i = (max_i - min_i)/(n_i + 1)``,
and multi-indices are linearized row-major (last axis fastest).
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionTooLarge, NonFiniteInput, OutOfDomain
from .functions.core import ObjectiveSpec

DEFAULT_MEMORY_CAP = 20_000_000
_MAGIC = b"RSAAOP01"


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    n: int

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.lo + self.h * np.arange(1, self.n + 1)


class GridND:
    """Tensor grid of interior nodes on a box.

    Parameters
    ----------
    axes : sequence of (lo, hi, n)
        One triple per dimension, ``n >= 3`` interior points.
    memory_cap : int
        Largest accepted node count.
    """

    def __init__(self, axes: Sequence, memory_cap: int = DEFAULT_MEMORY_CAP):
        self.axes = tuple(Axis(float(lo), float(hi), int(n)) for lo, hi, n in axes)
        if not 1 <= len(self.axes) <= 3:
            raise DimensionTooLarge(f"dense grids support 1 to 3 axes, got {len(self.axes)}")
        for ax in self.axes:
            if ax.n < 3:
                raise ValueError(f"each axis needs at least 3 interior points, got {ax.n}")
            if not ax.hi > ax.lo:
                raise ValueError("axis max must exceed min")
        if self.size > memory_cap:
            raise DimensionTooLarge(f"grid has {self.size} nodes, cap is {memory_cap}")

    @classmethod
    def uniform(cls, box, n: int, **kw) -> "GridND":
        """Same interior count ``n`` on every axis of ``box`` (rows of (lo, hi))."""
        box = np.atleast_2d(np.asarray(box, dtype=float))
        return cls([(lo, hi, n) for lo, hi in box], **kw)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(ax.n for ax in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> np.ndarray:
        return np.array([ax.h for ax in self.axes])

    @property
    def box(self) -> np.ndarray:
        return np.array([[ax.lo, ax.hi] for ax in self.axes])

    @property
    def coords(self) -> list:
        return [ax.nodes for ax in self.axes]

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape ``(N, d)``, row-major order."""
        mesh = np.meshgrid(*self.coords, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def node(self, index) -> np.ndarray:
        index = np.atleast_1d(index)
        return np.array([ax.lo + (j + 1) * ax.h for ax, j in zip(self.axes, index)])

    def refine(self) -> "GridND":
        """Halve the spacing: n -> 2n + 1 keeps every old node."""
        return GridND([(ax.lo, ax.hi, 2 * ax.n + 1) for ax in self.axes])

    def __repr__(self):
        return "GridND(" + ", ".join(f"[{a.lo:g},{a.hi:g}]x{a.n}" for a in self.axes) + ")"


@dataclass(eq=False)
class SparseSymOperator:
    """Symmetric sparse operator -Δ + diag(V) on a grid.

    ``matrix`` is CSR. ``potential`` holds the diagonal potential values
    (zero for the bare Laplacian); ``kind`` records how it was built.
    """

    matrix: sp.csr_matrix
    grid: GridND
    potential: np.ndarray
    kind: str = "laplacian"
    meta: dict = field(default_factory=dict)
    _diag: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def diagonal(self) -> np.ndarray:
        if self._diag is None:
            self._diag = self.matrix.diagonal()
        return self._diag

    def matvec(self, v):
        return self.matrix @ v

    def __matmul__(self, v):
        return self.matrix @ v

    def gershgorin_bounds(self) -> tuple:
        A = abs(self.matrix)
        radius = np.asarray(A.sum(axis=1)).ravel() - np.abs(self.diagonal)
        return float(np.min(self.diagonal - radius)), float(np.max(self.diagonal + radius))

    def is_symmetric(self) -> bool:
        return (self.matrix != self.matrix.T).nnz == 0

    def laplacian_psd_certificate(self) -> bool:
        """Gershgorin lower bound of the kinetic part is non-negative."""
        K = self.matrix - sp.diags(self.potential)
        A = abs(K)
        d = K.diagonal()
        radius = np.asarray(A.sum(axis=1)).ravel() - np.abs(d)
        return bool(np.min(d - radius) >= -1e-9 * np.max(np.abs(d)))

    def with_potential(self, potential, kind: str = "custom") -> "SparseSymOperator":
        """Same kinetic part, new diagonal potential."""
        potential = np.asarray(potential, dtype=float).ravel()
        kinetic = self.matrix - sp.diags(self.potential)
        return SparseSymOperator((kinetic + sp.diags(potential)).tocsr(), self.grid, potential, kind)

    def dump(self, path) -> None:
        dump_triplets(self, path)


def _laplacian_1d(ax: Axis) -> sp.csr_matrix:
    h2 = ax.h**2
    return sp.diags([-np.ones(ax.n - 1) / h2, 2 * np.ones(ax.n) / h2, -np.ones(ax.n - 1) / h2],
                    [-1, 0, 1], format="csr")


def _kron_sum(mats) -> sp.csr_matrix:
    sizes = [m.shape[0] for m in mats]
    total = sp.csr_matrix((int(np.prod(sizes)),) * 2)
    for i, m in enumerate(mats):
        left = sp.identity(int(np.prod(sizes[:i])), format="csr")
        right = sp.identity(int(np.prod(sizes[i + 1:])), format="csr")
        total = total + sp.kron(sp.kron(left, m, format="csr"), right, format="csr")
    return total.tocsr()


def build_laplacian(grid: GridND) -> SparseSymOperator:
    """Second-order Dirichlet -Δ as a Kronecker sum of 1D three-point stencils."""
    L = _kron_sum([_laplacian_1d(ax) for ax in grid.axes])
    L.sort_indices()
    return SparseSymOperator(L, grid, np.zeros(grid.size), "laplacian")


def _check_box(grid: GridND, spec: ObjectiveSpec):
    if spec.dim != grid.ndim:
        raise ValueError(f"{spec.name} has dimension {spec.dim}, grid has {grid.ndim}")
    gb, sb = grid.box, spec.box
    tol = 1e-12 * (1 + np.abs(gb))
    if np.any(gb[:, 0] < sb[:, 0] - tol[:, 0]) or np.any(gb[:, 1] > sb[:, 1] + tol[:, 1]):
        raise OutOfDomain(f"grid box {gb.tolist()} not inside {spec.name} box {sb.tolist()}")


def node_values(grid: GridND, spec: ObjectiveSpec) -> np.ndarray:
    _check_box(grid, spec)
    return spec.value(grid.nodes())


def build_hamiltonian(grid: GridND, spec: ObjectiveSpec, lam: float,
                      laplacian: Optional[SparseSymOperator] = None) -> SparseSymOperator:
    """H(λ) = -Δ + λ² f on the grid."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    L = laplacian or build_laplacian(grid)
    f = node_values(grid, spec)
    op = L.with_potential(lam**2 * f, "schrodinger")
    op.meta.update(lam=float(lam), f=f, function=spec.name)
    return op


def witten_potential_values(grid: GridND, spec: ObjectiveSpec, beta: float) -> np.ndarray:
    _check_box(grid, spec)
    X = grid.nodes()
    g = spec.gradient(X)
    lap = spec.laplacian(X)
    return beta**2 * np.sum(g * g, axis=1) - beta * np.asarray(lap)


def build_witten(grid: GridND, spec: ObjectiveSpec, beta: float,
                 laplacian: Optional[SparseSymOperator] = None) -> SparseSymOperator:
    """-Δ + β²‖∇f‖² - βΔf: the Witten Laplacian of φ = βf, zero mode e^{-βf}."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    L = laplacian or build_laplacian(grid)
    op = L.with_potential(witten_potential_values(grid, spec, beta), "witten")
    op.meta.update(beta=float(beta), function=spec.name)
    return op


def _axis_derivatives(phi: np.ndarray, axis: int, h: float):
    """First and second derivatives along one axis.

    Central differences inside, second-order one-sided stencils on the two
    end nodes.
    """
    d1 = np.gradient(phi, h, axis=axis, edge_order=2)
    p = np.moveaxis(phi, axis, 0)
    d2 = np.empty_like(p)
    d2[1:-1] = (p[2:] - 2 * p[1:-1] + p[:-2]) / h**2
    d2[0] = (2 * p[0] - 5 * p[1] + 4 * p[2] - p[3]) / h**2
    d2[-1] = (2 * p[-1] - 5 * p[-2] + 4 * p[-3] - p[-4]) / h**2
    return d1, np.moveaxis(d2, 0, axis)


def build_witten_from_potential(grid: GridND, phi, laplacian: Optional[SparseSymOperator] = None
                                ) -> SparseSymOperator:
    """-Δ + ‖∇φ‖² - Δφ for a grid function φ, derivatives by finite differences."""
    phi = np.asarray(phi, dtype=float).reshape(grid.shape)
    if not np.all(np.isfinite(phi)):
        raise NonFiniteInput("phi has non-finite node values")
    if min(grid.shape) < 4:
        raise ValueError("one-sided stencils need at least 4 nodes per axis")
    grad2 = np.zeros(grid.shape)
    lap = np.zeros(grid.shape)
    for i, h in enumerate(grid.spacing):
        d1, d2 = _axis_derivatives(phi, i, h)
        grad2 += d1**2
        lap += d2
    L = laplacian or build_laplacian(grid)
    return L.with_potential((grad2 - lap).ravel(), "witten_from_potential")


def boundary_mass(grid: GridND, vector) -> float:
    """Probability mass of |v|² on nodes adjacent to the box boundary."""
    p = np.abs(np.asarray(vector).reshape(grid.shape)) ** 2
    p = p / p.sum()
    mask = np.zeros(grid.shape, dtype=bool)
    for i in range(grid.ndim):
        idx = [slice(None)] * grid.ndim
        idx[i] = 0
        mask[tuple(idx)] = True
        idx[i] = -1
        mask[tuple(idx)] = True
    return float(p[mask].sum())


def warn_if_truncated(grid: GridND, vector, tol: float = 1e-8) -> float:
    m = boundary_mass(grid, vector)
    if m > tol:
        warnings.warn(f"ground-state mass {m:.2e} on boundary nodes of {grid}; box may be too small",
                      RuntimeWarning, stacklevel=3)
    return m


# -- binary triplet dump ---------------------------------------------------

def dump_triplets(op: SparseSymOperator, path) -> None:
    """Write ``op`` as little-endian triplets.

    Layout: 8-byte magic, int64 d, d x (float64 lo, float64 hi, int64 n),
    int64 nnz, then nnz records of (int64 row, int64 col, float64 value).
    """
    coo = op.matrix.tocoo()
    header = [_MAGIC, struct.pack("<q", op.grid.ndim)]
    for ax in op.grid.axes:
        header.append(struct.pack("<ddq", ax.lo, ax.hi, ax.n))
    header.append(struct.pack("<q", coo.nnz))
    rec = np.empty(coo.nnz, dtype=[("row", "<i8"), ("col", "<i8"), ("val", "<f8")])
    rec["row"], rec["col"], rec["val"] = coo.row, coo.col, coo.data
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(b"".join(header))
        fh.write(rec.tobytes())
    tmp.replace(path)


def load_triplets(path) -> SparseSymOperator:
    data = Path(path).read_bytes()
    if data[:8] != _MAGIC:
        raise ValueError("not an operator dump")
    (d,) = struct.unpack_from("<q", data, 8)
    off = 16
    axes = []
    for _ in range(d):
        axes.append(struct.unpack_from("<ddq", data, off))
        off += 24
    (nnz,) = struct.unpack_from("<q", data, off)
    off += 8
    rec = np.frombuffer(data, dtype=[("row", "<i8"), ("col", "<i8"), ("val", "<f8")], count=nnz, offset=off)
    grid = GridND(axes)
    M = sp.csr_matrix((rec["val"], (rec["row"], rec["col"])), shape=(grid.size, grid.size))
    lap = build_laplacian(grid).matrix
    return SparseSymOperator(M, grid, (M - lap).diagonal(), "loaded")
