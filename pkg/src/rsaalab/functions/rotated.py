"""Rotated block-separable composition f(x) = Σ g_i((Uᵀx)_{block i})."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ObjectiveSpec


def haar_orthogonal(d: int, seed) -> np.ndarray:
    """Haar-distributed orthogonal matrix: QR of a Gaussian matrix, diagonal of R made positive."""
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def rotation_2d(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class RotatedSeparable:
    """Block-separable objective seen through an orthogonal change of variables.

    Block functions are evaluated by formula, without their own box checks,
    so the composite domain is the axis-aligned bounding box of the rotated
    product of block boxes.
    """

    blocks: tuple
    rotation: np.ndarray
    spec: ObjectiveSpec = field(init=False, repr=False)

    def __post_init__(self):
        U = np.array(self.rotation, dtype=float)
        d = sum(b.dim for b in self.blocks)
        if U.shape != (d, d):
            raise ValueError(f"rotation must be {d}x{d}, got {U.shape}")
        if np.max(np.abs(U.T @ U - np.eye(d))) > 1e-12:
            raise ValueError("rotation is not orthogonal to 1e-12")
        U.setflags(write=False)
        object.__setattr__(self, "rotation", U)
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "spec", self._build_spec())

    @property
    def dim(self) -> int:
        return self.rotation.shape[0]

    @property
    def block_slices(self) -> list:
        out, start = [], 0
        for b in self.blocks:
            out.append(slice(start, start + b.dim))
            start += b.dim
        return out

    def to_block_coords(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.rotation

    def _build_spec(self) -> ObjectiveSpec:
        U = self.rotation
        blocks, slices = self.blocks, self.block_slices

        def value(X):
            Z = X @ U
            return sum(b.value_fn(Z[:, s]) for b, s in zip(blocks, slices))

        def grad(X):
            Z = X @ U
            G = np.concatenate([b.gradient(Z[:, s], check=False) for b, s in zip(blocks, slices)], axis=1)
            return G @ U.T

        def hess(X):
            Z = X @ U
            N = X.shape[0]
            Hz = np.zeros((N, self.dim, self.dim))
            for b, s in zip(blocks, slices):
                Hz[:, s, s] = b.hessian(Z[:, s], check=False).reshape(N, b.dim, b.dim)
            return U @ Hz @ U.T

        def lap(X):
            Z = X @ U
            return sum(np.atleast_1d(b.laplacian(Z[:, s], check=False)) for b, s in zip(blocks, slices))

        lo = np.concatenate([b.lower for b in blocks])
        hi = np.concatenate([b.upper for b in blocks])
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        center = U @ mid
        extent = np.abs(U) @ half
        box = np.stack([center - extent, center + extent], axis=1)

        minimizer = min_value = None
        if all(b.minimizer is not None for b in blocks):
            z = np.concatenate([b.minimizer for b in blocks])
            minimizer = U @ z
            min_value = float(sum(b.min_value for b in blocks))
        name = "rotated[" + ",".join(b.name for b in blocks) + "]"
        return ObjectiveSpec(name, self.dim, box, value, grad, hess, lap,
                             minimizer=minimizer, min_value=min_value,
                             meta={"block_dims": [b.dim for b in blocks]})

    def value(self, x):
        return self.spec.value(x)


def compose_rotated_blocks(blocks: Sequence[ObjectiveSpec], seed=None, rotation=None) -> RotatedSeparable:
    """Compose blocks under a rotation.

    ``rotation`` may be an explicit orthogonal matrix or the string
    ``"identity"``; otherwise a Haar-random rotation is drawn from ``seed``.
    """
    d = sum(b.dim for b in blocks)
    if rotation is None:
        U = haar_orthogonal(d, seed)
    elif isinstance(rotation, str) and rotation == "identity":
        U = np.eye(d)
    else:
        U = np.asarray(rotation, dtype=float)
    return RotatedSeparable(tuple(blocks), U)


def random_block_instance(seed, dim: int = 12, max_block: int = 3) -> RotatedSeparable:
    """Random partition of ``dim`` coordinates into blocks of size <= ``max_block``,
    each filled with a benchmark of that size, under a Haar-random rotation.

    Every block minimizer lies within distance 3 of the origin per block
    coordinate, and every block box is symmetric about the origin.
    """
    from .builtins import make_biquartic, make_double_well, make_fi_1d, make_levy2, make_perturbed_convex

    pool = {1: [make_biquartic, make_double_well, make_fi_1d],
            2: [make_levy2, lambda: make_perturbed_convex(2)],
            3: [lambda: make_perturbed_convex(3)]}
    rng = np.random.default_rng(seed)
    sizes, left = [], dim
    while left:
        k = int(rng.integers(1, min(max_block, left, max(pool)) + 1))
        sizes.append(k)
        left -= k
    blocks = [pool[k][int(rng.integers(len(pool[k])))]() for k in sizes]
    return RotatedSeparable(tuple(blocks), haar_orthogonal(dim, rng))
