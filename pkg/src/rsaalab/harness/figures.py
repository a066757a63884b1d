"""Figure data: gap comparison curves and 2D potential surfaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from ..functions import ObjectiveSpec, compose_rotated_blocks, rotation_2d
from ..grid import GridND, build_hamiltonian, node_values, witten_potential_values
from ..io import svg_heatmap, svg_line_chart, write_csv
from ..spectral import GapCurve, gap_sweep, ground_state_potential, lowest_eigenpairs


@dataclass
class GapComparison:
    schrodinger: GapCurve
    witten: GapCurve
    paths: dict = field(default_factory=dict)

    def witten_fit(self):
        return self.witten.log_fit()


def figure_gap_comparison(spec: ObjectiveSpec, lambdas, betas, n: int = 2047,
                          out_dir=None, tol: float = 1e-10) -> GapComparison:
    """Rescaled Schrödinger gap gap(H(λ))/λ and Witten gap over β on one grid.

    Writes ``gap_comparison.csv`` (operator, parameter, gap) and an SVG with
    both curves on a log axis when ``out_dir`` is given.
    """
    grid = GridND.uniform(spec.box, n)
    schr = gap_sweep(spec, lambdas, grid, "schrodinger", "rescaled", tol)
    witt = gap_sweep(spec, betas, grid, "witten", "raw", tol)
    out = GapComparison(schr, witt)
    if out_dir is not None:
        out_dir = Path(out_dir)
        rows = [("schrodinger_rescaled", p, g) for p, g in zip(schr.parameter, schr.gap)]
        rows += [("witten", p, g) for p, g in zip(witt.parameter, witt.gap)]
        out.paths["csv"] = write_csv(out_dir / "gap_comparison.csv",
                                     ["operator", "parameter_lambda_or_beta", "gap_energy_units"], rows)
        out.paths["svg"] = svg_line_chart(out_dir / "gap_comparison.svg",
                                          [("gap(H(λ))/λ", schr.parameter, schr.gap),
                                           ("Witten gap", witt.parameter, witt.gap)],
                                          title=f"{spec.name}: spectral gaps", logy=True,
                                          xlabel="λ or β", ylabel="gap")
    return out


def near_global_clusters(Z: np.ndarray, rel: float = 0.01, mask: Optional[np.ndarray] = None) -> int:
    """Connected groups (8-neighborhood) of nodes within ``rel`` of the value range above the minimum.

    Only nodes where ``mask`` is True take part; the minimum and range are
    taken over those nodes.
    """
    Z = np.asarray(Z, dtype=float)
    mask = np.ones(Z.shape, dtype=bool) if mask is None else mask
    vals = Z[mask]
    lo, hi = vals.min(), vals.max()
    near = mask & (Z <= lo + rel * (hi - lo))
    _, count = ndimage.label(near, structure=np.ones((3,) * Z.ndim))
    return int(count)


@dataclass
class PotentialSurfaces:
    grid: GridND
    f: np.ndarray
    ground: np.ndarray
    wkb: np.ndarray
    clusters: dict
    paths: dict = field(default_factory=dict)


def figure_potentials(spec: ObjectiveSpec, lam: float, beta: float, n: int = 401, out_dir=None, *,
                      rotation: Optional[float] = None, box=None, disc_fraction: float = 0.85,
                      rel: float = 0.01) -> PotentialSurfaces:
    """f, the ground-state potential -log ψ₁² of H(λ) and the WKB potential β²‖∇f‖² - βΔf on a 2D grid.

    ``rotation`` (an angle) evaluates f(Rᵀx) instead, on the same box.
    Cluster counts use nodes inside the disc of radius ``disc_fraction``
    times the half-width of the box, so a rotated landscape is counted over
    the same region.
    """
    if spec.dim != 2:
        raise ValueError("figure_potentials needs a two-dimensional function")
    box = spec.box if box is None else np.asarray(box, dtype=float)
    if rotation is not None:
        spec = compose_rotated_blocks([spec], rotation=rotation_2d(rotation)).spec
    grid = GridND.uniform(box, n)
    F = node_values(grid, spec).reshape(grid.shape)
    G = ground_state_potential(lowest_eigenpairs(build_hamiltonian(grid, spec, lam), 1))
    W = witten_potential_values(grid, spec, beta).reshape(grid.shape)
    X, Y = np.meshgrid(*grid.coords, indexing="ij")
    c = box.mean(axis=1)
    R = disc_fraction * 0.5 * np.min(box[:, 1] - box[:, 0])
    disc = (X - c[0]) ** 2 + (Y - c[1]) ** 2 <= R**2
    clusters = {name: near_global_clusters(Z, rel, disc) for name, Z in (("f", F), ("ground", G), ("wkb", W))}
    out = PotentialSurfaces(grid, F, G, W, clusters)
    if out_dir is not None:
        out_dir = Path(out_dir)
        extent = [tuple(b) for b in box]
        for name, Z in (("f", F), ("ground", G), ("wkb", W)):
            rows = zip(X.ravel(), Y.ravel(), Z.ravel())
            out.paths[f"{name}_csv"] = write_csv(out_dir / f"potential_{name}.csv", ["x", "y", name], rows)
            out.paths[f"{name}_svg"] = svg_heatmap(out_dir / f"potential_{name}.svg", Z, extent,
                                                   title=f"{spec.name}: {name}")
    return out
