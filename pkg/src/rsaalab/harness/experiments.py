"""End-to-end experiment drivers shared by the CLI, the self test and the acceptance suite."""

from __future__ import annotations

import time

import numpy as np

from ..adiabatic import (AnnealSchedule, evolve, final_ground_overlap, lambda_max_for, success_probability,
                         theta_for)
from ..functions import ObjectiveSpec
from ..grid import GridND


def rsaa_run(spec: ObjectiveSpec, n: int = 2047, eps: float = 0.05, rho: float = 0.2, *,
             lam_max: float | None = None, T: float | None = None, method: str = "auto",
             theta_points: int = 129) -> dict:
    """Real-space adiabatic run with λ_max from the local-convexity bound and T = θ/ρ.

    Returns λ_max, the radius and Hessian bound behind it, θ, T, the
    propagator used, the success probability (value criterion at ``eps``)
    and the overlap with the ground state of H(λ_max).
    """
    t0 = time.perf_counter()
    grid = GridND.uniform(spec.box, n)
    r = L = None
    if lam_max is None:
        lam_max, r, L = lambda_max_for(spec, eps)
    theta = None
    if T is None:
        theta, _, _ = theta_for(spec, grid, lam_max, theta_points)
        T = theta / rho
    state = evolve(grid, spec, AnnealSchedule(lam_max, T), method=method)
    return {"function": spec.name, "n": n, "eps": eps, "rho": rho, "lam_max": float(lam_max), "radius": r,
            "hessian_bound": L, "theta": theta, "T": float(T), "method": state.method, "steps": int(state.steps),
            "success_probability": success_probability(state, spec, eps),
            "ground_overlap": final_ground_overlap(state, spec, lam_max), "norm": float(state.norm),
            "seconds": time.perf_counter() - t0}


def parse_range(text: str) -> np.ndarray:
    """``a:b:k`` → k evenly spaced values from a to b; ``a,b,c`` → explicit list; ``a`` → [a]."""
    if ":" in text:
        a, b, k = text.split(":")
        return np.linspace(float(a), float(b), int(k))
    return np.array([float(v) for v in text.split(",")])
