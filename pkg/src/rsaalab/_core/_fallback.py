"""Pure-Python implementations of the compiled kernels (same signatures)."""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


def cn_tridiag_evolve(psi, base_diag, off, potential, coupling, s_points, T):
    out = np.array(psi, dtype=np.complex128)
    n = out.shape[0]
    base_diag = np.asarray(base_diag, dtype=float)
    potential = np.asarray(potential, dtype=float)
    s_points = np.asarray(s_points, dtype=float)
    ab = np.empty((3, n), dtype=np.complex128)
    for s0, s1 in zip(s_points[:-1], s_points[1:]):
        itau = 0.5j * T * (s1 - s0)
        d = base_diag + coupling * 0.5 * (s0 + s1) * potential
        rhs = (1.0 - itau * d) * out
        rhs[1:] -= itau * off * out[:-1]
        rhs[:-1] -= itau * off * out[1:]
        ab[0, 1:] = itau * off
        ab[1] = 1.0 + itau * d
        ab[2, :-1] = itau * off
        out = solve_banded((1, 1), ab, rhs, overwrite_b=True, check_finite=False)
    return out


def sublevel_flood(order, indptr, indices):
    order = np.asarray(order)
    N = order.shape[0]
    parent = np.full(N, -1, dtype=np.intp)
    birth = np.empty(N, dtype=np.intp)
    pos = np.empty(N, dtype=np.intp)
    births, deaths, elders = [], [], []

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for k, v in enumerate(order.tolist()):
        parent[v] = v
        birth[v] = v
        pos[v] = k
        for u in indices[indptr[v]:indptr[v + 1]].tolist():
            if parent[u] < 0:
                continue
            ru, rv = find(u), find(v)
            if ru == rv:
                continue
            if pos[birth[ru]] < pos[birth[rv]]:
                elder, younger = ru, rv
            else:
                elder, younger = rv, ru
            if birth[younger] != v:
                births.append(birth[younger])
                deaths.append(v)
                elders.append(birth[elder])
            parent[younger] = elder
    roots = [birth[k] for k in range(N) if parent[k] == k]
    return (np.array(births, dtype=np.intp), np.array(deaths, dtype=np.intp),
            np.array(elders, dtype=np.intp),
            np.array(sorted(roots, key=lambda r: pos[r]), dtype=np.intp))


def langevin_poly_hits(x, grad_coeffs, eta, sigma, noise, lo, hi, threshold, hit, step0):
    coeffs = np.asarray(grad_coeffs, dtype=float)
    active = np.flatnonzero(hit < 0)
    xa = x[active]
    for t in range(noise.shape[0]):
        if active.size == 0:
            break
        g = np.full_like(xa, coeffs[0])
        for c in coeffs[1:]:
            g = g * xa + c
        xa = xa - eta * g + sigma * noise[t, active]
        xa = np.where(xa > hi, 2.0 * hi - xa, xa)
        xa = np.where(xa < lo, 2.0 * lo - xa, xa)
        xa = np.minimum(xa, hi)
        done = xa < threshold
        if done.any():
            hit[active[done]] = step0 + t + 1
            x[active[done]] = xa[done]
            active, xa = active[~done], xa[~done]
    x[active] = xa
