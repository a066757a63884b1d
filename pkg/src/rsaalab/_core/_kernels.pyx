# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: tridiagonal Crank-Nicolson sweeps, sublevel flooding,
batched one-dimensional Langevin hitting times."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def cn_tridiag_evolve(double complex[::1] psi, const double[::1] base_diag, double off,
                      const double[::1] potential, double coupling,
                      const double[::1] s_points, double T):
    """Crank-Nicolson steps for i dpsi/ds = T (A + coupling * s * diag(V)) psi.

    ``A`` is tridiagonal with diagonal ``base_diag`` and constant off-diagonal
    ``off``. One step per consecutive pair of ``s_points`` with the midpoint
    Hamiltonian; each step is a Thomas solve. Returns a new array.
    """
    cdef Py_ssize_t n = psi.shape[0], k, step, nsteps = s_points.shape[0] - 1
    cdef double complex[::1] out = np.array(psi, dtype=np.complex128)
    cdef double complex[::1] rhs = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] cp = np.empty(n, dtype=np.complex128)
    cdef double complex b, a, denom, itau
    cdef double s_mid, dk
    for step in range(nsteps):
        s_mid = 0.5 * (s_points[step] + s_points[step + 1])
        itau = 0.5j * T * (s_points[step + 1] - s_points[step])
        b = itau * off
        for k in range(n):
            dk = base_diag[k] + coupling * s_mid * potential[k]
            rhs[k] = (1.0 - itau * dk) * out[k]
            if k > 0:
                rhs[k] = rhs[k] - b * out[k - 1]
            if k < n - 1:
                rhs[k] = rhs[k] - b * out[k + 1]
        # forward elimination
        dk = base_diag[0] + coupling * s_mid * potential[0]
        a = 1.0 + itau * dk
        cp[0] = b / a
        rhs[0] = rhs[0] / a
        for k in range(1, n):
            dk = base_diag[k] + coupling * s_mid * potential[k]
            denom = 1.0 + itau * dk - b * cp[k - 1]
            cp[k] = b / denom
            rhs[k] = (rhs[k] - b * rhs[k - 1]) / denom
        out[n - 1] = rhs[n - 1]
        for k in range(n - 2, -1, -1):
            out[k] = rhs[k] - cp[k] * out[k + 1]
    return np.asarray(out)


cdef inline Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t v) noexcept nogil:
    while parent[v] != v:
        parent[v] = parent[parent[v]]
        v = parent[v]
    return v


def sublevel_flood(const Py_ssize_t[::1] order, const Py_ssize_t[::1] indptr,
                   const Py_ssize_t[::1] indices):
    """Ascending union-find flood over a neighbor graph in CSR form.

    Nodes are activated in ``order``. When components meet, the one born
    later dies at the current node (elder rule). Returns
    ``(birth_nodes, death_nodes, elder_births, essential_births)``: per merge
    the birth node of the dying component, the merge node and the birth
    node of the surviving component; then the birth node of every component
    alive at the end.
    """
    cdef Py_ssize_t N = order.shape[0], k, j, v, u, ru, rv, elder, younger, npairs = 0
    cdef Py_ssize_t[::1] parent = np.full(N, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] birth = np.empty(N, dtype=np.intp)
    cdef Py_ssize_t[::1] pos = np.empty(N, dtype=np.intp)
    cdef Py_ssize_t[::1] births = np.empty(N, dtype=np.intp)
    cdef Py_ssize_t[::1] deaths = np.empty(N, dtype=np.intp)
    cdef Py_ssize_t[::1] elders = np.empty(N, dtype=np.intp)
    with nogil:
        for k in range(N):
            v = order[k]
            parent[v] = v
            birth[v] = v
            pos[v] = k
            for j in range(indptr[v], indptr[v + 1]):
                u = indices[j]
                if parent[u] < 0:
                    continue
                ru = _find(parent, u)
                rv = _find(parent, v)
                if ru == rv:
                    continue
                if pos[birth[ru]] < pos[birth[rv]]:
                    elder = ru
                    younger = rv
                else:
                    elder = rv
                    younger = ru
                if birth[younger] != v:
                    births[npairs] = birth[younger]
                    deaths[npairs] = v
                    elders[npairs] = birth[elder]
                    npairs += 1
                parent[younger] = elder
    roots = []
    for k in range(N):
        if parent[k] == k:
            roots.append(birth[k])
    return (np.asarray(births)[:npairs].copy(), np.asarray(deaths)[:npairs].copy(),
            np.asarray(elders)[:npairs].copy(), np.array(sorted(roots, key=lambda r: pos[r]), dtype=np.intp))


def langevin_poly_hits(double[::1] x, const double[::1] grad_coeffs, double eta, double sigma,
                       const double[:, ::1] noise, double lo, double hi, double threshold,
                       Py_ssize_t[::1] hit, Py_ssize_t step0):
    """Advance walkers x <- x - eta p(x) + sigma xi until x < threshold.

    ``p`` is the polynomial with coefficients ``grad_coeffs`` (highest degree
    first). Row t of ``noise`` drives step ``step0 + t`` for every walker;
    walkers with ``hit >= 0`` are frozen. Positions reflect at ``lo``/``hi``.
    ``x`` and ``hit`` are updated in place.
    """
    cdef Py_ssize_t m = x.shape[0], steps = noise.shape[0], deg = grad_coeffs.shape[0]
    cdef Py_ssize_t i, t, c
    cdef double xi, g
    with nogil:
        for i in range(m):
            if hit[i] >= 0:
                continue
            xi = x[i]
            for t in range(steps):
                g = grad_coeffs[0]
                for c in range(1, deg):
                    g = g * xi + grad_coeffs[c]
                xi = xi - eta * g + sigma * noise[t, i]
                if xi > hi:
                    xi = 2.0 * hi - xi
                if xi < lo:
                    xi = 2.0 * lo - xi
                if xi > hi:
                    xi = hi
                if xi < threshold:
                    hit[i] = step0 + t + 1
                    break
            x[i] = xi
