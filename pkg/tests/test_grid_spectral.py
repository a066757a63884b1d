import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rsaalab.errors import DimensionTooLarge, NonFiniteInput, NonPositiveGap, OutOfDomain
from rsaalab.functions import make_biquartic, make_double_well, make_levy2, make_quadratic, make_rastrigin_sep
from rsaalab.grid import (GridND, boundary_mass, build_hamiltonian, build_laplacian, build_witten,
                          build_witten_from_potential, dump_triplets, load_triplets, node_values)
from rsaalab.spectral import (GapCurve, adiabatic_gap_profile, gap_sweep, ground_state_potential,
                              lowest_eigenpairs, separable_gap, spectral_gap)
from rsaalab.functions import compose_rotated_blocks


def dense_low(op, k=2):
    return np.linalg.eigvalsh(op.matrix.toarray())[:k]


def test_grid_validation():
    with pytest.raises(ValueError):
        GridND([(0, 1, 2)])
    with pytest.raises(DimensionTooLarge):
        GridND([(0, 1, 3)] * 4)
    with pytest.raises(DimensionTooLarge):
        GridND([(0, 1, 1000)] * 3, memory_cap=10**6)
    g = GridND.uniform([[-1, 1], [0, 2]], 9)
    assert g.shape == (9, 9) and g.size == 81
    assert g.spacing == pytest.approx([0.2, 0.2])
    assert g.nodes().shape == (81, 2)


def test_laplacian_symmetric_and_psd():
    L = build_laplacian(GridND.uniform([[0, 1], [0, 1]], 15))
    assert L.is_symmetric() and L.laplacian_psd_certificate()
    lo, _ = L.gershgorin_bounds()
    assert lo >= -1e-9


def test_hamiltonian_requires_grid_inside_box():
    with pytest.raises(OutOfDomain):
        build_hamiltonian(GridND.uniform([[-3, 3]], 31), make_biquartic(), 1.0)
    with pytest.raises(ValueError):
        build_hamiltonian(GridND.uniform([[-2, 2]], 31), make_biquartic(), -1.0)


@pytest.mark.parametrize("spec,lam", [(make_biquartic(), 3.0), (make_double_well(), 5.0),
                                      (make_quadratic(1), 2.0)])
def test_lanczos_matches_dense_1d(spec, lam):
    op = build_hamiltonian(GridND.uniform(spec.box, 301), spec, lam)
    sol = lowest_eigenpairs(op, 3)
    np.testing.assert_allclose(sol.values, dense_low(op, 3), rtol=1e-9, atol=1e-9)
    assert np.all(sol.ground >= 0)


def test_lanczos_matches_dense_2d():
    spec = make_levy2()
    op = build_hamiltonian(GridND.uniform(spec.box, 31), spec, 1.5)
    np.testing.assert_allclose(lowest_eigenpairs(op, 2).values, dense_low(op, 2), rtol=1e-9)


def test_degenerate_double_well_gap_is_small():
    spec = make_double_well()
    op = build_hamiltonian(GridND.uniform(spec.box, 1023), spec, 12.0)
    sol = lowest_eigenpairs(op, 2)
    assert sol.raw_gap < 1e-3 * sol.values[0]


def test_witten_ground_energy_near_zero():
    bq = make_biquartic()
    op = build_witten(GridND.uniform(bq.box, 1023), bq, 6.0)
    sol = lowest_eigenpairs(op, 2)
    assert abs(sol.values[0]) < 1e-3 and sol.gap > 0


def test_witten_from_potential_reproduces_analytic():
    bq = make_biquartic()
    grid = GridND.uniform(bq.box, 2047)
    a = build_witten(grid, bq, 3.0).potential
    b = build_witten_from_potential(grid, 3.0 * node_values(grid, bq)).potential
    assert np.max(np.abs(a - b)[5:-5]) / np.max(np.abs(a)) < 1e-5
    with pytest.raises(NonFiniteInput):
        build_witten_from_potential(grid, np.full(grid.size, np.inf))


def test_ground_state_potential_shape_and_floor():
    spec = make_rastrigin_sep(2)
    grid = GridND.uniform(spec.box, 41)
    sol = lowest_eigenpairs(build_hamiltonian(grid, spec, 2.0), 1)
    G = ground_state_potential(sol)
    assert G.shape == grid.shape and G.min() == 0.0 and np.all(np.isfinite(G))


def test_boundary_mass_uniform():
    g = GridND.uniform([[0, 1]], 10)
    assert boundary_mass(g, np.ones(10)) == pytest.approx(0.2)


def test_triplet_round_trip(tmp_path):
    spec = make_levy2()
    op = build_hamiltonian(GridND.uniform(spec.box, 11), spec, 2.0)
    path = tmp_path / "op.bin"
    dump_triplets(op, path)
    back = load_triplets(path)
    assert (back.matrix != op.matrix).nnz == 0
    np.testing.assert_allclose(back.potential, op.potential, rtol=1e-12, atol=1e-12)
    (tmp_path / "junk.bin").write_bytes(b"notadump" + bytes(16))
    with pytest.raises(ValueError):
        load_triplets(tmp_path / "junk.bin")


def test_gap_sweep_rescaled_and_validation():
    bq = make_biquartic()
    grid = GridND.uniform(bq.box, 255)
    raw = gap_sweep(bq, [1.0, 2.0, 4.0], grid)
    res = gap_sweep(bq, [1.0, 2.0, 4.0], grid, scaling_mode="rescaled")
    np.testing.assert_allclose(res.gap, raw.gap / raw.parameter, rtol=1e-9)
    with pytest.raises(ValueError):
        gap_sweep(bq, [2.0, 1.0], grid)
    with pytest.raises(ValueError):
        gap_sweep(bq, [1.0], grid, operator="nope")


def test_gap_curve_log_fit_exact_line():
    c = GapCurve(np.array([1.0, 2.0, 3.0]), np.exp(-0.5 * np.array([1.0, 2.0, 3.0]) + 1.0))
    slope, intercept, r2 = c.log_fit()
    assert slope == pytest.approx(-0.5) and intercept == pytest.approx(1.0) and r2 == pytest.approx(1.0)


def test_separable_gap_is_min_of_blocks():
    a, b = make_biquartic(), make_quadratic(1)
    rs = compose_rotated_blocks([a, b], seed=0)
    g = separable_gap(rs, 2.0, n=255)
    full = spectral_gap(build_hamiltonian(GridND([(-2, 2, 255), (-5, 5, 255)]),
                                          compose_rotated_blocks([a, b], rotation="identity").spec, 2.0))
    assert g == pytest.approx(full, rel=1e-8)


def test_adiabatic_gap_profile_positive():
    bq = make_biquartic()
    prof = adiabatic_gap_profile(bq, GridND.uniform(bq.box, 255), 4.0, [0.0, 0.5, 1.0])
    assert np.all(prof.gap > 0)
    with pytest.raises(NonPositiveGap):
        adiabatic_gap_profile(make_double_well(), GridND.uniform([[-2, 2]], 1023), 40.0, [1.0])


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(-3.0, 3.0))
def test_shift_invariance_of_gap(lam, c):
    """Adding a constant to f shifts the spectrum without changing the gap."""
    bq = make_biquartic()
    grid = GridND.uniform(bq.box, 127)
    op = build_hamiltonian(grid, bq, lam)
    shifted = op.with_potential(op.potential + lam**2 * c)
    a, b = lowest_eigenpairs(op, 2, polish=False), lowest_eigenpairs(shifted, 2, polish=False)
    assert b.values[0] - a.values[0] == pytest.approx(lam**2 * c, abs=1e-7)
    assert b.raw_gap == pytest.approx(a.raw_gap, rel=1e-7, abs=1e-9)
