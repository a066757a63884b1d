import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rsaalab.errors import NotAMorseSaddle, ResolutionTooCoarse
from rsaalab.functions import (ObjectiveSpec, make_biquartic, make_double_well, make_quadratic,
                               make_rastrigin_sep, spec_from_expression)
from rsaalab.grid import GridND, build_witten
from rsaalab.morse import (agmon_distance_1d, eyring_kramers_band, eyring_kramers_from_pairing, eyring_kramers_gap,
                           flood, sublevel_pairing)
from rsaalab.spectral import lowest_eigenpairs
from rsaalab import _core
from rsaalab._core import _fallback


def test_double_well_barrier_and_tree():
    p = sublevel_pairing(make_double_well(), resolution=20001)
    assert p.n_minima == 2 and p.H_f == pytest.approx(1.0, abs=1e-9)
    assert p.degenerate_minima
    dot = p.tree.to_dot()
    assert dot.startswith("digraph") and "->" in dot
    assert len(p.tree.path_to_root(p.tree.leaves[-1])) >= 1


def test_biquartic_barrier_matches_closed_form():
    b = make_biquartic()
    p = sublevel_pairing(b)
    saddle, local = b.meta["saddle"], b.meta["local_min"]
    expect = b.value(np.array([saddle])) - b.value(np.array([local]))
    assert p.H_f == pytest.approx(expect, abs=1e-10)
    assert p.global_min[0] == pytest.approx(b.minimizer[0], abs=1e-9)


def test_single_minimum_has_zero_barrier():
    p = sublevel_pairing(make_quadratic(1))
    assert p.n_minima == 1 and p.H_f == 0.0 and p.pairs == []
    with pytest.raises(NotAMorseSaddle):
        eyring_kramers_from_pairing(make_quadratic(1), p, 0.1)


def test_rastrigin_2d_minima_count():
    p = sublevel_pairing(make_rastrigin_sep(2), resolution=201)
    assert p.n_minima == 121  # 11 per axis on [-5.12, 5.12]


def test_coarse_resolution_raises():
    spec = spec_from_expression("ripple", 1, [-1, 1], "x1^2 + 0.0001*cos(200*x1)")
    with pytest.raises(ResolutionTooCoarse):
        sublevel_pairing(spec, resolution=300, refine=False)
    p = sublevel_pairing(spec, resolution=300, refine=False, drop_below_band=True)
    assert p.n_minima >= 1


def test_kernels_agree_with_fallback():
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(30 * 30)
    a, (indptr, indices) = flood(vals, (30, 30))
    order = np.lexsort((np.arange(vals.size), vals)).astype(np.intp)
    b = _fallback.sublevel_flood(order, indptr, indices)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    assert _core.BACKEND in ("cython", "python")


def test_eyring_kramers_forms():
    H1, H2 = np.array([[2.0]]), np.array([[-1.0]])
    stated = eyring_kramers_gap(0.0, 1.0, H1, H2, 0.5)
    assert stated == pytest.approx(0.5 * 1.0 / math.pi * math.sqrt(1 / 2) * math.exp(-4.0))
    kr = eyring_kramers_gap(0.0, 1.0, H1, H2, 0.5, prefactor="kramers")
    assert kr == pytest.approx(1 / (2 * math.pi) * math.sqrt(2) * math.exp(-4.0))
    with pytest.raises(NotAMorseSaddle):
        eyring_kramers_gap(0.0, 1.0, H1, np.array([[1.0]]), 0.5)
    with pytest.raises(NotAMorseSaddle):
        eyring_kramers_gap(0.0, 1.0, -H1, H2, 0.5)
    lo, hi = eyring_kramers_band(1.0, 0.01)
    assert lo < 1.0 < hi


def test_kramers_rate_tracks_witten_gap():
    """The Witten gap at β equals 2β times the diffusion rate with s = 1/β, to leading order."""
    b = make_biquartic()
    p = sublevel_pairing(b)
    beta = 12.0
    gap = lowest_eigenpairs(build_witten(GridND.uniform(b.box, 2047), b, beta), 2).gap
    rate = 2 * beta * eyring_kramers_from_pairing(b, p, 1 / beta, prefactor="kramers")
    assert 0.5 < gap / rate < 2.0


def test_agmon_distance():
    one = ObjectiveSpec("one", 1, [[0, 2]], lambda X: np.ones(len(X)))
    assert agmon_distance_1d(one, 0.0, 0.0, 2.0) == pytest.approx(2.0, abs=1e-12)
    q = make_quadratic(1)
    # ∫_0^1 √(x²) dx = 1/2
    assert agmon_distance_1d(q, 0.0, 0.0, 1.0) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(ValueError):
        agmon_distance_1d(q, 0.0, 1.0, 0.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(-5.0, 5.0), st.floats(0.2, 5.0))
def test_barrier_affine_invariance(shift, scale):
    """H_f(a f + c) = a H_f(f) for a > 0."""
    b = make_biquartic()
    g = ObjectiveSpec("g", 1, b.box, lambda X: scale * b.value_fn(X) + shift,
                      lambda X: scale * b.grad_fn(X))
    ref = sublevel_pairing(b).H_f
    assert sublevel_pairing(g).H_f == pytest.approx(scale * ref, rel=1e-8, abs=1e-10)


def test_kramers_slope_over_moderate_beta():
    """Predicted log-gap slope over β in [4, 12] against the Witten eigensolve, within 20%."""
    from rsaalab.spectral import gap_sweep

    b = make_biquartic()
    p = sublevel_pairing(b)
    betas = np.linspace(4.0, 12.0, 9)
    eig = gap_sweep(b, betas, GridND.uniform(b.box, 2047), "witten").log_fit()[0]
    pred = [2 * be * eyring_kramers_from_pairing(b, p, 1 / be, prefactor="kramers") for be in betas]
    slope = np.polyfit(betas, np.log(pred), 1)[0]
    assert abs(slope - eig) <= 0.2 * abs(eig)


def test_eyring_kramers_vanishes_as_s_decreases():
    b = make_biquartic()
    p = sublevel_pairing(b)
    gaps = [eyring_kramers_from_pairing(b, p, s) for s in (0.5, 0.2, 0.1, 0.05)]
    assert all(x > y > 0 for x, y in zip(gaps, gaps[1:]))
    assert eyring_kramers_gap(0.0, 0.0, [[2.0]], [[-1.0]], 0.3) == pytest.approx(0.3 / math.pi * math.sqrt(0.5))


def test_agmon_biquartic_refinement():
    b = make_biquartic()
    a, c = b.minimizer[0], b.meta["local_min"]
    coarse, fine = agmon_distance_1d(b, 0.0, a, c, 4001), agmon_distance_1d(b, 0.0, a, c, 16001)
    assert fine > 0 and abs(coarse - fine) < 1e-6
