import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rsaalab.adiabatic import (AnnealSchedule, adiabatic_theta, energy_markov_check, evolve, final_ground_overlap,
                               required_lambda_max, success_probability, theta_for)
from rsaalab.errors import MissingMinimizer, NonPositiveGap
from rsaalab.functions import ObjectiveSpec, make_biquartic, make_quadratic
from rsaalab.grid import GridND


def test_schedule_profile():
    s = AnnealSchedule(3.0, 10.0)
    assert s.b(0.0) == 0.0 and s.b(1.0) == 9.0
    assert np.all(np.diff(s.b(np.linspace(0, 1, 11))) > 0)
    with pytest.raises(ValueError):
        AnnealSchedule(-1.0, 1.0)


def test_theta_closed_forms():
    s = np.linspace(0, 1, 11)
    assert adiabatic_theta((s, np.ones_like(s)), 1.0, 1.0) == pytest.approx(13.0)
    assert adiabatic_theta((s, 2 * np.ones_like(s)), 1.0, 1.0) == pytest.approx(1.75)
    with pytest.raises(NonPositiveGap):
        adiabatic_theta((s, np.zeros_like(s)), 1.0, 1.0)


def test_theta_quadrature_refinement():
    bq = make_biquartic()
    grid = GridND.uniform(bq.box, 511)
    fine, _, _ = theta_for(bq, grid, 10.0, points=129)
    coarse, _, _ = theta_for(bq, grid, 10.0, points=65)
    assert math.isfinite(fine) and abs(coarse - fine) / fine < 0.01


def test_required_lambda_max():
    assert required_lambda_max(1, 2, 0.1, 1) == pytest.approx(8 * math.sqrt(2) / 0.1)
    assert required_lambda_max(1, 1, 4, 1) == pytest.approx(2.0)
    assert required_lambda_max(2, 2, 0.1, 1) == pytest.approx(2 * required_lambda_max(1, 2, 0.1, 1))
    with pytest.raises(ValueError):
        required_lambda_max(1, 0, 0.1, 1)


def test_static_schedule_keeps_state():
    grid = GridND.uniform([[-2, 2]], 127)
    st_ = evolve(grid, make_biquartic(), AnnealSchedule(0.0, 1.0, steps=40), method="cn")
    assert st_.overlap(st_.initial) >= 1 - 1e-8


def test_harmonic_slow_vs_fast():
    h = make_quadratic(1, mu=2.0, box=3.0)
    grid = GridND.uniform(h.box, 255)
    slow = evolve(grid, h, AnnealSchedule(3.0, 100.0, steps=4000), method="cn", checkpoints=4)
    fast = evolve(grid, h, AnnealSchedule(3.0, 1.0, steps=4000), method="cn")
    a, b = final_ground_overlap(slow, h, 3.0), final_ground_overlap(fast, h, 3.0)
    assert a >= 0.99 and b < a
    assert max(abs(c.norm - 1) for c in slow.checkpoints) <= 1e-6
    assert abs(slow.norm - 1) <= 1e-6


def test_cn_and_adiabatic_frame_agree():
    bq = make_biquartic()
    grid = GridND.uniform(bq.box, 255)
    sched = AnnealSchedule(4.0, 30.0, steps=6000)
    a = evolve(grid, bq, sched, method="cn")
    b = evolve(grid, bq, sched, method="adiabatic-frame")
    assert abs(final_ground_overlap(a, bq, 4.0) - final_ground_overlap(b, bq, 4.0)) < 0.02


def test_success_probability_distance_uniform():
    q = make_quadratic(1, box=4.0)
    grid = GridND.uniform(q.box, 400)
    psi = np.ones(grid.size, dtype=complex)
    from rsaalab.adiabatic import WaveState

    st_ = WaveState(psi / np.linalg.norm(psi), grid)
    assert success_probability(st_, q, 1.0, "distance") == pytest.approx(0.25, abs=0.01)
    nomin = ObjectiveSpec("n", 1, [[-4, 4]], lambda X: X[:, 0] ** 2)
    with pytest.raises(MissingMinimizer):
        success_probability(st_, nomin, 0.1)


def test_gaussian_ground_state_three_sigma():
    h = make_quadratic(1, mu=2.0, box=6.0)
    grid = GridND.uniform(h.box, 2047)
    from rsaalab.spectral import lowest_eigenpairs
    from rsaalab.grid import build_hamiltonian
    from rsaalab.adiabatic import WaveState

    lam = 4.0
    psi = lowest_eigenpairs(build_hamiltonian(grid, h, lam), 1).ground
    sigma = 1.0 / math.sqrt(2 * lam)  # |ψ|² of -d² + λ²x² has variance 1/(2λ)
    p = success_probability(WaveState(psi.astype(complex), grid), h, 3 * sigma, "distance")
    assert p == pytest.approx(0.9973, abs=2e-3)


def test_energy_markov_tail():
    h = make_quadratic(1, mu=2.0, box=6.0)
    grid = GridND.uniform(h.box, 2047)
    eps = 0.1
    lam = required_lambda_max(1, 2.0, eps, 1.0)
    assert energy_markov_check(h, grid, lam, eps).tail <= 0.2
    assert energy_markov_check(h, grid, 10 * lam, eps).tail <= 0.02
    wide = energy_markov_check(h, grid, 0.0, eps, state=np.ones(grid.size))
    assert wide.tail > 0.9


@settings(max_examples=8, deadline=None)
@given(st.floats(0.5, 6.0), st.floats(0.5, 20.0))
def test_cn_norm_preservation(lam, T):
    bq = make_biquartic()
    grid = GridND.uniform(bq.box, 63)
    st_ = evolve(grid, bq, AnnealSchedule(lam, T, steps=200), method="cn")
    assert abs(st_.norm - 1) <= 1e-6
