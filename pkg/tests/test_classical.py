import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rsaalab import _core
from rsaalab._core import _fallback
from rsaalab.classical import (ALGORITHMS, Evaluator, OptimizerConfig, Stop, acceptance_probability,
                               honing_beta, langevin_hitting_times, lbfgs_box, local_minimize, metropolis_accept,
                               recover_blocks, reflect, run, run_basin_hopping, run_convexity_honing,
                               run_differential_evolution, run_hessian_algorithm, run_langevin,
                               run_simulated_annealing)
from rsaalab.classical.hessian import fd_hessian_from_values, fd_hessian_stencil
from rsaalab.classical.stochastic import hopping_temperature
from rsaalab.errors import BlockRecoveryFailed
from rsaalab.functions import (compose_rotated_blocks, haar_orthogonal, make_biquartic, make_levy2,
                               make_perturbed_convex, make_quadratic, make_rastrigin_sep)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig("gd", budget=0)
    with pytest.raises(ValueError):
        OptimizerConfig("gd", target=(0.0, 0.0))
    cfg = OptimizerConfig.for_spec("gd", make_quadratic(2), 1e-3)
    assert cfg.threshold == pytest.approx(1e-3)
    assert cfg.with_params(a=1).param("a") == 1 and cfg.param("a") is None
    with pytest.raises(ValueError):
        run(make_quadratic(2), OptimizerConfig("nope"))


def test_evaluator_budget_and_hit_index():
    q = make_quadratic(1)
    ev = Evaluator(q, OptimizerConfig("x", budget=5, target=(0.0, 0.5)))
    v = ev.values(np.array([[2.0], [1.5]]))
    assert ev.evals == 2 and ev.hit_evals is None and len(v) == 2
    with pytest.raises(Stop) as stop:
        ev.values(np.array([[1.2], [0.1], [0.0]]))
    assert stop.value.reason == "target" and ev.hit_evals == 4 and ev.best_f == 0.0
    ev2 = Evaluator(q, OptimizerConfig("x", budget=3))
    with pytest.raises(Stop) as stop:
        ev2.values(np.ones((5, 1)))
    assert stop.value.reason == "budget" and ev2.evals == 3


def test_evaluator_fd_gradient_counts_values():
    from rsaalab.functions import spec_from_expression

    spec = spec_from_expression("p", 2, [-2, 2], "x1^2 + 2*x2^2")
    ev = Evaluator(spec, OptimizerConfig("x"))
    g = ev.gradient(np.array([0.5, -0.5]))
    np.testing.assert_allclose(g, [1.0, -2.0], atol=1e-7)
    assert ev.evals == 4


def test_reflect():
    lo, hi = np.array([-1.0]), np.array([1.0])
    assert reflect(np.array([1.3]), lo, hi)[0] == pytest.approx(0.7)
    assert reflect(np.array([-1.5]), lo, hi)[0] == pytest.approx(-0.5)
    assert -1.0 <= reflect(np.array([5.0]), lo, hi)[0] <= 1.0


def test_metropolis_edges():
    assert acceptance_probability(-1.0, 0.0) == 1.0
    assert acceptance_probability(1.0, 0.0) == 0.0
    rng = np.random.default_rng(0)
    assert not metropolis_accept(1e-9, 0.0, rng)
    hits = sum(metropolis_accept(1.0, 1.0, rng) for _ in range(20000))
    assert hits / 20000 == pytest.approx(math.exp(-1), abs=0.02)


@settings(max_examples=60, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.01, 10))
def test_metropolis_detailed_balance(fa, fb, T):
    lhs = math.exp(-fa / T) * acceptance_probability(fb - fa, T)
    rhs = math.exp(-fb / T) * acceptance_probability(fa - fb, T)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_lbfgs_quadratic_and_bounds():
    A = np.diag([1.0, 10.0, 100.0])
    res = lbfgs_box(lambda x: 0.5 * x @ A @ x, lambda x: A @ x, np.ones(3), -5 * np.ones(3), 5 * np.ones(3))
    assert res.converged and np.max(np.abs(res.x)) < 1e-7
    assert all(b < a for a, b in zip(res.history, res.history[1:]))
    # minimum of (x-3)² on [-1, 1] sits on the bound
    res = lbfgs_box(lambda x: float((x[0] - 3) ** 2), lambda x: 2 * (x - 3), np.zeros(1), [-1.0], [1.0])
    assert res.x[0] == pytest.approx(1.0)


def test_local_minimize_biquartic_basins():
    b = make_biquartic()
    assert local_minimize(b, np.array([0.6])).x[0] == pytest.approx(b.meta["local_min"], abs=1e-6)
    assert local_minimize(b, np.array([-0.2])).x[0] == pytest.approx(b.minimizer[0], abs=1e-6)
    with pytest.raises(ValueError):
        local_minimize(b, np.zeros(2))


def test_fd_hessian_stencil_exact_on_quartic():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((3, 3))
    A = A + A.T

    def f(X):
        return 0.5 * np.einsum("ni,ij,nj->n", X, A, X) + np.sum(X**3, axis=1) / 6

    x = np.array([0.3, -0.2, 0.5])
    h = 1e-3 * np.ones(3)
    H = fd_hessian_from_values(f(fd_hessian_stencil(x, h)), h)
    np.testing.assert_allclose(H, A + np.diag(x), atol=1e-6)


def test_recover_blocks_from_exact_hessians():
    rs = compose_rotated_blocks([make_perturbed_convex(2), make_biquartic(), make_perturbed_convex(2)], seed=4)
    pts = np.random.default_rng(0).uniform(-0.8, 0.8, (2, 5))
    H1, H2 = rs.spec.hessian(pts)
    rec = recover_blocks(H1, H2)
    assert sorted(len(b) for b in rec.blocks) == [1, 2, 2]
    # Levy is separable coordinate by coordinate, so it splits into 1D blocks
    H = compose_rotated_blocks([make_levy2()], seed=4).spec.hessian(pts[:, :2])
    assert [len(b) for b in recover_blocks(H[0], H[1]).blocks] == [1, 1]


def test_hessian_algorithm_small_instance():
    rs = compose_rotated_blocks([make_perturbed_convex(2), make_biquartic()], seed=1)
    cfg = OptimizerConfig("hessian", seed=0, budget=10**8, params={"radius": 3.0})
    rec = run_hessian_algorithm(rs, cfg)
    assert rec.best_f - rs.spec.min_value <= 1e-4
    assert sorted(len(b) for b in rec.info["blocks"]) == [1, 2]
    with pytest.raises(BlockRecoveryFailed):
        run_hessian_algorithm(rs, cfg.with_params(max_block=1, max_resample=2))


def test_best_f_matches_reevaluation():
    spec = make_rastrigin_sep(3)
    for algo in ("basin_hopping", "sa", "de", "langevin", "gd"):
        rec = run(spec, OptimizerConfig(algo, seed=3, budget=3000))
        assert rec.evals <= 3000
        assert rec.best_f == pytest.approx(spec.value(rec.best_x), abs=1e-12), algo


@pytest.mark.parametrize("algo", sorted(set(ALGORITHMS) - {"hessian"}))
def test_determinism_per_algorithm(algo):
    spec = make_biquartic(3)
    cfg = OptimizerConfig.for_spec(algo, spec, 1e-3, seed=11, budget=4000)
    a, b = run(spec, cfg), run(spec, cfg)
    assert a.to_json(include_time=False) == b.to_json(include_time=False)


def test_basin_hopping_solves_biquartic():
    spec = make_biquartic(10)
    rec = run_basin_hopping(spec, OptimizerConfig.for_spec("basin_hopping", spec, 1e-3, seed=0, budget=10**6))
    assert rec.success and rec.hit_evals <= rec.evals
    assert hopping_temperature("1/d", 4) == 0.25
    with pytest.raises(ValueError):
        hopping_temperature("hot", 2)


def test_sa_and_de_reach_simple_targets():
    q = make_quadratic(5)
    assert run_simulated_annealing(q, OptimizerConfig.for_spec("sa", q, 1e-3, budget=10**5)).success
    assert run_differential_evolution(q, OptimizerConfig.for_spec("de", q, 1e-3, budget=10**5)).success


def test_de_fixed_point():
    q = make_quadratic(2)
    pop = np.tile([0.5, -0.25], (6, 1))
    rec = run_differential_evolution(q, OptimizerConfig("de", params={"F": 0.0, "population": pop,
                                                                      "max_generations": 3}))
    np.testing.assert_array_equal(rec.info["population"], pop)


def test_honing_on_biquartic():
    spec = make_biquartic(10)
    rec = run_convexity_honing(spec, OptimizerConfig.for_spec("honing", spec, 1e-3, seed=0, budget=10**6))
    assert rec.success
    assert honing_beta(1) == pytest.approx(4.0) and honing_beta(100) == pytest.approx(4 * math.log(100))


def test_langevin_stationary_variance():
    # f = x², β = 2: stationary density ∝ e^{-2x²}, variance 1/4 (1/(4(1-η)) for the discrete chain)
    q = make_quadratic(1)
    rec = run_langevin(q, OptimizerConfig("langevin", seed=5, budget=2 * 60_000 + 1,
                                          params={"eta": 1e-2, "beta": 2.0, "x0": [0.0], "thin": 1}))
    xs = rec.trajectory_sample[5000:, 0]
    assert np.var(xs) == pytest.approx(0.25 / (1 - 1e-2), rel=0.1)


def test_langevin_noise_rotation_equivariance():
    """With a rotation-invariant f, rotating start and noise rotates the trace."""
    q = make_quadratic(2)
    U = haar_orthogonal(2, 9)
    rotated = compose_rotated_blocks([q], rotation=U).spec
    x0 = np.array([0.4, -0.3])
    base = dict(eta=1e-2, beta=50.0, steps=2, thin=1)
    a = run_langevin(q, OptimizerConfig("langevin", seed=1, params={**base, "x0": x0.tolist()}))
    b = run_langevin(rotated, OptimizerConfig("langevin", seed=1,
                                              params={**base, "x0": (U @ x0).tolist(), "noise_rotation": U}))
    assert a.trajectory_sample.shape == (3, 2)
    np.testing.assert_allclose(b.trajectory_sample, a.trajectory_sample @ U.T, atol=1e-12)


def test_hitting_times_backends_agree():
    b = make_biquartic()
    args = (b.meta["grad_poly"], b.meta["local_min"], 8.0, b.meta["saddle"])
    ht = langevin_hitting_times(*args, trials=7, seed=2)
    assert ht.censored == 0 and np.all(np.isfinite(ht.times))
    again = langevin_hitting_times(*args, trials=7, seed=2)
    np.testing.assert_array_equal(ht.steps, again.steps)
    rng = np.random.default_rng(0)
    noise = rng.standard_normal((5000, 7))
    out = []
    for mod in (_core, _fallback):
        x = np.full(7, b.meta["local_min"])
        hit = np.full(7, -1, dtype=np.intp)
        mod.langevin_poly_hits(x, np.array(b.meta["grad_poly"]), 2e-3, 0.03, noise, -2.0, 2.0,
                               b.meta["saddle"], hit, 0)
        out.append((x, hit))
    np.testing.assert_array_equal(out[0][1], out[1][1])
    np.testing.assert_allclose(out[0][0], out[1][0], atol=1e-12)
