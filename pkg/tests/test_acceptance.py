"""Acceptance checks, one per criterion; each records a single PASS/FAIL line."""

from __future__ import annotations

import numpy as np
import pytest

from rsaalab.classical import OptimizerConfig, run_hessian_algorithm
from rsaalab.classical.langevin import langevin_hitting_times
from rsaalab.errors import BlockRecoveryFailed
from rsaalab.functions import (make_biquartic, make_fi_1d, make_quadratic, make_rastrigin_sep,
                               random_block_instance)
from rsaalab.grid import GridND, build_hamiltonian, build_laplacian, build_witten, node_values
from rsaalab.harness import ExperimentPlan, figure_gap_comparison, figure_potentials, rsaa_run, run_tts, strip_timing
from rsaalab.morse import sublevel_pairing
from rsaalab.spectral import block_gap, lowest_eigenpairs, rayleigh_quotient, spectral_gap, \
    transform_equivalence_report

pytestmark = pytest.mark.acceptance


def test_01_analytic_spectra(verdict):
    sol = lowest_eigenpairs(build_laplacian(GridND.uniform([[0.0, np.pi]], 2047)), 2)
    lap_err = np.max(np.abs(sol.values - [1.0, 4.0]) / [1.0, 4.0])
    h = make_quadratic(1, mu=2.0, box=12.0)
    grid = GridND.uniform(h.box, 4095)
    osc_err = max(abs(spectral_gap(build_hamiltonian(grid, h, lam)) / (2 * lam) - 1) for lam in (1, 2, 5))
    verdict("analytic spectra", lap_err <= 1e-3 and osc_err <= 5e-3,
            f"box rel err {lap_err:.2e}, oscillator rel err {osc_err:.2e}")


def test_02_witten_zero_mode(verdict):
    bq, beta = make_biquartic(), 10.0
    rq = []
    for n in (1023, 2047):
        grid = GridND.uniform(bq.box, n)
        v = np.exp(-beta * node_values(grid, bq))
        rq.append(abs(rayleigh_quotient(build_witten(grid, bq, beta), v)))
    ratio = rq[0] / rq[1]
    verdict("Witten zero mode", 3.2 <= ratio <= 4.8, f"|RQ| {rq[0]:.3e} -> {rq[1]:.3e}, ratio {ratio:.3f}")


def test_03_ground_state_transform(verdict):
    worst = 0.0
    for spec in (make_biquartic(), make_quadratic(1, mu=2.0, box=12.0)):
        grid = GridND.uniform(spec.box, 4095)
        for lam in (2.0, 5.0):
            worst = max(worst, transform_equivalence_report(spec, lam, grid).relative_difference)
    verdict("ground-state transform", worst <= 0.02, f"max relative gap difference {worst:.2e}")


def test_04_gap_comparison(verdict):
    bq = make_biquartic()
    comp = figure_gap_comparison(bq, np.geomspace(0.5, 64.0, 22), np.linspace(8.0, 20.0, 13), n=2047)
    g = comp.schrodinger.gap
    k = int(np.argmin(g))
    tail = g[-3:]
    plateau = (tail.max() - tail.min()) / tail.min() <= 0.05
    interior = 0 < k < len(g) - 3 and g[-1] > g[k]
    slope, _, r2 = comp.witten_fit()
    H_f = sublevel_pairing(bq).H_f
    decreasing = bool(np.all(np.diff(comp.witten.gap) < 0))
    slope_ok = abs(slope - (-2 * H_f)) <= 0.2 * 2 * H_f
    verdict("gap comparison", interior and plateau and decreasing and r2 >= 0.98 and slope_ok,
            f"min at λ={comp.schrodinger.parameter[k]:.3g}, tail {np.round(tail, 3).tolist()}, "
            f"slope {slope:.4f} vs {-2 * H_f:.4f}, R² {r2:.5f}")


def _scan_oracle(x, v, dv):
    """Critical points from derivative sign changes and the largest barrier from the dense samples."""
    crit = np.flatnonzero(np.sign(dv[:-1]) != np.sign(dv[1:]))
    mins = [i for i in crit if dv[i] < 0]
    barriers = []
    for m in mins:
        left = [j for j in mins if j < m and v[j] < v[m]]
        right = [j for j in mins if j > m and v[j] < v[m]]
        walls = []
        if left:
            walls.append(v[left[-1]:m + 1].max())
        if right:
            walls.append(v[m:right[0] + 1].max())
        if walls:
            barriers.append(min(walls) - v[m])
    return len(crit), max(barriers, default=0.0)


def test_05_morse_oracle(verdict):
    fi = make_fi_1d()
    x = np.linspace(fi.box[0, 0], fi.box[0, 1], 1_000_000)
    X = x[:, None]
    count, H_oracle = _scan_oracle(x, fi.value(X), fi.gradient(X)[:, 0])
    p = sublevel_pairing(fi)
    n_crit = p.n_minima + len(p.pairs)
    ok = n_crit == count and abs(p.H_f - H_oracle) <= p.value_band
    verdict("Morse oracle", ok, f"critical points {n_crit} vs {count}, H_f {p.H_f:.6f} vs {H_oracle:.6f} "
                                f"(band {p.value_band:.2e})")


def test_06_tensorization(verdict):
    worst = 0.0
    for d1, d2 in ((make_rastrigin_sep(1), make_rastrigin_sep(2)), (make_biquartic(1), make_biquartic(2))):
        grid = GridND.uniform(d2.box, 255)
        for lam in (1.0, 5.0):
            full = spectral_gap(build_hamiltonian(grid, d2, lam))
            worst = max(worst, abs(full - block_gap(d1, lam, 255)) / full)
    verdict("tensorization", worst <= 0.01, f"max relative difference {worst:.2e}")


def test_07_rsaa_end_to_end(verdict):
    res = rsaa_run(make_biquartic(), n=2047, eps=0.05, rho=0.2)
    ok = res["success_probability"] >= 0.6 and res["ground_overlap"] >= 0.9
    verdict("RsAA end to end", ok, f"λ_max {res['lam_max']:.1f}, T {res['T']:.3g}, "
                                   f"success {res['success_probability']:.4f}, overlap {res['ground_overlap']:.4f}")


def _medians(summary):
    return [summary.cell(d, "basin_hopping") for d in sorted({c.dim for c in summary.cells})]


def test_08_basin_hopping(verdict, tmp_path):
    bq = run_tts(ExperimentPlan("bq", "biquartic", (10, 20, 40), ("basin_hopping",), trials=5,
                                budget=10_000_000, eps=1e-3))
    bq_cells = _medians(bq)
    bq_ok = all(c.failures == 0 for c in bq_cells) and all(
        a.median_evals <= b.median_evals for a, b in zip(bq_cells, bq_cells[1:]))
    mr = run_tts(ExperimentPlan("mr", "modified_rastrigin", tuple(range(2, 8)), ("basin_hopping",), trials=5,
                                budget=10_000_000, eps=1e-3))
    mr_cells = _medians(mr)
    med = [c.median_evals for c in mr_cells]
    mr_ok = None not in med and all(a < b for a, b in zip(med, med[1:]))
    verdict("basin hopping", bq_ok and mr_ok,
            f"biquartic medians {[c.median_evals for c in bq_cells]}, modified Rastrigin medians {med}")


def test_09_langevin_trap(verdict):
    bq = make_biquartic()
    medians, censored = [], 0
    for beta in (5.0, 10.0, 20.0, 40.0):
        ht = langevin_hitting_times(bq.meta["grad_poly"], bq.meta["local_min"], beta, bq.meta["saddle"],
                                    trials=21, seed=1)
        medians.append(ht.median_time)
        censored += int(np.sum(ht.censored))
    ok = all(a < b for a, b in zip(medians, medians[1:]))
    verdict("Langevin trap", ok, f"median times {[round(m, 3) for m in medians]}, censored {censored}")


def test_10_hessian_algorithm(verdict):
    good, raised, silent = 0, 0, 0
    for seed in range(20):
        rs = random_block_instance(seed)
        cfg = OptimizerConfig("hessian", seed=seed, budget=10**9, params={"radius": 3.0})
        try:
            rec = run_hessian_algorithm(rs, cfg)
        except BlockRecoveryFailed:
            raised += 1
            continue
        if rec.best_f - rs.spec.min_value <= 1e-4:
            good += 1
        else:
            silent += 1
    verdict("Hessian algorithm", good >= 19 and silent == 0,
            f"{good}/20 recovered, {raised} raised, {silent} silent wrong")


def test_11_potential_surfaces(verdict):
    rast = make_rastrigin_sep(2)
    plain = figure_potentials(rast, 5.0, 5.0).clusters
    turned = figure_potentials(rast, 5.0, 5.0, rotation=np.pi / 6).clusters
    ok = all(c["ground"] == 1 and c["wkb"] >= 2 for c in (plain, turned)) and \
        plain["ground"] == turned["ground"] and plain["wkb"] == turned["wkb"]
    verdict("potential surfaces", ok, f"unrotated {plain}, rotated {turned}")


def test_12_determinism(verdict, tmp_path):
    plan = ExperimentPlan("det", "biquartic", (2, 4), ("basin_hopping", "de", "sa"), trials=3,
                          budget=20_000, eps=1e-3, base_seed=7)
    bodies = []
    for run in ("a", "b"):
        out = tmp_path / run
        from dataclasses import replace

        run_tts(replace(plan, out_dir=str(out)))
        bodies.append(strip_timing((out / "det.csv").read_text()))
    verdict("determinism", bodies[0] == bodies[1], f"{len(bodies[0].splitlines()) - 1} rows compared")
