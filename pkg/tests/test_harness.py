import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rsaalab.functions import make_biquartic, make_rastrigin_sep
from rsaalab.harness import (ExperimentPlan, figure_gap_comparison, figure_potentials, near_global_clusters,
                             parse_range, rsaa_run, run_tts, strip_timing, trial_seed)
from rsaalab.harness.cli import main
from rsaalab.harness.selftest import CHECKS, run_selftest


def small_plan(**kw):
    base = dict(experiment_id="p", function="biquartic", dims=(2, 3), algorithms=("basin_hopping", "de"),
                trials=3, budget=20_000, eps=1e-3, base_seed=5)
    base.update(kw)
    return ExperimentPlan(**base)


def test_plan_validation_and_round_trip(tmp_path):
    plan = small_plan()
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(plan.to_json()))
    assert ExperimentPlan.from_json(path) == plan
    with pytest.raises(ValueError):
        small_plan(dims=(3, 2))
    with pytest.raises(ValueError):
        small_plan(algorithms=("nope",))
    with pytest.raises(ValueError):
        small_plan(trials=0)


def test_trial_seed_stable():
    assert trial_seed(0, 2, "de", 1) == trial_seed(0, 2, "de", 1)
    assert trial_seed(0, 2, "de", 1) != trial_seed(0, 2, "de", 2)
    assert trial_seed(1, 2, "de", 1) == trial_seed(0, 2, "de", 1) ^ 1


def test_medians_recomputed_from_csv(tmp_path):
    summary = run_tts(small_plan(out_dir=str(tmp_path)))
    rows = list(csv.DictReader(io.StringIO((tmp_path / "p.csv").read_text())))
    assert len(rows) == 2 * 2 * 3
    for cell in summary.cells:
        ok = [int(r["evals"]) for r in rows
              if int(r["dim"]) == cell.dim and r["algo"] == cell.algo and r["success"] == "1"]
        expect = float(np.median(ok)) if ok else None
        assert cell.median_evals == expect
    data = json.loads((tmp_path / "p.json").read_text())
    assert data["schema_version"] == 1 and len(data["cells"]) == 4


def test_threads_do_not_change_results():
    a = run_tts(small_plan(), threads=1)
    b = run_tts(small_plan(), threads=4)
    assert strip_timing(a.csv_body) == strip_timing(b.csv_body)


def test_fail_cell_with_tiny_budget():
    summary = run_tts(small_plan(budget=1, algorithms=("basin_hopping",)))
    assert all(c.failed and c.to_json()["median_evals"] == "FAIL" for c in summary.cells)
    assert summary.log_fit("basin_hopping") is None


def test_errors_become_failed_records():
    def factory(name, d):
        spec = make_biquartic(d)
        return spec

    summary = run_tts(small_plan(algorithms=({"name": "bad", "algorithm": "de", "params": {"popsize": -1}},)),
                      spec_factory=factory)
    assert all(c.failures == 3 for c in summary.cells)


def test_strip_timing():
    body = "dim,algo,seconds\n2,de,0.5\n"
    assert strip_timing(body) == "dim,algo\n2,de\n"


def test_parse_range():
    np.testing.assert_allclose(parse_range("1:2:3"), [1, 1.5, 2])
    np.testing.assert_allclose(parse_range("1,4"), [1, 4])
    np.testing.assert_allclose(parse_range("7"), [7])


def test_near_global_clusters():
    Z = np.ones((9, 9))
    Z[1, 1] = Z[7, 7] = 0.0
    assert near_global_clusters(Z) == 2
    Z[2, 2] = 0.0
    assert near_global_clusters(Z) == 2  # diagonal neighbors join
    mask = np.zeros_like(Z, dtype=bool)
    mask[:5, :5] = True
    assert near_global_clusters(Z, mask=mask) == 1


def test_figure_outputs(tmp_path):
    comp = figure_gap_comparison(make_biquartic(), [1.0, 2.0], [2.0, 3.0], n=255, out_dir=tmp_path)
    assert comp.paths["csv"].exists() and comp.paths["svg"].read_text().startswith("<svg")
    surf = figure_potentials(make_rastrigin_sep(2), 5.0, 5.0, n=61, out_dir=tmp_path)
    assert surf.f.shape == (61, 61) and set(surf.clusters) == {"f", "ground", "wkb"}
    assert (tmp_path / "potential_wkb.csv").exists()
    with pytest.raises(ValueError):
        figure_potentials(make_biquartic(), 1.0, 1.0)


def test_rsaa_run_small():
    res = rsaa_run(make_biquartic(), n=255, lam_max=4.0, T=20.0, method="cn")
    assert abs(res["norm"] - 1) < 1e-6 and 0 <= res["success_probability"] <= 1


def test_selftest_passes():
    lines = []
    assert run_selftest(lines.append)
    assert len(lines) == len(CHECKS) and all(l.startswith("PASS") for l in lines)


def test_cli_exit_codes(capsys, tmp_path):
    assert main(["selftest"]) == 0
    assert main([]) == 2
    assert main(["bogus"]) == 2
    assert main(["spectrum", "--function", "nope"]) == 2
    assert main(["gap-sweep", "--operator", "witten"]) == 2
    capsys.readouterr()
    assert main(["spectrum", "--function", "biquartic", "--n", "255", "--k", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["eigenvalues"]) == 2 and out["gap"] > 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "dim": 1}))
    assert main(["morse", "--function-config", str(bad)]) == 1


def test_cli_tts_and_opt(capsys, tmp_path):
    assert main(["tts", "--function", "biquartic", "--dims", "2", "--algo", "de", "--trials", "2",
                 "--budget", "5000", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "tts.csv").exists()
    capsys.readouterr()
    assert main(["opt", "--algo", "basin_hopping", "--function", "biquartic", "--dim", "3", "--trials", "2",
                 "--param", "step=1.0"]) == 0
    recs = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert len(recs) == 2 and all("best_f" in r for r in recs)


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rsaalab.harness.cli", "selftest"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and proc.stdout.count("PASS") == len(CHECKS)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_tts_rerun_identical(seed):
    plan = small_plan(dims=(2,), algorithms=("sa",), trials=2, budget=3000, base_seed=seed)
    assert strip_timing(run_tts(plan).csv_body) == strip_timing(run_tts(plan).csv_body)
