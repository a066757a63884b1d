"""Time-to-solution experiments: plans, concurrent trials, CSV and JSON summaries."""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..classical import ALGORITHMS, OptimizerConfig, RunRecord
from ..functions import get_builtin
from ..io import csv_text, atomic_write_text, write_json

SCHEMA_VERSION = 1
CSV_HEADER = ["dim", "algo", "trial", "seed", "evals", "success", "best_f", "seconds"]
TIMING_COLUMNS = ("seconds",)


@dataclass(frozen=True)
class AlgorithmSpec:
    """One algorithm column of a plan: a display name, a registry key and its parameters."""

    name: str
    algorithm: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_obj(cls, obj) -> "AlgorithmSpec":
        if isinstance(obj, AlgorithmSpec):
            return obj
        if isinstance(obj, str):
            return cls(obj, obj)
        return cls(obj.get("name", obj["algorithm"]), obj["algorithm"], dict(obj.get("params", {})))


@dataclass(frozen=True)
class ExperimentPlan:
    """A grid of (dimension, algorithm) cells, each run for ``trials`` seeded trials.

    Success means reaching the function's known minimum plus ``eps``.
    """

    experiment_id: str
    function: str
    dims: tuple
    algorithms: tuple
    trials: int = 5
    timeout: float = 600.0
    budget: int = 1_000_000
    eps: float = 1e-3
    base_seed: int = 0
    out_dir: Optional[str] = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(b <= a for a, b in zip(dims, dims[1:])):
            raise ValueError("dims must be non-empty and strictly ascending")
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        if int(self.budget) < 1 or not self.eps > 0 or not self.timeout > 0:
            raise ValueError("budget, eps and timeout must be positive")
        algos = tuple(AlgorithmSpec.from_obj(a) for a in self.algorithms)
        for a in algos:
            if a.algorithm not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a.algorithm!r}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "algorithms", algos)
        object.__setattr__(self, "trials", int(self.trials))

    @classmethod
    def from_json(cls, source) -> "ExperimentPlan":
        """Build from a dict, a JSON string or a path to a JSON file."""
        if isinstance(source, (str, Path)) and Path(source).exists():
            source = Path(source).read_text()
        obj = json.loads(source) if isinstance(source, str) else dict(source)
        return cls(obj["experiment_id"], obj["function"], tuple(obj["dims"]), tuple(obj["algorithms"]),
                   obj.get("trials", 5), obj.get("timeout", 600.0), obj.get("budget", 1_000_000),
                   obj.get("eps", 1e-3), obj.get("base_seed", 0), obj.get("out_dir"))

    def to_json(self) -> dict:
        return {"experiment_id": self.experiment_id, "function": self.function, "dims": list(self.dims),
                "algorithms": [{"name": a.name, "algorithm": a.algorithm, "params": a.params}
                               for a in self.algorithms],
                "trials": self.trials, "timeout": self.timeout, "budget": self.budget, "eps": self.eps,
                "base_seed": self.base_seed, "out_dir": self.out_dir}


def trial_seed(base_seed: int, dim: int, algo: str, trial: int) -> int:
    """base ⊕ stable 64-bit hash of (dim, algo, trial)."""
    digest = hashlib.blake2b(f"{dim}|{algo}|{trial}".encode(), digest_size=8).digest()
    return (int(base_seed) ^ int.from_bytes(digest, "little")) & (2**64 - 1)


def tts_evals(rec: RunRecord) -> int:
    """Evaluations until the first target hit, or all evaluations for a failed trial."""
    return int(rec.hit_evals) if rec.hit_evals is not None else int(rec.evals)


@dataclass
class TTSCell:
    dim: int
    algo: str
    records: list
    median_evals: Optional[float]
    median_seconds: Optional[float]
    failures: int

    @property
    def failed(self) -> bool:
        return self.median_evals is None

    def to_json(self) -> dict:
        return {"dim": self.dim, "algo": self.algo, "trials": len(self.records), "failures": self.failures,
                "median_evals": "FAIL" if self.failed else self.median_evals,
                "median_seconds": "FAIL" if self.failed else self.median_seconds}


@dataclass
class TTSSummary:
    plan: ExperimentPlan
    cells: list
    csv_body: str = ""
    paths: dict = field(default_factory=dict)

    def cell(self, dim: int, algo: str) -> TTSCell:
        return next(c for c in self.cells if c.dim == dim and c.algo == algo)

    def medians(self, algo: str) -> tuple:
        cells = [c for c in self.cells if c.algo == algo]
        return (np.array([c.dim for c in cells]),
                np.array([np.nan if c.failed else c.median_evals for c in cells], dtype=float))

    def log_fit(self, algo: str):
        """Least-squares line through (dim, log median evals) over non-FAIL cells."""
        d, m = self.medians(algo)
        keep = np.isfinite(m)
        if keep.sum() < 2:
            return None
        x, y = d[keep].astype(float), np.log(m[keep])
        slope, intercept = np.polyfit(x, y, 1)
        pred = slope * x + intercept
        ss_tot = np.sum((y - y.mean()) ** 2)
        r2 = 1 - np.sum((y - pred) ** 2) / ss_tot if ss_tot > 0 else 1.0
        return float(slope), float(intercept), float(r2)

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "plan": self.plan.to_json(),
                "cells": [c.to_json() for c in self.cells],
                "fits": {a.name: self.log_fit(a.name) for a in self.plan.algorithms}}


def _pool_size() -> int:
    return max(1, int(os.environ.get("RSAA_THREADS", os.cpu_count() or 1)))


def _median(values) -> Optional[float]:
    return float(np.median(values)) if len(values) else None


def strip_timing(csv_body: str) -> str:
    """CSV text without the timing columns, for reproducibility comparisons."""
    lines = csv_body.splitlines()
    header = lines[0].split(",")
    keep = [i for i, h in enumerate(header) if h not in TIMING_COLUMNS]
    return "\n".join(",".join(row.split(",")[i] for i in keep) for row in lines) + "\n"


def run_tts(plan: ExperimentPlan, spec_factory=None, threads: Optional[int] = None) -> TTSSummary:
    """Run every trial of ``plan`` on a bounded thread pool.

    Each trial gets its own seed from :func:`trial_seed`. Trials that raise
    are recorded as failures and never abort the sweep. Rows are written in
    plan order by this function alone, atomically, to
    ``<out_dir>/<experiment_id>.csv`` and ``<out_dir>/<experiment_id>.json``
    when ``out_dir`` is set.
    """
    factory = spec_factory or (lambda name, d: get_builtin(name, d))
    specs = {d: factory(plan.function, d) for d in plan.dims}
    tasks = [(d, a, t) for d in plan.dims for a in plan.algorithms for t in range(plan.trials)]

    def one(task):
        d, a, t = task
        spec = specs[d]
        seed = trial_seed(plan.base_seed, d, a.name, t)
        target = (spec.min_value, plan.eps) if spec.min_value is not None else None
        cfg = OptimizerConfig(a.algorithm, seed, plan.budget, plan.timeout, target, a.params)
        try:
            return ALGORITHMS[a.algorithm](spec, cfg)
        except Exception as exc:  # recorded, the sweep goes on
            return RunRecord(a.algorithm, np.full(spec.dim, np.nan), math.inf, 0, False, 0.0, seed,
                             f"error: {type(exc).__name__}: {exc}")

    with ThreadPoolExecutor(threads or _pool_size()) as pool:
        records = list(pool.map(one, tasks))

    rows, cells = [], []
    by_cell: dict = {}
    for (d, a, t), rec in zip(tasks, records):
        by_cell.setdefault((d, a.name), []).append(rec)
        rows.append([d, a.name, t, rec.seed, tts_evals(rec), rec.success, rec.best_f, round(rec.wall_time, 6)])
    for d in plan.dims:
        for a in plan.algorithms:
            recs = by_cell[(d, a.name)]
            ok = [r for r in recs if r.success]
            cells.append(TTSCell(d, a.name, recs, _median([tts_evals(r) for r in ok]),
                                 _median([r.wall_time for r in ok]), len(recs) - len(ok)))
    summary = TTSSummary(plan, cells, csv_text(CSV_HEADER, rows))
    if plan.out_dir:
        out = Path(plan.out_dir)
        summary.paths["csv"] = atomic_write_text(out / f"{plan.experiment_id}.csv", summary.csv_body)
        summary.paths["json"] = write_json(out / f"{plan.experiment_id}.json", summary.to_json())
    return summary
