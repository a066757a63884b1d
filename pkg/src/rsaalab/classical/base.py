"""Run configuration, evaluation accounting and run records shared by all optimizers."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..functions.core import ObjectiveSpec


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for one optimizer trial.

    ``target`` is ``(f_star, eps)``; a run succeeds once some evaluation
    reaches ``f_star + eps`` and, with ``stop_on_target``, stops there.
    Algorithm-specific settings go in ``params``.
    """

    algorithm: str
    seed: int = 0
    budget: int = 1_000_000
    timeout: float = 600.0
    target: Optional[tuple] = None
    params: dict = field(default_factory=dict)
    stop_on_target: bool = True

    def __post_init__(self):
        if int(self.budget) <= 0:
            raise ValueError("budget must be positive")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.target is not None:
            f_star, eps = self.target
            if not eps > 0:
                raise ValueError("target tolerance eps must be positive")
            object.__setattr__(self, "target", (float(f_star), float(eps)))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "budget", int(self.budget))
        object.__setattr__(self, "params", dict(self.params))

    def param(self, name: str, default=None):
        return self.params.get(name, default)

    def with_params(self, **kw) -> "OptimizerConfig":
        return OptimizerConfig(self.algorithm, self.seed, self.budget, self.timeout, self.target,
                               {**self.params, **kw}, self.stop_on_target)

    @property
    def threshold(self) -> float:
        return -math.inf if self.target is None else self.target[0] + self.target[1]

    @classmethod
    def for_spec(cls, algorithm: str, spec: ObjectiveSpec, eps: float = 1e-3, **kw) -> "OptimizerConfig":
        """Config whose target is the known minimum of ``spec`` plus ``eps``."""
        if spec.min_value is None:
            raise ValueError(f"{spec.name} has no known minimum value")
        return cls(algorithm, target=(spec.min_value, eps), **kw)


@dataclass
class RunRecord:
    algorithm: str
    best_x: np.ndarray
    best_f: float
    evals: int
    success: bool
    wall_time: float
    seed: int
    stop_reason: str = "done"
    hit_evals: Optional[int] = None
    trajectory_sample: Optional[np.ndarray] = None
    label: str = ""
    info: dict = field(default_factory=dict)

    def to_json(self, include_time: bool = True) -> dict:
        out = {"algorithm": self.algorithm, "label": self.label or self.algorithm,
               "best_x": np.asarray(self.best_x).tolist(), "best_f": float(self.best_f),
               "evals": int(self.evals), "success": bool(self.success), "seed": int(self.seed),
               "stop_reason": self.stop_reason, "hit_evals": self.hit_evals, "info": self.info}
        if include_time:
            out["wall_time"] = self.wall_time
        if self.trajectory_sample is not None:
            out["trajectory_sample"] = np.asarray(self.trajectory_sample).tolist()
        return out


class Stop(Exception):
    """Raised inside an optimizer when the run must end (target, budget, timeout)."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class Evaluator:
    """Counts every objective call and keeps the best value seen.

    One value or one analytic gradient at one point costs one evaluation;
    finite-difference gradients are paid for through value calls. Budget,
    deadline and target are enforced here so optimizers only need to let
    :class:`Stop` propagate.
    """

    def __init__(self, spec: ObjectiveSpec, cfg: OptimizerConfig):
        self.spec = spec
        self.budget = cfg.budget
        self.deadline = time.perf_counter() + cfg.timeout
        self.threshold = cfg.threshold
        self.stop_on_target = cfg.stop_on_target and cfg.target is not None
        self.evals = 0
        self.best_f = math.inf
        self.best_x = None
        self.hit_evals = None
        self.trace: list = []
        self.info: dict = {}

    def _charge(self, n: int) -> int:
        if time.perf_counter() > self.deadline:
            raise Stop("timeout")
        remaining = self.budget - self.evals
        if remaining <= 0:
            raise Stop("budget")
        return min(n, remaining)

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = self._charge(X.shape[0])
        v = np.asarray(self.spec.value_fn(X[:n]), dtype=float)
        k = int(np.argmin(v))
        if v[k] < self.best_f:
            self.best_f, self.best_x = float(v[k]), X[k].copy()
        if self.hit_evals is None and self.best_f <= self.threshold:
            self.hit_evals = self.evals + int(np.flatnonzero(v <= self.threshold)[0]) + 1
        self.evals += n
        if n < X.shape[0]:
            raise Stop("budget")
        if self.stop_on_target and self.hit_evals is not None:
            raise Stop("target")
        return v

    def value(self, x) -> float:
        return float(self.values(np.asarray(x, dtype=float)[None])[0])

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.spec.grad_fn is not None:
            self._charge(1)
            self.evals += 1
            return np.asarray(self.spec.grad_fn(x[None]), dtype=float)[0]
        h = np.cbrt(np.finfo(float).eps) * (1.0 + np.abs(x))
        E = np.diag(h)
        v = self.values(np.concatenate([x + E, x - E]))
        d = x.size
        return (v[:d] - v[d:]) / (2 * h)


def reflect(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Mirror at the box faces; anything still outside after one bounce is clipped."""
    x = np.where(x > hi, 2 * hi - x, x)
    x = np.where(x < lo, 2 * lo - x, x)
    return np.clip(x, lo, hi)


def uniform_start(spec: ObjectiveSpec, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(spec.lower, spec.upper)


def start_point(spec: ObjectiveSpec, cfg: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    x0 = cfg.param("x0")
    if x0 is None:
        return uniform_start(spec, rng)
    return np.broadcast_to(np.asarray(x0, dtype=float), (spec.dim,)).copy()


def acceptance_probability(delta: float, temperature: float) -> float:
    """Metropolis rule min(1, exp(-Δf/T)); T = 0 accepts only non-increasing moves."""
    if delta <= 0:
        return 1.0
    if temperature <= 0:
        return 0.0
    return math.exp(-delta / temperature)


def metropolis_accept(delta: float, temperature: float, rng: np.random.Generator) -> bool:
    if delta <= 0:
        return True
    if temperature <= 0:
        return False
    return rng.random() < math.exp(-delta / temperature)


def execute(algorithm: str, spec: ObjectiveSpec, cfg: OptimizerConfig,
            body: Callable[[Evaluator, np.random.Generator], None], label: str = "") -> RunRecord:
    """Run ``body`` under an evaluator and turn the outcome into a RunRecord."""
    ev = Evaluator(spec, cfg)
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    reason = "done"
    try:
        body(ev, rng)
    except Stop as stop:
        reason = stop.reason
    wall = time.perf_counter() - t0
    best_x = ev.best_x if ev.best_x is not None else np.full(spec.dim, np.nan)
    traj = np.array(ev.trace) if ev.trace else None
    return RunRecord(algorithm, best_x, ev.best_f, ev.evals, ev.hit_evals is not None, wall, cfg.seed,
                     reason, ev.hit_evals, traj, label or algorithm, ev.info)
