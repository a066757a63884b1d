"""Basin hopping, simulated annealing (stand-in) and differential evolution."""

from __future__ import annotations

import numpy as np

from ..functions.core import ObjectiveSpec
from .base import OptimizerConfig, RunRecord, execute, metropolis_accept, reflect, start_point, uniform_start
from .local import lbfgs_box


def _local(ev, x, tol, max_iter):
    return lbfgs_box(ev.value, ev.gradient, x, ev.spec.lower, ev.spec.upper, tol, max_iter)


def hopping_temperature(rule, dim: int) -> float:
    if isinstance(rule, str):
        if rule != "1/d":
            raise ValueError(f"unknown temperature rule {rule!r}")
        return 1.0 / dim
    T = float(rule)
    if T < 0:
        raise ValueError("temperature must be non-negative")
    return T


def run_basin_hopping(spec: ObjectiveSpec, cfg: OptimizerConfig) -> RunRecord:
    """Perturb uniformly in x + [-δ, δ]^d, minimize locally, accept by Metropolis at T_M.

    Parameters: ``step`` δ (1.5), ``temperature`` T_M (``"1/d"``),
    ``adaptive`` (True: every ``interval`` = 50 hops δ is divided by 0.9 if
    more than half were accepted and multiplied by 0.9 otherwise),
    ``local_tol`` (1e-6), ``local_max_iter`` (500), ``x0``.
    """
    step = float(cfg.param("step", 1.5))
    if not step > 0:
        raise ValueError("step must be positive")
    T = hopping_temperature(cfg.param("temperature", "1/d"), spec.dim)
    adaptive = bool(cfg.param("adaptive", True))
    interval = int(cfg.param("interval", 50))
    tol = float(cfg.param("local_tol", 1e-6))
    max_iter = int(cfg.param("local_max_iter", 500))
    lo, hi = spec.lower, spec.upper

    def body(ev, rng):
        nonlocal step
        cur = _local(ev, start_point(spec, cfg, rng), tol, max_iter)
        accepted = hops = 0
        ev.info.update(hops=0, accepted=0, step=step)
        while True:
            trial = np.clip(cur.x + rng.uniform(-step, step, spec.dim), lo, hi)
            new = _local(ev, trial, tol, max_iter)
            hops += 1
            if metropolis_accept(new.f - cur.f, T, rng):
                cur = new
                accepted += 1
            if adaptive and hops % interval == 0:
                step = step / 0.9 if accepted / hops > 0.5 else step * 0.9
            ev.info.update(hops=hops, accepted=accepted, step=step)

    return execute("basin_hopping", spec, cfg, body)


def run_simulated_annealing(spec: ObjectiveSpec, cfg: OptimizerConfig) -> RunRecord:
    """Own simulated-annealing stand-in for library dual annealing.

    Metropolis walk at T_k = T₀ c^k with Cauchy proposals of per-coordinate
    scale ``step``·(box width)·T_k/T₀, reflected into the box. After every
    ``local_every`` accepted moves the current point is polished by
    L-BFGS. The walk restarts from a uniform point (and T₀) once T_k falls
    below ``restart_ratio``·T₀ or after ``stall`` proposals without a new
    best. With T₀ = 0 it is descent with random restarts.

    Parameters: ``T0`` (10), ``cooling`` c (0.99), ``step`` (0.1),
    ``local_every`` (20), ``restart_ratio`` (1e-4), ``stall`` (1000), ``x0``.
    """
    T0 = float(cfg.param("T0", 10.0))
    c = float(cfg.param("cooling", 0.99))
    if T0 < 0 or not 0 < c < 1:
        raise ValueError("need T0 >= 0 and cooling rate in (0, 1)")
    step = float(cfg.param("step", 0.1))
    local_every = int(cfg.param("local_every", 20))
    restart_ratio = float(cfg.param("restart_ratio", 1e-4))
    stall_limit = int(cfg.param("stall", 1000))
    tol = float(cfg.param("local_tol", 1e-6))
    lo, hi = spec.lower, spec.upper
    width = hi - lo

    def body(ev, rng):
        x = start_point(spec, cfg, rng)
        f = ev.value(x)
        T, accepted, stall, best, restarts = T0, 0, 0, f, 0
        while True:
            scale = step * width * (T / T0 if T0 > 0 else 1.0)
            y = reflect(x + scale * rng.standard_cauchy(spec.dim), lo, hi)
            fy = ev.value(y)
            if metropolis_accept(fy - f, T, rng):
                x, f = y, fy
                accepted += 1
                if accepted % local_every == 0:
                    res = _local(ev, x, tol, 500)
                    x, f = res.x, res.f
            if f < best - 1e-12:
                best, stall = f, 0
            else:
                stall += 1
            T *= c
            if (T0 > 0 and T < restart_ratio * T0) or stall >= stall_limit:
                res = _local(ev, x, tol, 500)
                x = uniform_start(spec, rng)
                f = ev.value(x)
                T, stall, restarts = T0, 0, restarts + 1
                ev.info["restarts"] = restarts

    return execute("simulated_annealing", spec, cfg, body, label="SA (stand-in)")


def run_differential_evolution(spec: ObjectiveSpec, cfg: OptimizerConfig) -> RunRecord:
    """DE/rand/1/bin with greedy selection.

    Parameters: ``F`` (0.8), ``CR`` (0.9), ``popsize`` (15·d, or 1000·d with
    ``large_population``), ``population`` (explicit initial population),
    ``max_generations``.
    """
    F = float(cfg.param("F", 0.8))
    CR = float(cfg.param("CR", 0.9))
    init = cfg.param("population")
    d = spec.dim
    if init is not None:
        init = np.array(init, dtype=float).reshape(-1, d)
        NP = init.shape[0]
    else:
        NP = int(cfg.param("popsize", (1000 if cfg.param("large_population", False) else 15) * d))
    if NP < 4:
        raise ValueError("population must have at least 4 members")
    max_gen = cfg.param("max_generations")
    lo, hi = spec.lower, spec.upper

    def body(ev, rng):
        pop = init.copy() if init is not None else rng.uniform(lo, hi, size=(NP, d))
        fit = ev.values(pop)
        gen = 0
        while max_gen is None or gen < int(max_gen):
            picks = np.empty((NP, 3), dtype=np.intp)
            for i in range(NP):
                r = rng.choice(NP - 1, 3, replace=False)
                picks[i] = r + (r >= i)
            a, b, cc = pop[picks[:, 0]], pop[picks[:, 1]], pop[picks[:, 2]]
            mutant = reflect(a + F * (b - cc), lo, hi)
            cross = rng.random((NP, d)) < CR
            cross[np.arange(NP), rng.integers(0, d, NP)] = True
            trial = np.where(cross, mutant, pop)
            ft = ev.values(trial)
            better = ft <= fit
            pop[better], fit[better] = trial[better], ft[better]
            gen += 1
            ev.info["generations"] = gen
        ev.info["population"] = pop

    return execute("differential_evolution", spec, cfg, body)
