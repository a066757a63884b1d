"""Classical optimizers: Langevin, descent, basin hopping, annealing, differential evolution,
convexity honing and the Hessian rotation-recovery algorithm."""

from .base import (Evaluator, OptimizerConfig, RunRecord, Stop, acceptance_probability, metropolis_accept,
                   reflect)
from .hessian import recover_blocks, run_hessian_algorithm
from .honing import honing_beta, run_convexity_honing
from .langevin import HittingTimes, langevin_hitting_times, langevin_sigma, run_langevin
from .local import LocalResult, gradient_descent_box, lbfgs_box, local_minimize, run_gradient_descent
from .stochastic import run_basin_hopping, run_differential_evolution, run_simulated_annealing

ALGORITHMS = {
    "langevin": run_langevin,
    "gd": run_gradient_descent,
    "basin_hopping": run_basin_hopping,
    "sa": run_simulated_annealing,
    "de": run_differential_evolution,
    "honing": run_convexity_honing,
    "hessian": run_hessian_algorithm,
}


def run(spec, cfg: OptimizerConfig) -> RunRecord:
    """Dispatch on ``cfg.algorithm`` (a key of :data:`ALGORITHMS`)."""
    try:
        fn = ALGORITHMS[cfg.algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {cfg.algorithm!r}; choose from {sorted(ALGORITHMS)}") from None
    return fn(spec, cfg)


__all__ = [
    "ALGORITHMS", "Evaluator", "HittingTimes", "LocalResult", "OptimizerConfig", "RunRecord", "Stop",
    "acceptance_probability", "gradient_descent_box", "honing_beta", "langevin_hitting_times",
    "langevin_sigma", "lbfgs_box", "local_minimize", "metropolis_accept", "recover_blocks", "reflect", "run",
    "run_basin_hopping", "run_convexity_honing", "run_differential_evolution", "run_gradient_descent",
    "run_hessian_algorithm", "run_langevin", "run_simulated_annealing",
]
