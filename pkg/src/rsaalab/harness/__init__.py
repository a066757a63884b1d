"""Experiment orchestration: time-to-solution sweeps, figure data, end-to-end runs and the CLI."""

from .experiments import parse_range, rsaa_run
from .figures import (GapComparison, PotentialSurfaces, figure_gap_comparison, figure_potentials,
                      near_global_clusters)
from .tts import (SCHEMA_VERSION, AlgorithmSpec, ExperimentPlan, TTSCell, TTSSummary, run_tts, strip_timing,
                  trial_seed, tts_evals)

__all__ = [
    "SCHEMA_VERSION", "AlgorithmSpec", "ExperimentPlan", "GapComparison", "PotentialSurfaces", "TTSCell",
    "TTSSummary", "figure_gap_comparison", "figure_potentials", "near_global_clusters", "parse_range",
    "rsaa_run", "run_tts", "strip_timing", "trial_seed", "tts_evals",
]
