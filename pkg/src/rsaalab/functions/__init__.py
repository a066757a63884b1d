"""Benchmark objectives with derivatives and rotated block composition."""

from .builtins import (BUILTINS, biquartic_critical_points, default_convex_radius, get_builtin,
                       make_biquartic, make_double_well, make_fi_1d, make_levy2,
                       make_modified_rastrigin, make_perturbed_convex, make_quadratic,
                       make_rastrigin_sep)
from .core import (DerivativeCaps, EvalBundle, FDReport, ObjectiveSpec, certify_minimizer, evaluate,
                   fd_check, fd_gradient, fd_hessian, fd_laplacian)
from .expr import compile_expression, load_function_config, spec_from_expression
from .rotated import (RotatedSeparable, compose_rotated_blocks, haar_orthogonal, random_block_instance,
                      rotation_2d)

__all__ = [
    "BUILTINS", "DerivativeCaps", "EvalBundle", "FDReport", "ObjectiveSpec", "RotatedSeparable",
    "biquartic_critical_points", "certify_minimizer", "compile_expression", "compose_rotated_blocks",
    "default_convex_radius", "evaluate", "fd_check", "fd_gradient", "fd_hessian", "fd_laplacian",
    "get_builtin", "haar_orthogonal", "load_function_config", "make_biquartic", "make_double_well",
    "make_fi_1d", "make_levy2", "make_modified_rastrigin", "make_perturbed_convex", "make_quadratic",
    "make_rastrigin_sep", "random_block_instance", "rotation_2d", "spec_from_expression",
]
