"""Positive, possibly non-monotone travelling fronts of the delayed
reaction-diffusion equation ``u_t = d u_xx - u + g(u(t - h, x))``."""

from __future__ import annotations

__version__ = "0.1.0"

from ._kernels import backend, compiled_available, use_backend
from .birth import (
    BirthFunction,
    Equilibria,
    ModelParams,
    check_corollary_conditions,
    check_gsc,
    check_oscillation_criterion,
    find_positive_fixed_point,
    rescale_nicholson,
    schwarzian,
)
from .charroots import (
    check_K_hyperbolicity,
    count_roots_in_strip,
    leading_rate,
    limit_consistency,
    multiplicity_threshold,
    solve_lambda,
    solve_perturbed,
)
from .dde import History, DdeTrajectory, fit_tail_exponent, heteroclinic, integrate, validate_envelopes
from .pdesim import PdeState, compare_with_profile, run_front_experiment, step
from .regions import RegionClass, classify_region, sweep
from .waveprofile import (
    GridProfile,
    apply_wave_operator,
    epsilon_continuation,
    solve_profile,
    verify_theorem1_structure,
)

__all__ = [
    "__version__",
    "backend", "compiled_available", "use_backend",
    "BirthFunction", "Equilibria", "ModelParams", "check_corollary_conditions", "check_gsc",
    "check_oscillation_criterion", "find_positive_fixed_point", "rescale_nicholson", "schwarzian",
    "check_K_hyperbolicity", "count_roots_in_strip", "leading_rate", "limit_consistency",
    "multiplicity_threshold", "solve_lambda", "solve_perturbed",
    "History", "DdeTrajectory", "fit_tail_exponent", "heteroclinic", "integrate", "validate_envelopes",
    "PdeState", "compare_with_profile", "run_front_experiment", "step",
    "RegionClass", "classify_region", "sweep",
    "GridProfile", "apply_wave_operator", "epsilon_continuation", "solve_profile",
    "verify_theorem1_structure",
]
