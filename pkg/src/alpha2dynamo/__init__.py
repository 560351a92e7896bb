"""Spectral solver for the spherically symmetric alpha^2-dynamo with a sech profile."""
from .errors import (BlowUpError, DegenerateQuadratureError, DiscretizationError,
                     InvalidParameterError, JordanRegimeError, NumericalFailure, PoleError,
                     SolvabilityError, UndefinedRatioError)
from .estimators import PencilTransformer, ReducedLevel
from .kernels import Grid
from .pencil import PencilSolution, auxiliary_lambda, reduced_spectrum, solve_pencil, sweep
from .perturbation import (JordanExpansion, first_order_correction, jordan_chain_solution,
                           jordan_expansion, local_slope_check, solvability_e1)
from .profile import AlphaProfile, alpha, alpha_derivatives, rescale_to_unit_a
from .susy import X_J
from .transform import (build_pipeline, field_link_residual, jordan_form_check,
                        reconstruct_phi, selection_rule)
from .dirac import build_dirac_system, lift_to_dirac, regularity_report

__all__ = [
    "AlphaProfile", "BlowUpError", "DegenerateQuadratureError", "DiscretizationError", "Grid",
    "InvalidParameterError", "JordanExpansion", "JordanRegimeError", "NumericalFailure",
    "PencilSolution", "PencilTransformer", "PoleError", "ReducedLevel", "SolvabilityError",
    "UndefinedRatioError", "X_J", "alpha", "alpha_derivatives", "auxiliary_lambda",
    "build_dirac_system", "build_pipeline", "field_link_residual", "first_order_correction",
    "jordan_chain_solution", "jordan_expansion", "jordan_form_check", "lift_to_dirac",
    "local_slope_check", "reconstruct_phi", "reduced_spectrum", "regularity_report",
    "rescale_to_unit_a", "selection_rule", "solvability_e1", "solve_pencil", "sweep",
]
__version__ = "0.1.0"
