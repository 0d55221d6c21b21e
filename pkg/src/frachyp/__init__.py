"""Fractional-order hyperbolic systems in the Caputo sense.

Mittag-Leffler evaluation, classification of first-order matrix symbols,
the resolvent matrix function and a periodic spectral solver.
"""

from .hyperbolicity import (
    HyperbolicityReport,
    SamplePlan,
    Verdict,
    check_linear_bound,
    cosine_inequality_check,
    estimate_exponent,
    hirsch_bound,
    verify_fractional_hyperbolic,
)
from .reduction import DWReduction, dw_initial_state, reduce_diffusion_wave
from .resolvent import (
    ResolventSample,
    matrix_ml,
    newton_coeffs,
    norm_bound_rhs,
    norm_bound_samples,
    resolvent,
    verify_norm_bound,
)
from .special_functions import (
    FractionalOrder,
    MLParams,
    deriv_envelope,
    eval_E_alpha,
    eval_E_alpha_deriv,
    eval_E_gen,
    principal_root,
    sector,
    wright_psi11,
)
from .spectral_solver import (
    DecayFit,
    GridField,
    GridSpec,
    decay_fit,
    dw_green_check,
    dw_scalar_spectral,
    green_kernel,
    solve_cauchy,
)
from .symbol_algebra import (
    CharRoots,
    ComplexFrequency,
    MatrixPencil,
    char_roots,
    eval_pencil,
    lambda_alpha,
    pencil_from_symmetric,
)

__all__ = [
    "CharRoots", "ComplexFrequency", "DWReduction", "DecayFit", "FractionalOrder",
    "GridField", "GridSpec", "HyperbolicityReport", "MLParams", "MatrixPencil",
    "ResolventSample", "SamplePlan", "Verdict", "char_roots", "check_linear_bound",
    "cosine_inequality_check", "decay_fit", "deriv_envelope", "dw_green_check",
    "dw_initial_state", "dw_scalar_spectral", "estimate_exponent", "eval_E_alpha",
    "eval_E_alpha_deriv", "eval_E_gen", "eval_pencil", "green_kernel", "hirsch_bound",
    "lambda_alpha", "matrix_ml", "newton_coeffs", "norm_bound_rhs", "norm_bound_samples", "pencil_from_symmetric",
    "principal_root", "reduce_diffusion_wave", "resolvent", "sector", "solve_cauchy",
    "verify_fractional_hyperbolic", "verify_norm_bound", "wright_psi11",
]
