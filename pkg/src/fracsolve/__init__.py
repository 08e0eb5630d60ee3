"""fracsolve: approximate solvers for fractional powers of SPD operators.

Solves f(A) u = phi for symmetric positive definite A, specialized to
u = A^(-alpha) phi, via rational, exponential-sum and exponential-product
approximants and their Cauchy-problem reformulations, with every error
estimate realized as a machine-checkable inequality against a dense
spectral oracle.
"""

from .analysis import (BoundCheckReport, ScalarErrorEstimate, check_estimate_11,
                       check_estimates_13_14, check_theorem, scan_scalar_error)
from .approximants import (ShiftedSumApproximant, SolveReport, apply_es_exact,
                           apply_es_via_ode, apply_rational,
                           approximant_from_json, approximant_to_json,
                           es_from_graded, es_from_laguerre,
                           rational_from_gauss_jacobi, rational_from_kappa,
                           rational_from_log_trapezoid, scalar_eval)
from .cauchy import (CauchyRunReport, TimeGrid, cauchy_ep_solve, cauchy_es_solve,
                     cauchy_kappa_solve, cauchy_rational_solve,
                     cauchy_second_order_solve, geometric_grid, richardson_order,
                     uniform_grid)
from .exp_product import (EpApproximant, apply_ep_piecewise, apply_ep_sequence,
                          ep_error_budget, ep_from_json, ep_log_eval,
                          ep_scalar_eval, ep_to_json, richter_log_coeffs,
                          validate_ep)
from .operators import (Eigenpairs, FracPowerSpec, SpdOperator, build_dense,
                        build_diagonal, build_laplacian_1d, build_laplacian_2d,
                        d_norm, oracle_apply_function, spectral_oracle)
from .quadrature import (QuadratureRule, gauss_jacobi, gauss_laguerre_generalized,
                         gauss_legendre, graded_midpoint, log_trapezoid)
from .solvers import (ShiftedSolveError, ShiftedSolveResult, ToleranceSchedule,
                      make_tolerance_schedule, solve_affine, solve_shifted)

__version__ = "0.1.0"
