"""Finite-part integrals with logarithmic singularities, regularized limits
and the generalized Stieltjes transform."""

from .contour import (FpiResult, KeyholeContour, QuadratureConfig, fpi, fpi_epsilon_oracle, fpi_log_integer,
                      fpi_log_noninteger)
from .errors import (BudgetExceeded, ConvergenceError, DivergenceError, DomainError, FinpartError, PoleError,
                     PreconditionError, RangeError, WrongOrderError)
from .kernels import REGISTRY, Kernel, resolve_kernel
from .reglim import DerivativeOracle, RegLimResult, reglim_contour_oracle, reglim_corollary, reglim_ratio
from .stieltjes import StieltjesProblem, stieltjes, stieltjes_leading_asymptotic

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "ConvergenceError", "DerivativeOracle", "DivergenceError", "DomainError", "FinpartError",
    "FpiResult", "Kernel", "KeyholeContour", "PoleError", "PreconditionError", "QuadratureConfig", "REGISTRY",
    "RangeError", "RegLimResult", "StieltjesProblem", "WrongOrderError", "fpi", "fpi_epsilon_oracle",
    "fpi_log_integer", "fpi_log_noninteger", "reglim_contour_oracle", "reglim_corollary", "reglim_ratio",
    "resolve_kernel", "stieltjes", "stieltjes_leading_asymptotic",
]
