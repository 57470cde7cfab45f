"""Exception hierarchy shared by every finpart module."""

from __future__ import annotations


class FinpartError(Exception):
    """Base class for numerical and domain failures raised by finpart."""

    kind = "error"


class DomainError(FinpartError, ValueError):
    kind = "domain"


class PoleError(DomainError):
    kind = "pole"


class RangeError(DomainError):
    kind = "range"


class PreconditionError(FinpartError, ValueError):
    kind = "precondition"


class WrongOrderError(PreconditionError):
    """The stated zero order of a denominator does not match its derivatives."""

    kind = "wrong-order"


class ConvergenceError(FinpartError, ArithmeticError):
    kind = "convergence"


class DivergenceError(ConvergenceError):
    kind = "divergence"


class BudgetExceeded(ConvergenceError):
    kind = "budget"
