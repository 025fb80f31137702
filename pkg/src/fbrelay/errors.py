"""Semantic exception hierarchy.

Three failure classes matter to callers: bad inputs (DomainError), results
that violate a mathematical guarantee (NumericError), and integrators that
give up (ConvergenceError).  The CLI maps them onto distinct exit codes.
"""


class FbrelayError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FbrelayError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class NumericError(FbrelayError, ArithmeticError):
    """A computed value violates an internal guarantee (e.g. a probability
    leaving [0, 1] by more than round-off) — signals a formula or parameter
    problem, not a caller mistake."""


class ConvergenceError(NumericError):
    """An adaptive integrator failed to reach the requested tolerance
    within its evaluation budget."""
