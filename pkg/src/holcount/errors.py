"""Exception hierarchy shared by all holcount modules."""

from __future__ import annotations


class HolcountError(Exception):
    """Base class for all errors raised by this package."""


class UnknownVertex(HolcountError):
    """A vertex id does not belong to the graph."""


class UnknownEdge(HolcountError):
    """An edge reference does not belong to the graph."""


class DuplicateEdge(HolcountError):
    """The same edge (or a self-loop) was declared twice."""


class NotANormalEdge(HolcountError):
    """split_edge was handed a half-edge or an invalid reference."""


class PreconditionViolated(HolcountError):
    """A documented precondition of an operation does not hold."""


class ConditionViolated(HolcountError):
    """The (instance, sigma, tau, vertex) tuple is not a valid coupling root."""


class NotInternalFeasible(HolcountError):
    """The node is not an internal feasible node of the coupling tree."""


class InvalidBracket(HolcountError):
    """A ratio bracket with lower endpoint above the upper endpoint."""


class DomainError(HolcountError):
    """A numeric argument lies outside its documented domain."""


class InstanceInvalid(HolcountError):
    """The instance fails validation and the operation requires validity."""


class InvalidB(HolcountError):
    """A per-vertex bound b is outside the allowed range."""


class TooLarge(HolcountError):
    """The instance exceeds the brute-force enumeration cap."""


class InfeasibleCondition(HolcountError):
    """A conditional marginal was requested under a weight-zero condition."""


class BudgetExceeded(HolcountError):
    """Tree construction exceeded the configured node budget."""


class ParseError(HolcountError):
    """An instance document could not be parsed."""


class ValidationError(HolcountError):
    """A parsed instance document violates a validity rule."""


class InternalError(HolcountError):
    """An internal invariant failed; indicates a bug, not bad input."""
