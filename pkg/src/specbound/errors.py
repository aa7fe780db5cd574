"""Exception hierarchy.

Validation problems derive from ``ValueError`` and solver failures from
``ArithmeticError`` so callers can sort them without importing every class.
"""

__all__ = [
    "SpecboundError",
    "ValidationError",
    "SolverError",
    "GridMismatch",
    "AliasingError",
    "ToeplitzNotPD",
    "NonPositiveDensity",
    "NonStationaryModel",
    "OrderTooLarge",
    "UnknownDistribution",
    "InvalidMoments",
    "EmptyFeasibleBox",
    "NegativeMu",
    "NegativeKL",
    "NonPositiveQ",
    "MaxIterations",
    "BoundaryApproach",
    "NoInteriorSolution",
]


class SpecboundError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SpecboundError, ValueError):
    pass


class SolverError(SpecboundError, ArithmeticError):
    pass


class GridMismatch(ValidationError):
    pass


class AliasingError(ValidationError):
    pass


class ToeplitzNotPD(ValidationError):
    pass


class NonPositiveDensity(ValidationError):
    pass


class NonStationaryModel(ValidationError):
    pass


class OrderTooLarge(ValidationError):
    pass


class UnknownDistribution(ValidationError):
    pass


class InvalidMoments(ValidationError):
    pass


class EmptyFeasibleBox(ValidationError):
    pass


class NegativeMu(ValidationError):
    pass


class NegativeKL(ValidationError):
    pass


class NonPositiveQ(SolverError):
    pass


class MaxIterations(SolverError):
    pass


class BoundaryApproach(SolverError):
    pass


class NoInteriorSolution(SolverError):
    pass
