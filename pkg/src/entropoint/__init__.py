"""Pointwise entropy solutions of scalar convex conservation laws.

The solution value u(x, t) at a single space-time point is computed without
a grid, by enumerating the costates solving the characteristic algebraic
equations and keeping the one of minimal optimal-control cost.  Space-
dependent fluxes are handled by a collocation solver for the associated
two-point boundary value problems, and a flux-limited finite-volume scheme
is included for cross-validation.
"""

from .duality import ConvexFlux, check_duality, lagrangian_along_optimal, legendre_transform
from .entropy import (
    EntropySolver,
    InitialData,
    NoCandidatesError,
    SolutionSample,
)
from .estimators import MinimumValueRegressor, PointwiseEntropyRegressor
from .piecewise import (
    ApproximationError,
    DomainError,
    PiecewiseFunction,
    antiderivative,
    approximate,
    evaluate,
    jumps,
    prange,
    roots,
)

__all__ = [
    "ApproximationError",
    "ConvexFlux",
    "DomainError",
    "EntropySolver",
    "InitialData",
    "MinimumValueRegressor",
    "NoCandidatesError",
    "PiecewiseFunction",
    "PointwiseEntropyRegressor",
    "SolutionSample",
    "antiderivative",
    "approximate",
    "check_duality",
    "evaluate",
    "jumps",
    "lagrangian_along_optimal",
    "legendre_transform",
    "prange",
    "roots",
]

__version__ = "0.1.0"
