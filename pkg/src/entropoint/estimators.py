"""Scikit-learn style estimators wrapping the pointwise solvers.

The solvers are naturally fit/predict shaped: fitting builds the piecewise
representation of the initial data (the only precomputation the algorithm
needs), prediction evaluates the solution independently at each (x, t) row.
Both estimators follow the sklearn contract (get_params/set_params/clone,
attributes with trailing underscores set by fit), so they compose with
pipelines and model-selection utilities.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import piecewise as pw
from ._validation import check_interval, check_points
from .control import ControlProblem, minimum_value_point
from .duality import ConvexFlux
from .entropy import EntropySolver, InitialData


class PointwiseEntropyRegressor(BaseEstimator):
    """Pointwise entropy solution of u_t + F(u)_x = 0 as a regressor.

    Parameters
    ----------
    flux : ConvexFlux
        Space-independent convex flux with derivative.
    initial_condition : callable
        Initial state g(x); vectorized over numpy arrays.
    domain : (lo, hi)
        Interval on which g is represented; g extends constantly outside.
    breakpoints : iterable of float
        Points where g jumps or kinks (splitting hints for the
        representation; jumps are detected among them automatically).
    rel_tol, root_tol : float
        Approximation and rootfinding tolerances.
    n_jobs : int or None
        Worker count for predict; None means serial evaluation.  Results
        are independent of this setting.
    """

    def __init__(
        self,
        flux: ConvexFlux | None = None,
        initial_condition: Callable | None = None,
        domain: Sequence[float] | None = None,
        breakpoints: Iterable[float] = (),
        rel_tol: float = pw.DEFAULT_REL_TOL,
        root_tol: float = pw.DEFAULT_ROOT_TOL,
        n_jobs: int | None = None,
    ):
        self.flux = flux
        self.initial_condition = initial_condition
        self.domain = domain
        self.breakpoints = breakpoints
        self.rel_tol = rel_tol
        self.root_tol = root_tol
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        """Build the piecewise initial data and the solver; X and y are unused."""
        if self.flux is None or self.initial_condition is None or self.domain is None:
            raise ValueError("flux, initial_condition and domain are required")
        lo, hi = check_interval(self.domain)
        init = InitialData.from_function(
            self.initial_condition, (lo, hi),
            breakpoints=self.breakpoints, rel_tol=self.rel_tol,
        )
        self.init_ = init
        self.solver_ = EntropySolver(
            self.flux, init, rel_tol=self.rel_tol, root_tol=self.root_tol
        )
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        """Entropy solution u at each (x, t) row of X."""
        return np.array([s.u for s in self.solve(X)])

    def predict_cost(self, X) -> np.ndarray:
        """Minimal optimal-control cost w(x, t) at each (x, t) row of X."""
        return np.array([s.J for s in self.solve(X)])

    def solve(self, X):
        """Full SolutionSample records for each (x, t) row of X."""
        check_is_fitted(self, "solver_")
        X = check_points(X)
        if self.n_jobs is not None and self.n_jobs != 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=max(1, int(self.n_jobs))) as ex:
                return list(ex.map(lambda r: self.solver_.solve_point(r[0], r[1]), X))
        return [self.solver_.solve_point(x, t) for x, t in X]


class MinimumValueRegressor(BaseEstimator):
    """Minimum-value solution of a space-dependent conservation law.

    Wraps the two-point boundary value solver: each (x, t) query solves the
    candidate BVPs produced by the enumerator and returns the initial costate
    of the cheapest converged trajectory.

    Parameters
    ----------
    problem : ControlProblem
        Hamiltonian-side description of the flux.
    enumerator : callable (x, t) -> iterable of BvpCandidate
        Candidate terminal conditions and Newton seeds.
    bvp_tol : float
        Residual tolerance for the collocation solves.
    """

    def __init__(
        self,
        problem: ControlProblem | None = None,
        enumerator: Callable | None = None,
        bvp_tol: float = 1e-10,
    ):
        self.problem = problem
        self.enumerator = enumerator
        self.bvp_tol = bvp_tol

    def fit(self, X=None, y=None):
        if self.problem is None or self.enumerator is None:
            raise ValueError("problem and enumerator are required")
        self.problem_ = self.problem
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        return np.array([s.u for s in self.solve(X)])

    def predict_cost(self, X) -> np.ndarray:
        return np.array([s.J for s in self.solve(X)])

    def solve(self, X):
        check_is_fitted(self, "problem_")
        X = check_points(X)
        return [
            minimum_value_point(self.problem_, self.enumerator, x, t, bvp_tol=self.bvp_tol)
            for x, t in X
        ]
