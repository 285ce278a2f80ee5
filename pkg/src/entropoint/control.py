"""Minimum-value solutions via the optimal-control boundary value problems.

For space-dependent flux the characteristic system is a genuine ODE pair

    x'(r) = alpha*(x(r), p(r)),   p'(r) = -dH/dx(x(r), p(r), alpha*)

with x(0) = x and either p(t) = g(x(t)) (smooth terminal data) or x(t) = a_k
(terminal point pinned to a jump of g).  Each candidate is solved by
Chebyshev collocation with a damped Newton iteration; the solution value is
the initial costate p(0) of the converged trajectory with smallest cost

    J = integral_0^t L(x(r), alpha*(x(r), p(r))) dr + G(x(t)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import piecewise as pw
from .entropy import InitialData, NoCandidatesError, SolutionSample

DEFAULT_BVP_TOL = 1e-10
DEFAULT_DEGREES = (16, 32, 64, 128)


@dataclass(frozen=True)
class ControlProblem:
    """Hamiltonian-side description of a conservation law.

    All fields are callables vectorized over numpy arrays:
    hamiltonian H(x, p, a), its state derivative dH_dx(x, p, a), the
    minimizing control alpha_star(x, p), the running cost lagrangian(x, a),
    and the terminal data terminal_g (= G') and terminal_G.  Exact closed
    forms are preferred for the terminal data; a piecewise representation
    from InitialData works too (see from_initial_data).
    """

    hamiltonian: Callable
    dH_dx: Callable
    alpha_star: Callable
    lagrangian: Callable
    terminal_g: Callable
    terminal_G: Callable
    terminal_discontinuities: tuple = ()
    horizon_T: float = np.inf

    @classmethod
    def from_initial_data(
        cls,
        hamiltonian: Callable,
        dH_dx: Callable,
        alpha_star: Callable,
        lagrangian: Callable,
        init: InitialData,
        horizon_T: float = np.inf,
    ) -> "ControlProblem":
        return cls(
            hamiltonian=hamiltonian,
            dH_dx=dH_dx,
            alpha_star=alpha_star,
            lagrangian=lagrangian,
            terminal_g=init.g_at,
            terminal_G=init.G_at,
            terminal_discontinuities=tuple(init.discontinuities),
            horizon_T=horizon_T,
        )

    def flux_value(self, x, p):
        """F(x, p) = -min_a H(x, p, a), evaluated at the minimizing control."""
        a = self.alpha_star(x, p)
        return -self.hamiltonian(x, p, a)


@dataclass(frozen=True)
class BvpCandidate:
    """One candidate boundary value problem: terminal condition plus Newton seed.

    terminal is "free" (p(t) = g(x(t))) or a float a_k (x(t) pinned there).
    x_guess/p_guess are callables of r on [0, t]; None selects a straight
    line to the terminal state and a constant costate.
    """

    terminal: Union[str, float] = "free"
    x_guess: Callable | None = None
    p_guess: Callable | None = None
    label: str = ""


@dataclass(frozen=True)
class BvpSolution:
    """A converged (or failed) two-point BVP solve."""

    x_path: pw.PiecewiseFunction
    p_path: pw.PiecewiseFunction
    cost: float
    converged: bool
    residual: float
    terminal: Union[str, float]

    @property
    def u0(self) -> float:
        """Initial costate p(0), the solution value the trajectory carries."""
        return float(pw.evaluate(self.p_path, self.p_path.domain[0]))

    def x_at(self, r):
        return pw.evaluate(self.x_path, r)

    def p_at(self, r):
        return pw.evaluate(self.p_path, r)


def _cheb_nodes(n: int, t: float) -> np.ndarray:
    """Second-kind Chebyshev nodes on [0, t], ascending."""
    return 0.5 * t * (1.0 - np.cos(np.pi * np.arange(n + 1) / n))


def _diff_matrix(nodes: np.ndarray) -> np.ndarray:
    """Barycentric differentiation matrix for Chebyshev nodes."""
    n = nodes.size - 1
    w = np.ones(n + 1)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[n] *= 0.5
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -np.sum(D, axis=1))
    return D


def _clencurt(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights on [-1, 1] for the n+1 second-kind nodes."""
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    ii = np.arange(1, n)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
        v -= np.cos(n * theta[ii]) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
    w[ii] = 2.0 * v / n
    return w


def solve_bvp(
    prob: ControlProblem,
    x: float,
    t: float,
    terminal: Union[str, float] = "free",
    guess: tuple[Callable, Callable] | None = None,
    bvp_tol: float = DEFAULT_BVP_TOL,
    degrees: Sequence[int] = DEFAULT_DEGREES,
    max_newton: int = 40,
) -> BvpSolution:
    """Collocation + damped Newton solve of one characteristic BVP.

    The collocation degree escalates through `degrees` until the dynamics
    residual, measured off the collocation nodes, drops below bvp_tol.  A
    Newton step is halved up to 10 times while it increases the residual;
    failure to converge is reported through the returned flag, never raised.
    """
    if t <= 0:
        raise ValueError("BVP solves require t > 0")
    pinned = terminal != "free"
    a_k = float(terminal) if pinned else np.nan

    if guess is not None:
        x_fn, p_fn = guess
    else:
        xT = a_k if pinned else x
        x_fn = lambda r: x + (xT - x) * (r / t)
        p_fn = lambda r: np.full_like(np.asarray(r, dtype=float),
                                      float(prob.terminal_g(np.asarray(xT))))

    X = P = None
    converged = False
    true_res = np.inf
    nodes = None
    for n in degrees:
        nodes = _cheb_nodes(n, t)
        D = _diff_matrix(nodes)
        if X is None:
            Xv = np.asarray(x_fn(nodes), dtype=float) + np.zeros(n + 1)
            Pv = np.asarray(p_fn(nodes), dtype=float) + np.zeros(n + 1)
        else:
            Xv = pw.evaluate(X, nodes)
            Pv = pw.evaluate(P, nodes)

        def residual(z):
            Xz, Pz = z[: n + 1], z[n + 1 :]
            A = prob.alpha_star(Xz, Pz)
            RX = D @ Xz - A
            RP = D @ Pz + prob.dH_dx(Xz, Pz, A)
            RX[0] = Xz[0] - x
            if pinned:
                RX[n] = Xz[n] - a_k
            else:
                RP[n] = Pz[n] - prob.terminal_g(np.asarray(Xz[n]))
            return np.concatenate([RX, RP])

        z = np.concatenate([Xv, Pv])
        R = residual(z)
        nrm = float(np.max(np.abs(R)))
        ok = True
        for _ in range(max_newton):
            if not np.isfinite(nrm):
                ok = False
                break
            if nrm <= 0.1 * bvp_tol:
                break
            J = _fd_jacobian(residual, z, R)
            try:
                d = np.linalg.solve(J, -R)
            except np.linalg.LinAlgError:
                ok = False
                break
            lam = 1.0
            improved = False
            for _ in range(10):
                z_new = z + lam * d
                R_new = residual(z_new)
                n_new = float(np.max(np.abs(R_new)))
                if np.isfinite(n_new) and n_new < nrm:
                    improved = True
                    break
                lam *= 0.5
            if not improved:
                break
            z, R, nrm = z_new, R_new, n_new

        X = pw.from_chebyshev_nodes(z[: n + 1], [0.0, t])
        P = pw.from_chebyshev_nodes(z[n + 1 :], [0.0, t])
        if not ok:
            continue
        true_res = _dynamics_residual(prob, X, P, x, t, terminal)
        if true_res <= bvp_tol:
            converged = True
            break

    Xn = pw.evaluate(X, nodes)
    Pn = pw.evaluate(P, nodes)
    A = prob.alpha_star(Xn, Pn)
    w = _clencurt(nodes.size - 1) * (t / 2.0)
    cost = float(w @ np.asarray(prob.lagrangian(Xn, A), dtype=float)
                 + prob.terminal_G(np.asarray(Xn[-1])))
    return BvpSolution(x_path=X, p_path=P, cost=cost, converged=converged,
                       residual=float(true_res), terminal=terminal)


def _fd_jacobian(residual: Callable, z: np.ndarray, R0: np.ndarray) -> np.ndarray:
    m = z.size
    J = np.empty((m, m))
    step = np.sqrt(np.finfo(float).eps)
    for i in range(m):
        h = step * (1.0 + abs(z[i]))
        zp = z.copy()
        zp[i] += h
        J[:, i] = (residual(zp) - R0) / h
    return J


def _dynamics_residual(
    prob: ControlProblem,
    X: pw.PiecewiseFunction,
    P: pw.PiecewiseFunction,
    x: float,
    t: float,
    terminal: Union[str, float],
) -> float:
    """Max residual of dynamics and boundary conditions off the collocation grid."""
    deg = max(len(X.pieces[0]), len(P.pieces[0])) - 1
    s = _cheb_nodes(max(4 * deg, 32) + 1, t)
    Xs, Ps = pw.evaluate(X, s), pw.evaluate(P, s)
    dXs = pw.evaluate(pw.derivative(X), s)
    dPs = pw.evaluate(pw.derivative(P), s)
    A = prob.alpha_star(Xs, Ps)
    res = max(
        float(np.max(np.abs(dXs - A))),
        float(np.max(np.abs(dPs + prob.dH_dx(Xs, Ps, A)))),
        abs(float(pw.evaluate(X, 0.0)) - x),
    )
    if terminal == "free":
        xT = float(pw.evaluate(X, t))
        res = max(res, abs(float(pw.evaluate(P, t)) - float(prob.terminal_g(np.asarray(xT)))))
    else:
        res = max(res, abs(float(pw.evaluate(X, t)) - float(terminal)))
    return res


def minimum_value_point(
    prob: ControlProblem,
    enumerator: Callable,
    x: float,
    t: float,
    bvp_tol: float = DEFAULT_BVP_TOL,
    degrees: Sequence[int] = DEFAULT_DEGREES,
) -> SolutionSample:
    """Minimum-value solution at (x, t): cheapest converged candidate BVP.

    The enumerator supplies the candidate terminal conditions and Newton
    seeds; completeness is only as good as the enumerator (closed-form
    enumerators give it exactly, generic guess sets heuristically).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return SolutionSample(x=float(x), t=0.0,
                              u=float(prob.terminal_g(np.asarray(x))),
                              J=float(prob.terminal_G(np.asarray(x))),
                              candidate_count=0)
    sols = []
    for cand in enumerator(x, t):
        guess = None
        if cand.x_guess is not None and cand.p_guess is not None:
            guess = (cand.x_guess, cand.p_guess)
        sol = solve_bvp(prob, x, t, terminal=cand.terminal, guess=guess,
                        bvp_tol=bvp_tol, degrees=degrees)
        if sol.converged:
            sols.append(sol)
    if not sols:
        raise NoCandidatesError(f"no converged BVP candidate at ({x}, {t})")
    best = min(sols, key=lambda s: (s.cost, s.u0))
    return SolutionSample(x=float(x), t=float(t), u=best.u0, J=best.cost,
                          candidate_count=len(sols))
