"""Catalog of benchmark conservation-law problems.

Seven problems spanning piecewise-constant, smooth periodic, compactly
supported oscillatory and traffic-flow initial data for Burgers-type fluxes,
plus two space-dependent fluxes handled through their optimal-control form.
Analytic solutions are attached where closed forms exist; the sinusoidal
Burgers problem instead ships an independent characteristic-equation oracle
(dense sampling + bisection + exact antiderivative).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import piecewise as pw
from .control import BvpCandidate, ControlProblem
from .duality import ConvexFlux
from .entropy import InitialData


@dataclass(frozen=True)
class ReportTransform:
    """Extra reported column, a linear map of u (e.g. traffic density q = -u)."""

    column: str
    scale: float

    def apply(self, u):
        return self.scale * np.asarray(u, dtype=float)


@dataclass(frozen=True)
class ProblemSpec:
    """One catalog problem: flux (or control form), initial data, references."""

    name: str
    kind: str  # "space_independent" | "space_dependent"
    init: InitialData
    flux: ConvexFlux | None = None
    control: ControlProblem | None = None
    enumerator: Callable | None = None
    analytic: Callable | None = None
    domain_xt: tuple = ((0.0, 1.0), (0.0, 1.0))
    transform: ReportTransform | None = None
    shock_loci: Callable | None = None
    fv_config: dict | None = None
    notes: str = ""
    flux_descriptor: dict | None = None
    init_descriptor: dict | None = None


@dataclass(frozen=True)
class ErrorReport:
    max_abs: float
    l1: float
    excluded_points: int
    n_points: int


# -- flux families ------------------------------------------------------------


def quadratic_flux(scale: float = 0.5) -> ConvexFlux:
    """F(u) = scale * u^2; scale 0.5 is the Burgers flux."""
    return ConvexFlux(
        F=lambda u: scale * np.asarray(u, dtype=float) ** 2,
        Fprime=lambda u: 2.0 * scale * np.asarray(u, dtype=float),
        p_domain=(-2.0, 3.0),
    )


def quartic_flux(scale: float = 1.0) -> ConvexFlux:
    return ConvexFlux(
        F=lambda u: scale * np.asarray(u, dtype=float) ** 4,
        Fprime=lambda u: 4.0 * scale * np.asarray(u, dtype=float) ** 3,
        p_domain=(-2.0, 2.0),
    )


def lwr_flux(vmax: float = 1.0) -> ConvexFlux:
    """Traffic flux in the convex u = -q variables: F(u) = vmax * u * (1 + u)."""
    return ConvexFlux(
        F=lambda u: vmax * np.asarray(u, dtype=float) * (1.0 + np.asarray(u, dtype=float)),
        Fprime=lambda u: vmax * (1.0 + 2.0 * np.asarray(u, dtype=float)),
        p_domain=(-1.5, 0.5),
    )


def tabulated_flux(p: Sequence[float], F: Sequence[float]) -> ConvexFlux:
    """Piecewise-linear convex flux from a table; F' is piecewise constant."""
    pa = np.asarray(p, dtype=float)
    Fa = np.asarray(F, dtype=float)
    if pa.size < 2 or pa.size != Fa.size or not np.all(np.diff(pa) > 0):
        raise ValueError("need increasing p with matching F values")
    slopes = np.diff(Fa) / np.diff(pa)
    if not np.all(np.diff(slopes) >= -1e-12):
        raise ValueError("tabulated flux is not convex (slopes must be nondecreasing)")

    def fval(u):
        return np.interp(np.asarray(u, dtype=float), pa, Fa)

    def fprime(u):
        idx = np.clip(np.searchsorted(pa, np.asarray(u, dtype=float), side="right") - 1,
                      0, slopes.size - 1)
        return slopes[idx]

    return ConvexFlux(F=fval, Fprime=fprime, p_domain=(float(pa[0]), float(pa[-1])),
                      smoothness_hints=tuple(pa[1:-1].tolist()))


_FLUX_BUILDERS = {
    "quadratic": lambda d: quadratic_flux(float(d.get("scale", 0.5))),
    "quartic": lambda d: quartic_flux(float(d.get("scale", 1.0))),
    "lwr": lambda d: lwr_flux(float(d.get("vmax", 1.0))),
    "tabulated": lambda d: tabulated_flux(d["p"], d["F"]),
}


# -- initial conditions --------------------------------------------------------


def _step_function(breakpoints: Sequence[float], values: Sequence[float]) -> Callable:
    bpa = np.asarray(breakpoints, dtype=float)
    va = np.asarray(values, dtype=float)

    def f(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(bpa, x, side="right") - 1, 0, va.size - 1)
        return va[idx]

    return f


def _box_g(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0.0) & (x < 1.0), 1.0, 0.0)


_SINE_DOMAIN = (-4.0, 8.0)


def _sine_g(x):
    return 1.0 + np.sin(np.pi * np.asarray(x, dtype=float))


def _sine_G(x):
    """Exact antiderivative of 1 + sin(pi x), vanishing at the stored domain's left end."""
    x = np.asarray(x, dtype=float)
    lo = _SINE_DOMAIN[0]
    return (x - lo) + (np.cos(np.pi * lo) - np.cos(np.pi * x)) / np.pi


def _nwave_g(x):
    x = np.asarray(x, dtype=float)
    expr = (np.cos(x) + 1.0) * (2.0 * np.sin(3.0 * x) + np.cos(2.0 * x) + 0.2)
    return np.where((x >= -np.pi) & (x <= np.pi), expr, 0.0)


def _wiggly_g(x):
    x = np.asarray(x, dtype=float)
    expr = np.sin(x) ** 2 + np.sin(x ** 2)
    return np.where((x >= 0.0) & (x <= 14.0), expr, 0.0)


def _lwr_u0(x):
    x = np.asarray(x, dtype=float)
    q = 0.2 + 0.8 * np.exp(-((x - 1.0 / 3.0) ** 2) / 20.0)
    return np.where((x >= -30.0) & (x <= 30.0), -q, -0.2)


# -- analytic references -------------------------------------------------------


def burgers_box_analytic(x: float, t: float) -> float:
    """Shock + rarefaction solution of Burgers with the unit box data."""
    if t <= 0:
        return float(_box_g(np.asarray(x)))
    shock = 1.0 + 0.5 * t if t <= 2.0 else np.sqrt(2.0 * t)
    if x <= 0.0:
        return 0.0
    if t <= 2.0:
        if x < t:
            return x / t
        if x < shock:
            return 1.0
        return 0.0
    if x < shock:
        return x / t
    return 0.0


def _burgers_box_shocks(t: float) -> list:
    return [1.0 + 0.5 * t] if t <= 2.0 else [float(np.sqrt(2.0 * t))]


def _burgers_sine_shocks(t: float) -> list:
    """Shocks of the 1 + sin(pi x) problem inside the reporting window.

    In the frame y = x - t the data sin(pi y) is odd about y = 1 and y = 3,
    so once characteristics cross (t = 1/pi) the shocks are pinned there:
    x = t + 1 and x = t + 3, with equal-and-opposite states across each.
    """
    if t <= 1.0 / np.pi:
        return []
    return [t + 1.0, t + 3.0]


def sine_characteristic_oracle(x: float, t: float, n_grid: int = 8001) -> tuple[float, float]:
    """Traditional method of characteristics for the sinusoidal Burgers problem.

    Finds every root of u = g(x - u t) by a dense sign-change scan plus
    bisection (independent of the Chebyshev machinery), evaluates the cost
    with the exact closed-form antiderivative of g, and keeps the minimum
    with ties broken toward smaller u.  Returns (u, J).
    """
    if t <= 0:
        return float(_sine_g(np.asarray(x))), float(_sine_G(np.asarray(x)))
    ps = np.linspace(-0.2, 2.2, n_grid)
    phi = _sine_g(x - ps * t) - ps
    roots = []
    sign = np.sign(phi)
    for i in np.nonzero(sign[:-1] * sign[1:] <= 0)[0]:
        a, b = ps[i], ps[i + 1]
        fa = phi[i]
        for _ in range(100):
            m = 0.5 * (a + b)
            fm = float(_sine_g(x - m * t) - m)
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    if not roots:
        raise RuntimeError(f"oracle found no characteristic root at ({x}, {t})")
    roots = np.asarray(roots)
    costs = 0.5 * roots ** 2 * t + _sine_G(x - roots * t)
    jmin = float(np.min(costs))
    eligible = roots[costs <= jmin + 1e-12 * (1.0 + abs(jmin))]
    return float(np.min(eligible)), jmin


def sine_analytic(x: float, t: float) -> float:
    """Reference solution of the sinusoidal problem via the characteristic oracle."""
    return sine_characteristic_oracle(x, t)[0]


def sine_preshock_newton(x: float, t: float) -> float:
    """Safeguarded Newton on u = g(x - u t); valid before characteristics cross."""
    lo, hi = -0.2, 2.2
    u = float(_sine_g(np.asarray(x)))
    for _ in range(100):
        f = float(_sine_g(np.asarray(x - u * t))) - u
        if f > 0:
            lo = u
        else:
            hi = u
        df = -np.pi * np.cos(np.pi * (x - u * t)) * t - 1.0
        step = f / df
        u_new = u - step
        if not lo < u_new < hi:
            u_new = 0.5 * (lo + hi)
        if abs(u_new - u) < 1e-15 * (1.0 + abs(u)):
            u = u_new
            break
        u = u_new
    return u


# quadratic space-dependent problem: closed-form terminal-state candidates


@dataclass(frozen=True)
class TerminalCandidate:
    """Terminal state X with its branch tag and validity condition result."""

    X: float
    branch: str
    valid: bool


def quadratic_space_candidates(x: float, t: float) -> list[TerminalCandidate]:
    """All closed-form terminal states for the flux (u^2 - x^2)/2 at (x, t)."""
    ch = np.cosh(t)
    X1 = x / ch
    X2 = x / ch - np.tanh(t)
    return [
        TerminalCandidate(X=float(X1), branch="free_outer", valid=bool(X1 >= 0.0 or X1 <= -1.0)),
        TerminalCandidate(X=float(X2), branch="free_inner", valid=bool(-1.0 < X2 < 0.0)),
        TerminalCandidate(X=0.0, branch="pinned_right", valid=True),
        TerminalCandidate(X=-1.0, branch="pinned_left", valid=True),
    ]


def _ex6_g(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= -1.0) & (x < 0.0), 1.0, 0.0)


def _ex6_G(x):
    return np.clip(np.asarray(x, dtype=float) + 1.0, 0.0, 1.0)


def _ex6_cost(x: float, t: float, X: float) -> float:
    return float(
        0.5 * (x * x + X * X) / np.tanh(t) - x * X / np.sinh(t) + _ex6_G(np.asarray(X))
    )


def _ex6_trajectory_constant(x: float, t: float, X: float) -> float:
    return (X - x * np.exp(-t)) / (np.exp(t) - np.exp(-t))


def _ex6_p0(x: float, t: float, X: float) -> float:
    return x - 2.0 * _ex6_trajectory_constant(x, t, X)


def quadratic_space_analytic(x: float, t: float) -> float:
    """Minimum-value solution from the closed-form candidates and cost."""
    if t <= 0:
        return float(_ex6_g(np.asarray(x)))
    seen = set()
    best = None
    for cand in quadratic_space_candidates(x, t):
        if not cand.valid:
            continue
        key = round(cand.X, 12)
        if key in seen:
            continue
        seen.add(key)
        J = _ex6_cost(x, t, cand.X)
        p0 = _ex6_p0(x, t, cand.X)
        if best is None or J < best[0] - 1e-12 * (1.0 + abs(J)) or (
            abs(J - best[0]) <= 1e-12 * (1.0 + abs(J)) and p0 < best[1]
        ):
            best = (J, p0)
    return best[1]


def quadratic_space_enumerator(x: float, t: float) -> list[BvpCandidate]:
    """BVP candidates seeded with the exact trajectories of the linear dynamics."""
    out = []
    seen = set()
    for cand in quadratic_space_candidates(x, t):
        if not cand.valid:
            continue
        key = round(cand.X, 12)
        if key in seen:
            continue
        seen.add(key)
        C = _ex6_trajectory_constant(x, t, cand.X)

        def x_guess(r, C=C):
            r = np.asarray(r, dtype=float)
            return (x - C) * np.exp(-r) + C * np.exp(r)

        def p_guess(r, C=C):
            r = np.asarray(r, dtype=float)
            return (x - C) * np.exp(-r) - C * np.exp(r)

        terminal = "free" if cand.branch.startswith("free") else cand.X
        out.append(BvpCandidate(terminal=terminal, x_guess=x_guess, p_guess=p_guess,
                                label=cand.branch))
    return out


# exponential space-dependent problem


def _ex7_g(x):
    return -np.exp(-10.0 * np.asarray(x, dtype=float)) / 10.0


def _ex7_G(x):
    return (np.exp(-10.0 * np.asarray(x, dtype=float)) - 1.0) / 100.0


def exp_space_analytic(x: float, t: float) -> float:
    return float(-np.exp(-10.0 * x) / (1.0 + 9.0 * np.exp(-10.0 * t)))


def exp_space_enumerator(x: float, t: float) -> list[BvpCandidate]:
    """Single free candidate; the problem has a unique trajectory per point."""
    g0 = float(_ex7_g(np.asarray(x)))

    def x_guess(r):
        return np.full_like(np.asarray(r, dtype=float), float(x))

    def p_guess(r):
        return np.full_like(np.asarray(r, dtype=float), g0)

    return [BvpCandidate(terminal="free", x_guess=x_guess, p_guess=p_guess, label="unique")]


# -- the catalog ---------------------------------------------------------------


@lru_cache(maxsize=1)
def catalog() -> tuple[ProblemSpec, ...]:
    """The seven benchmark problems, fully constructed."""
    burgers = quadratic_flux(0.5)

    box_init = InitialData.from_function(_box_g, (-1.0, 3.0), breakpoints=(0.0, 1.0))
    sine_init = InitialData.from_function(_sine_g, _SINE_DOMAIN)
    nwave_init = InitialData.from_function(_nwave_g, (-8.0, 8.0), breakpoints=(-np.pi, np.pi))
    wiggly_init = InitialData.from_function(_wiggly_g, (-1.0, 15.0), breakpoints=(0.0, 14.0))
    lwr_init = InitialData.from_function(_lwr_u0, (-30.0, 30.0))
    ex6_init = InitialData.from_function(_ex6_g, (-3.0, 3.0), breakpoints=(-1.0, 0.0))
    ex7_init = InitialData.from_function(_ex7_g, (-1.0, 2.0))

    ex6_control = ControlProblem(
        hamiltonian=lambda x, p, a: p * a + 0.5 * (x ** 2 + a ** 2),
        dH_dx=lambda x, p, a: x + 0.0 * a,
        alpha_star=lambda x, p: -p + 0.0 * x,
        lagrangian=lambda x, a: 0.5 * (x ** 2 + a ** 2),
        terminal_g=_ex6_g,
        terminal_G=_ex6_G,
        terminal_discontinuities=(-1.0, 0.0),
    )
    ex7_control = ControlProblem(
        hamiltonian=lambda x, p, a: p * a + 0.25 * np.exp(-10.0 * x) * (a + 1.0) ** 2,
        dH_dx=lambda x, p, a: -2.5 * np.exp(-10.0 * x) * (a + 1.0) ** 2,
        alpha_star=lambda x, p: -1.0 - 2.0 * p * np.exp(10.0 * x),
        lagrangian=lambda x, a: 0.25 * np.exp(-10.0 * x) * (a + 1.0) ** 2,
        terminal_g=_ex7_g,
        terminal_G=_ex7_G,
    )

    return (
        ProblemSpec(
            name="burgers_box",
            kind="space_independent",
            init=box_init,
            flux=burgers,
            analytic=burgers_box_analytic,
            domain_xt=((-1.0, 3.0), (0.1, 4.0)),
            shock_loci=_burgers_box_shocks,
            notes="unit box data: rarefaction fan plus a shock changing speed at t=2",
            flux_descriptor={"kind": "quadratic", "scale": 0.5},
            init_descriptor={
                "kind": "piecewise_constant",
                "breakpoints": [-1.0, 0.0, 1.0, 3.0],
                "values": [0.0, 1.0, 0.0],
            },
        ),
        ProblemSpec(
            name="burgers_sine",
            kind="space_independent",
            init=sine_init,
            flux=burgers,
            analytic=sine_analytic,
            domain_xt=((0.0, 4.0), (0.1, 0.8)),
            shock_loci=_burgers_sine_shocks,
            notes="smooth 1 + sin(pi x) data; shock forms at t = 1/pi",
            flux_descriptor={"kind": "quadratic", "scale": 0.5},
        ),
        ProblemSpec(
            name="burgers_nwave",
            kind="space_independent",
            init=nwave_init,
            flux=burgers,
            domain_xt=((-8.0, 8.0), (0.1, 1.0)),
            fv_config={"lo": -8.0, "hi": 8.0, "ncells": 1000, "t_end": 1.0},
            notes="compactly supported N-wave decay data",
            flux_descriptor={"kind": "quadratic", "scale": 0.5},
        ),
        ProblemSpec(
            name="burgers_wiggly",
            kind="space_independent",
            init=wiggly_init,
            flux=burgers,
            domain_xt=((0.0, 14.0), (0.1, 1.5)),
            notes="oscillatory data developing many shocks; no reference solution",
            flux_descriptor={"kind": "quadratic", "scale": 0.5},
        ),
        ProblemSpec(
            name="lwr_traffic",
            kind="space_independent",
            init=lwr_init,
            flux=lwr_flux(1.0),
            domain_xt=((-30.0, 30.0), (0.1, 4.0)),
            transform=ReportTransform(column="q", scale=-1.0),
            fv_config={"lo": -30.0, "hi": 30.0, "ncells": 500, "t_end": 4.0},
            notes="traffic density solved in the convex variables u = -q",
            flux_descriptor={"kind": "lwr", "vmax": 1.0},
        ),
        ProblemSpec(
            name="quadratic_space",
            kind="space_dependent",
            init=ex6_init,
            control=ex6_control,
            enumerator=quadratic_space_enumerator,
            analytic=quadratic_space_analytic,
            domain_xt=((-3.0, 3.0), (0.1, 1.8)),
            notes="flux (u^2 - x^2)/2; candidates enumerable in closed form",
        ),
        ProblemSpec(
            name="exp_space",
            kind="space_dependent",
            init=ex7_init,
            control=ex7_control,
            enumerator=exp_space_enumerator,
            analytic=exp_space_analytic,
            domain_xt=((0.0, 1.0), (0.1, 0.6)),
            notes="flux (1 + u/a)u with a = exp(-10x); smooth, shock-free",
        ),
    )


def get_problem(name: str) -> ProblemSpec:
    for spec in catalog():
        if spec.name == name:
            return spec
    raise KeyError(f"unknown problem {name!r}; available: "
                   + ", ".join(s.name for s in catalog()))


# -- error measurement ---------------------------------------------------------


def analytic_error(
    spec: ProblemSpec,
    u_fn: Callable,
    xs: Sequence[float],
    ts: Sequence[float],
    shock_exclusion_radius: float = 1e-9,
) -> ErrorReport:
    """Max/mean absolute deviation of u_fn from the analytic solution.

    Grid points within shock_exclusion_radius of a known shock locus are
    skipped (the solution value on the jump set is not meaningful).
    """
    if spec.analytic is None:
        raise ValueError(f"problem {spec.name} has no analytic solution")
    errs = []
    excluded = 0
    for t in ts:
        shocks = spec.shock_loci(float(t)) if spec.shock_loci else []
        for x in xs:
            if any(abs(x - s) < shock_exclusion_radius for s in shocks):
                excluded += 1
                continue
            errs.append(abs(u_fn(float(x), float(t)) - spec.analytic(float(x), float(t))))
    errs = np.asarray(errs)
    return ErrorReport(
        max_abs=float(np.max(errs)) if errs.size else 0.0,
        l1=float(np.mean(errs)) if errs.size else 0.0,
        excluded_points=excluded,
        n_points=len(list(xs)) * len(list(ts)),
    )


# -- JSON problem documents ----------------------------------------------------


def problem_to_json(spec: ProblemSpec) -> dict:
    """Serializable document for a space-independent problem.

    Known flux families keep their parameters; initial data is emitted as
    piecewise constants when exact, otherwise as the raw Chebyshev pieces.
    """
    if spec.kind != "space_independent":
        raise ValueError("space-dependent problems are defined in code, not JSON")
    if spec.flux_descriptor is None:
        raise ValueError(f"problem {spec.name} has no serializable flux")
    init = spec.init_descriptor
    if init is None:
        init = {
            "kind": "chebyshev_pieces",
            "breakpoints": spec.init.g.breakpoints.tolist(),
            "coefficients": [c.tolist() for c in spec.init.g.pieces],
            "structural_breaks": list(spec.init.structural_breaks),
        }
    doc = {
        "name": spec.name,
        "flux": spec.flux_descriptor,
        "init": init,
        "domain_xt": [list(spec.domain_xt[0]), list(spec.domain_xt[1])],
    }
    if spec.transform is not None:
        doc["transform"] = {"column": spec.transform.column, "scale": spec.transform.scale}
    return doc


def problem_from_json(doc: dict | str) -> ProblemSpec:
    """Rebuild a ProblemSpec from a JSON document (or a path to one)."""
    if isinstance(doc, str):
        with open(doc) as fh:
            doc = json.load(fh)
    flux_desc = doc["flux"]
    try:
        flux = _FLUX_BUILDERS[flux_desc["kind"]](flux_desc)
    except KeyError as exc:
        raise ValueError(f"unknown flux kind {flux_desc.get('kind')!r}") from exc

    init_desc = doc["init"]
    if init_desc["kind"] == "piecewise_constant":
        bps = [float(b) for b in init_desc["breakpoints"]]
        vals = [float(v) for v in init_desc["values"]]
        if len(vals) != len(bps) - 1:
            raise ValueError("piecewise_constant needs one value per interval")
        init = InitialData.from_function(
            _step_function(bps, vals), (bps[0], bps[-1]), breakpoints=bps[1:-1]
        )
    elif init_desc["kind"] == "chebyshev_pieces":
        g = pw.PiecewiseFunction(
            np.asarray(init_desc["breakpoints"], dtype=float),
            tuple(np.asarray(c, dtype=float) for c in init_desc["coefficients"]),
        )
        scale = max(abs(v) for v in pw.prange(g)) or 1.0
        structural = init_desc.get(
            "structural_breaks", [g.breakpoints[0], g.breakpoints[-1]]
        )
        init = InitialData(
            g=g,
            G=pw.antiderivative(g),
            discontinuities=tuple(pw.jumps(g, 1e-9 * scale).tolist()),
            structural_breaks=tuple(float(b) for b in structural),
        )
    else:
        raise ValueError(f"unknown init kind {init_desc.get('kind')!r}")

    transform = None
    if "transform" in doc:
        transform = ReportTransform(column=doc["transform"]["column"],
                                    scale=float(doc["transform"]["scale"]))
    dxt = doc.get("domain_xt", [[-1.0, 1.0], [0.0, 1.0]])
    return ProblemSpec(
        name=doc.get("name", "custom"),
        kind="space_independent",
        init=init,
        flux=flux,
        domain_xt=((float(dxt[0][0]), float(dxt[0][1])), (float(dxt[1][0]), float(dxt[1][1]))),
        transform=transform,
        flux_descriptor=flux_desc,
        init_descriptor=init_desc if init_desc["kind"] == "piecewise_constant" else None,
    )
