"""Convex duality utilities for flux functions.

The Legendre-Fenchel transform F*(q) = max_p {pq - F(p)} is computed by
approximating the objective with the piecewise Chebyshev engine and taking
its global maximum.  For superlinear convex F the maximizer is interior to
a large enough interval, so the search window is widened whenever the
maximum lands on an endpoint.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from . import piecewise as pw


@dataclass(frozen=True)
class ConvexFlux:
    """A space-independent convex flux F with derivative F'.

    p_domain is the default costate search interval for duality operations;
    smoothness_hints mark points where F' has a kink, so piecewise
    approximations of F' split there.
    """

    F: Callable
    Fprime: Callable
    p_domain: tuple[float, float]
    smoothness_hints: tuple = ()

    def __post_init__(self):
        lo, hi = self.p_domain
        if not lo < hi:
            raise ValueError("p_domain must satisfy lo < hi")
        object.__setattr__(
            self, "smoothness_hints", tuple(float(h) for h in self.smoothness_hints)
        )

    def validate(self, n: int = 200, seed: int = 0, tol: float = 1e-10) -> None:
        """Sampled convexity, monotonicity and F/F' consistency checks."""
        rng = np.random.default_rng(seed)
        lo, hi = self.p_domain
        ps = np.sort(rng.uniform(lo, hi, size=(n, 2)), axis=1)
        f_lo, f_hi = self.F(ps[:, 0]), self.F(ps[:, 1])
        f_mid = self.F(0.5 * (ps[:, 0] + ps[:, 1]))
        if not np.all(f_mid <= 0.5 * (f_lo + f_hi) + tol * (1 + np.abs(f_lo) + np.abs(f_hi))):
            raise ValueError("F is not midpoint-convex on p_domain")
        qs = np.sort(rng.uniform(lo, hi, size=n))
        dps = self.Fprime(qs)
        if not np.all(np.diff(dps) >= -tol * (1 + np.max(np.abs(dps)))):
            raise ValueError("F' is not non-decreasing on p_domain")
        h = 1e-6 * (hi - lo)
        interior = qs[(qs > lo + h) & (qs < hi - h)]
        away = interior[
            np.min(
                np.abs(interior[:, None] - np.asarray(self.smoothness_hints)[None, :]),
                axis=1,
            )
            > 10 * h
        ] if self.smoothness_hints else interior
        if away.size:
            fd = (self.F(away + h) - self.F(away - h)) / (2 * h)
            if np.max(np.abs(fd - self.Fprime(away))) > 1e-6 * (1 + np.max(np.abs(fd))):
                raise ValueError("F' inconsistent with finite differences of F")


def _argmax_of_pf(pf: pw.PiecewiseFunction) -> tuple[float, float]:
    """(location, value) of the global maximum of a piecewise representation."""
    best_x, best_v = pf.domain[0], -np.inf
    for i, c in enumerate(pf.pieces):
        a, b = pf.breakpoints[i], pf.breakpoints[i + 1]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        crit = [-1.0, 1.0]
        if c.size > 2:
            crit.extend(np.clip(pw._roots_of_coeffs(np.asarray(C.chebder(c))), -1, 1).tolist())
        for r in crit:
            v = float(C.chebval(r, c))
            if v > best_v:
                best_v, best_x = v, mid + half * r
    return best_x, best_v


def legendre_transform(
    F: Callable,
    q: float,
    search: Sequence[float],
    hints: Iterable[float] = (),
    rel_tol: float = 1e-12,
    max_widen: int = 3,
) -> float:
    """F*(q) = max_p {pq - F(p)} over the search interval.

    If the maximizer lands on an interval endpoint the window is doubled
    about its center (up to max_widen times); if it still does, a warning
    is issued since the true supremum may be truncated.
    """
    lo, hi = float(search[0]), float(search[-1])
    for attempt in range(max_widen + 1):
        pf = pw.approximate(
            lambda p: p * q - F(np.asarray(p, dtype=float)), [lo, hi],
            breakpoints_hint=[h for h in hints if lo < h < hi], rel_tol=rel_tol,
        )
        pstar, value = _argmax_of_pf(pf)
        margin = 1e-9 * (hi - lo)
        if lo + margin < pstar < hi - margin:
            return value
        if attempt == max_widen:
            warnings.warn(
                f"Legendre transform maximizer at search endpoint p={pstar:.6g}; "
                "value may truncate the true supremum",
                RuntimeWarning,
            )
            return value
        mid, w = 0.5 * (lo + hi), hi - lo
        lo, hi = mid - w, mid + w
    raise AssertionError("unreachable")


def flux_transform(flux: ConvexFlux, q: float, **kw) -> float:
    """Legendre transform of a ConvexFlux at q, searching p_domain widened by 50%."""
    lo, hi = flux.p_domain
    mid, w = 0.5 * (lo + hi), hi - lo
    return legendre_transform(
        flux.F, q, (mid - 0.75 * w, mid + 0.75 * w), hints=flux.smoothness_hints, **kw
    )


def lagrangian_along_optimal(flux: ConvexFlux, p) -> float:
    """Running cost along the optimal control: L(-F'(p)) = p F'(p) - F(p)."""
    p = np.asarray(p, dtype=float)
    out = p * flux.Fprime(p) - flux.F(p)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DualityReport:
    """Result of a double-transform validation sweep."""

    max_deviation: float
    n_samples: int
    sample_points: np.ndarray


def _golden_max(f: Callable, lo: float, hi: float, iters: int = 90) -> float:
    """Golden-section maximum of a unimodal scalar function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(fc, fd)


def check_duality(flux: ConvexFlux, samples: int = 40) -> DualityReport:
    """Max sampled deviation |F(p) - (F*)*(p)| over the interior of p_domain.

    Both transforms are nested golden-section maximizations: the objectives
    p q - F(p) and p q - F*(q) are concave in the optimization variable for
    convex F, so the maximization is unimodal, pointwise-exact and free of
    representation noise.  The inner q window covers F' over p_domain, which
    brackets the back-transform's maximizer q = F'(p) for interior p.
    """
    lo, hi = flux.p_domain
    w = hi - lo
    plo, phi = lo - 0.05 * w, hi + 0.05 * w
    qlo, qhi = float(flux.Fprime(np.asarray(plo))), float(flux.Fprime(np.asarray(phi)))
    qpad = 0.02 * max(qhi - qlo, 1e-6)
    qlo, qhi = qlo - qpad, qhi + qpad

    def fstar(q: float) -> float:
        return _golden_max(lambda r: r * q - float(flux.F(np.asarray(r))), plo, phi)

    ps = np.linspace(lo + 0.05 * w, hi - 0.05 * w, samples)
    dev = 0.0
    for p in ps:
        back = _golden_max(lambda q: p * q - fstar(q), qlo, qhi)
        dev = max(dev, abs(back - float(flux.F(np.asarray(p)))))
    return DualityReport(max_deviation=dev, n_samples=samples, sample_points=ps)
