"""Causality-free pointwise entropy solutions for convex space-independent flux.

For a query point (x, t) the costate candidates are the solutions p of the
characteristic algebraic equations

    p = g(x - F'(p) t)        (smooth characteristics)
    a_k = x - F'(p) t         (characteristics emanating from a jump of g)

found by piecewise Chebyshev rootfinding.  The entropy solution is the
candidate whose optimal-control cost

    J(p) = (p F'(p) - F(p)) t + G(x - F'(p) t)

is smallest; no grid, no neighbouring values, no Rankine-Hugoniot input.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import piecewise as pw
from .duality import ConvexFlux

WORKERS_ENV_VAR = "ENTROPOINT_WORKERS"


class NoCandidatesError(RuntimeError):
    """No characteristic reaches the query point.

    Cannot occur for a valid convex problem; indicates a domain or setup bug.
    """


@dataclass(frozen=True)
class InitialData:
    """Initial condition g, its continuous antiderivative G, and the jump set.

    Outside the stored domain g extends by its endpoint values and G extends
    linearly with those slopes, realizing constant far-field data.
    structural_breaks are the semantically meaningful breakpoints of g
    (user-supplied kinks/jumps plus the domain endpoints); characteristic
    compositions are non-smooth exactly where they are crossed.
    """

    g: pw.PiecewiseFunction
    G: pw.PiecewiseFunction
    discontinuities: tuple
    structural_breaks: tuple

    @classmethod
    def from_function(
        cls,
        f: Callable,
        domain: Sequence[float],
        breakpoints: Iterable[float] = (),
        rel_tol: float = pw.DEFAULT_REL_TOL,
        jump_rel_threshold: float = 1e-9,
    ) -> "InitialData":
        g = pw.approximate(f, domain, breakpoints_hint=breakpoints, rel_tol=rel_tol)
        G = pw.antiderivative(g)
        scale = max(abs(pw.prange(g)[0]), abs(pw.prange(g)[1]), 1.0)
        disc = tuple(pw.jumps(g, jump_rel_threshold * scale).tolist())
        lo, hi = g.domain
        structural = tuple(sorted({lo, hi, *(float(b) for b in breakpoints if lo <= b <= hi)}))
        return cls(g=g, G=G, discontinuities=disc, structural_breaks=structural)

    def g_at(self, x):
        """g with constant extension outside the domain."""
        return pw.evaluate_clamped(self.g, x)

    def G_at(self, x):
        """G with linear extension (slope = g endpoint values) outside the domain."""
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        lo, hi = self.g.domain
        out = pw.evaluate_clamped(self.G, xs)
        g_lo = float(np.polynomial.chebyshev.chebval(-1.0, self.g.pieces[0]))
        g_hi = float(np.polynomial.chebyshev.chebval(1.0, self.g.pieces[-1]))
        out = out + np.where(xs < lo, g_lo * (xs - lo), 0.0)
        out = out + np.where(xs > hi, g_hi * (xs - hi), 0.0)
        return float(out[0]) if scalar else out

    def value_range(self) -> tuple[float, float]:
        return pw.prange(self.g)


@dataclass(frozen=True)
class SolutionSample:
    """Entropy solution value and minimal cost at one space-time point."""

    x: float
    t: float
    u: float
    J: float
    candidate_count: int


class EntropySolver:
    """Pointwise solver for u_t + F(u)_x = 0, u(x, 0) = g.

    Immutable after construction; every query is independent, so concurrent
    calls and grid sweeps are safe and deterministic.
    """

    def __init__(
        self,
        flux: ConvexFlux,
        init: InitialData,
        rel_tol: float = pw.DEFAULT_REL_TOL,
        root_tol: float = pw.DEFAULT_ROOT_TOL,
    ):
        self.flux = flux
        self.init = init
        self.rel_tol = rel_tol
        self.root_tol = root_tol
        glo, ghi = init.value_range()
        pts = [glo, ghi, *flux.smoothness_hints]
        self._base_lo, self._base_hi = min(pts), max(pts)
        if self._base_hi - self._base_lo < 1e-12 * (1.0 + abs(self._base_hi)):
            pad = 0.5 * (1.0 + abs(self._base_hi))
            self._base_lo -= pad
            self._base_hi += pad
            self._degenerate_value = glo
        else:
            self._degenerate_value = None
        self._fp_cache: dict = {}
        self._fp_cache[(self._base_lo, self._base_hi)] = self._build_fp(
            self._base_lo, self._base_hi
        )

    # -- F' machinery -----------------------------------------------------

    def _build_fp(self, lo: float, hi: float) -> pw.PiecewiseFunction:
        hints = [h for h in self.flux.smoothness_hints if lo < h < hi]
        return pw.approximate(self.flux.Fprime, [lo, hi], breakpoints_hint=hints,
                              rel_tol=self.rel_tol)

    def _widened_bracket(self, smin: float, smax: float) -> tuple[float, float]:
        """Smallest bracket from the doubling ladder with F'(lo) <= smin <= smax <= F'(hi).

        The ladder always starts at the base window, so the bracket chosen for
        a query never depends on which queries ran before it.  Widening stops
        once F' stagnates (a saturated derivative never brackets new slopes).
        """
        lo, hi = self._base_lo, self._base_hi
        w = hi - lo
        prev = np.inf
        for _ in range(60):
            val = float(self.flux.Fprime(np.asarray(lo)))
            if val <= smin or val >= prev:
                break
            prev = val
            lo -= w
            w *= 2.0
        w = hi - lo
        prev = -np.inf
        for _ in range(60):
            val = float(self.flux.Fprime(np.asarray(hi)))
            if val >= smax or val <= prev:
                break
            prev = val
            hi += w
            w *= 2.0
        return lo, hi

    def _fp_covering(self, slopes: np.ndarray) -> pw.PiecewiseFunction:
        """A representation of F' whose domain brackets all target slopes.

        Brackets come from a deterministic quantized ladder, so the same
        query always sees the same representation; the cache only avoids
        rebuilding it (idempotent under concurrent misses).
        """
        if slopes.size:
            lo, hi = self._widened_bracket(float(np.min(slopes)), float(np.max(slopes)))
        else:
            lo, hi = self._base_lo, self._base_hi
        pf = self._fp_cache.get((lo, hi))
        if pf is None:
            pf = self._build_fp(lo, hi)
            self._fp_cache[(lo, hi)] = pf
        return pf

    # -- Algorithm steps ---------------------------------------------------

    def candidate_costates(self, x: float, t: float) -> np.ndarray:
        """All costate candidates from the characteristic equations at (x, t)."""
        if t <= 0:
            raise ValueError("candidate enumeration requires t > 0")
        if self._degenerate_value is not None and not self.init.discontinuities:
            return np.array([self._degenerate_value])

        breaks = np.asarray(self.init.structural_breaks)
        slopes = (x - breaks) / t
        fp = self._fp_covering(slopes)

        disc = set(self.init.discontinuities)
        from_jumps: list[float] = []
        kink_hints: list[float] = []
        for b, s in zip(breaks, slopes):
            hb = pw.affine(fp, t, float(b) - x)
            rr = pw.roots(hb, self.root_tol)
            kink_hints.extend(rr.tolist())
            if b in disc:
                from_jumps.extend(rr.tolist())
                from_jumps.extend(self._flat_segment_candidates(hb))

        hlo = min([self._base_lo, *kink_hints])
        hhi = max([self._base_hi, *kink_hints])
        pad = self.root_tol * (1.0 + abs(hlo) + abs(hhi))
        hints = [h for h in set(kink_hints) | set(self.flux.smoothness_hints)
                 if hlo + pad < h < hhi - pad]

        h = pw.approximate(
            lambda p: self.init.g_at(x - t * self.flux.Fprime(np.asarray(p, dtype=float))) - p,
            [hlo, hhi], breakpoints_hint=hints, rel_tol=self.rel_tol,
        )
        cands = np.concatenate([pw.roots(h, self.root_tol), np.asarray(from_jumps)])
        if cands.size == 0:
            raise NoCandidatesError(f"no characteristic reaches ({x}, {t})")
        cands = np.sort(cands)
        keep = [cands[0]]
        for c in cands[1:]:
            if c - keep[-1] > self.root_tol:
                keep.append(c)
        return np.asarray(keep)

    def _flat_segment_candidates(self, hb: pw.PiecewiseFunction) -> list:
        """Pieces where a_k - x + t F' vanishes identically.

        A flat stretch of F' can make a whole costate interval characteristic;
        its endpoints and midpoint stand in for the continuum.
        """
        scale = pw.vscale(hb)
        out: list[float] = []
        for i, c in enumerate(hb.pieces):
            if np.max(np.abs(c)) <= 1e-13 * max(scale, 1e-300):
                a, b = float(hb.breakpoints[i]), float(hb.breakpoints[i + 1])
                out.extend((a, 0.5 * (a + b), b))
        return out

    def cost(self, p, x: float, t: float):
        """Optimal-control cost J(p) = (p F'(p) - F(p)) t + G(x - F'(p) t)."""
        parr = np.asarray(p, dtype=float)
        fp = self.flux.Fprime(parr)
        out = (parr * fp - self.flux.F(parr)) * t + self.init.G_at(x - fp * t)
        return float(out) if out.ndim == 0 else out

    def solve_point(self, x: float, t: float) -> SolutionSample:
        """Entropy solution and minimal cost at (x, t); u(x, 0) = g(x)."""
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t == 0:
            return SolutionSample(x=float(x), t=0.0, u=float(self.init.g_at(x)),
                                  J=float(self.init.G_at(x)), candidate_count=0)
        cands = self.candidate_costates(x, t)
        costs = self.cost(cands, x, t)
        # candidates are sorted, so argmin's first occurrence breaks exact
        # cost ties toward the smaller p
        idx = int(np.argmin(costs))
        return SolutionSample(x=float(x), t=float(t), u=float(cands[idx]),
                              J=float(costs[idx]), candidate_count=int(cands.size))

    def solve_grid(
        self,
        xs: Sequence[float],
        ts: Sequence[float],
        parallel: bool = False,
        max_workers: int | None = None,
    ) -> list[SolutionSample]:
        """Independent solve_point at every (x, t), row-major over t then x.

        Output is identical element-wise whatever the parallel flag or worker
        count; results are assembled in index order after all queries finish.
        """
        points = [(float(x), float(t)) for t in ts for x in xs]
        if not points:
            return []
        if not parallel:
            return [self.solve_point(x, t) for x, t in points]
        if max_workers is None:
            max_workers = int(os.environ.get(WORKERS_ENV_VAR, os.cpu_count() or 1))
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as ex:
            return list(ex.map(lambda xt: self.solve_point(*xt), points))

    # -- Brute-force oracle -------------------------------------------------

    def hopf_lax_oracle(
        self,
        x: float,
        t: float,
        ny: int = 100_000,
        y_range: Sequence[float] | None = None,
    ) -> tuple[float, float]:
        """(w, u) from direct minimization of t L((y-x)/t) + G(y) over a y grid.

        L is evaluated from raw convex analysis (bisection of F'(p) = -alpha),
        never from the characteristic equations, so this is an independent
        check of solve_point.  The grid argmin gets a golden-section polish
        within its bracket; u is reconstructed through the gradient form
        u = (F')^{-1}((x - y*)/t), valid for strictly convex flux.
        """
        if t <= 0:
            raise ValueError("oracle requires t > 0")
        if y_range is None:
            blo, bhi = self._base_lo, self._base_hi
            m = max(abs(float(self.flux.Fprime(np.asarray(blo)))),
                    abs(float(self.flux.Fprime(np.asarray(bhi)))))
            margin = 1.0 + 0.5 * m * t
            y_range = (x - m * t - margin, x + m * t + margin)
        ys = np.linspace(float(y_range[0]), float(y_range[1]), ny)
        alphas = (ys - x) / t
        lvals = self._lagrangian_values(alphas)
        phi = t * lvals + self.init.G_at(ys)
        i0 = int(np.argmin(phi))

        def phi_scalar(y: float) -> float:
            a = np.asarray([(y - x) / t])
            return float(t * self._lagrangian_values(a)[0] + self.init.G_at(y))

        lo = ys[max(i0 - 2, 0)]
        hi = ys[min(i0 + 2, ny - 1)]
        ystar, w = _golden_min(phi_scalar, lo, hi)
        if phi[i0] < w:
            ystar, w = float(ys[i0]), float(phi[i0])
        u = self._invert_fprime((x - ystar) / t)
        return w, u

    def _lagrangian_values(self, alphas: np.ndarray) -> np.ndarray:
        """L(alpha) = -p*alpha - F(p) at the p solving F'(p) = -alpha (bisection)."""
        p = self._invert_fprime_array(-alphas)
        return -p * alphas - self.flux.F(p)

    def _invert_fprime(self, slope: float) -> float:
        return float(self._invert_fprime_array(np.asarray([slope]))[0])

    def _invert_fprime_array(self, slopes: np.ndarray) -> np.ndarray:
        """Monotone inversion of F' by bracketed bisection (strictly convex F)."""
        lo = np.full_like(slopes, self._base_lo)
        hi = np.full_like(slopes, self._base_hi)
        w = self._base_hi - self._base_lo
        prev = np.full_like(slopes, np.inf)
        for _ in range(60):
            val = self.flux.Fprime(lo)
            need = (val > slopes) & (val < prev)
            if not np.any(need):
                break
            prev = val
            lo = np.where(need, lo - w, lo)
            w *= 2.0
        w = self._base_hi - self._base_lo
        prev = np.full_like(slopes, -np.inf)
        for _ in range(60):
            val = self.flux.Fprime(hi)
            need = (val < slopes) & (val > prev)
            if not np.any(need):
                break
            prev = val
            hi = np.where(need, hi + w, hi)
            w *= 2.0
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            low = self.flux.Fprime(mid) < slopes
            lo = np.where(low, mid, lo)
            hi = np.where(low, hi, mid)
        return 0.5 * (lo + hi)


def _golden_min(f: Callable, lo: float, hi: float, iters: int = 120) -> tuple[float, float]:
    """Golden-section minimum of f on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        if b - a < 1e-14 * (1.0 + abs(a)):
            break
    if fc < fd:
        return c, fc
    return d, fd


# -- Profile reconstruction (driver-style utilities) -------------------------


def locate_jumps(
    u_of_x: Callable,
    lo: float,
    hi: float,
    n_scan: int = 400,
    rel_threshold: float = 0.05,
    refine_tol: float = 1e-11,
) -> list[tuple[float, float, float]]:
    """Bisect jump locations of a pointwise-evaluable profile.

    Scans n_scan points, flags neighbour gaps larger than rel_threshold times
    the profile's sampled span, and refines each by bisection on "is the
    midpoint value closer to the left or the right state".  Returns
    (location, left value, right value) triples; steep-but-continuous ramps
    are rejected by re-measuring the gap across a shrunk neighbourhood.
    """
    xs = np.linspace(lo, hi, n_scan)
    us = np.array([float(u_of_x(x)) for x in xs])
    span = float(np.max(us) - np.min(us))
    if span <= 0:
        return []
    thresh = rel_threshold * span
    out = []
    for i in np.nonzero(np.abs(np.diff(us)) > thresh)[0]:
        a, b = float(xs[i]), float(xs[i + 1])
        ua, ub = float(us[i]), float(us[i + 1])
        while b - a > refine_tol:
            m = 0.5 * (a + b)
            um = float(u_of_x(m))
            if abs(um - ua) <= abs(um - ub):
                a, ua = m, um
            else:
                b, ub = m, um
        loc = 0.5 * (a + b)
        delta = max(10 * refine_tol, 1e-9 * (1 + abs(loc)))
        ul = float(u_of_x(loc - delta))
        ur = float(u_of_x(loc + delta))
        if abs(ur - ul) > thresh:
            out.append((loc, ul, ur))
    return out


def reconstruct_profile(
    u_of_x: Callable,
    interval: Sequence[float],
    rel_tol: float = 1e-6,
    n_scan: int = 400,
    max_degree: int = 64,
    max_pieces: int = 128,
    max_extra_hints: int = 6,
) -> tuple[pw.PiecewiseFunction, list[tuple[float, float, float]]]:
    """Piecewise approximation of x -> u(x, t_fixed) with its jump set.

    Jumps are located first (pointwise bisection) and fed to the
    approximation as breakpoint hints; kinks such as rarefaction edges are
    handled by the engine's adaptive bisection.  If a piece still refuses to
    converge (a feature below the jump-scan threshold), the sharpest point
    inside it is bisected out and added as an extra hint.
    """
    lo, hi = float(interval[0]), float(interval[-1])
    jmp = locate_jumps(u_of_x, lo, hi, n_scan=n_scan)
    hints = [j[0] for j in jmp]
    for _ in range(max_extra_hints + 1):
        try:
            pf = pw.approximate(
                np.vectorize(u_of_x), [lo, hi],
                breakpoints_hint=hints,
                rel_tol=rel_tol, max_degree=max_degree, max_pieces=max_pieces,
            )
            return pf, jmp
        except pw.ApproximationError as exc:
            if exc.interval is None:
                raise
            hints.append(_sharpest_point(u_of_x, *exc.interval))
    raise pw.ApproximationError(
        f"profile on [{lo}, {hi}] still unresolved after {max_extra_hints} extra hints"
    )


def _sharpest_point(u_of_x: Callable, a: float, b: float) -> float:
    """Home in on the largest internal variation of u over [a, b] by bisection."""
    ua, ub = float(u_of_x(a)), float(u_of_x(b))
    while b - a > 1e-12 * (1.0 + abs(a) + abs(b)):
        m = 0.5 * (a + b)
        um = float(u_of_x(m))
        if abs(um - ua) >= abs(um - ub):
            b, ub = m, um
        else:
            a, ua = m, um
    return 0.5 * (a + b)
