"""Piecewise Chebyshev function engine.

Represents a real function on an interval as a list of Chebyshev series, one
per subinterval, split at user-supplied breakpoints (and, when adaptive
refinement stalls, at bisection points).  Pieces are sampled at Chebyshev
points of the first kind, which are strictly interior to each piece, so a
function may be discontinuous (or not evaluable) at the breakpoints
themselves: one-sided limits are recovered from the per-piece polynomials.

Supports evaluation, global rootfinding via colleague-matrix eigenvalues,
antiderivatives, derivatives, global extrema and jump detection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.fft import dct

DEFAULT_REL_TOL = 1e-13
DEFAULT_ROOT_TOL = 1e-12
DEFAULT_MAX_DEGREE = 2 ** 13
DEFAULT_MAX_PIECES = 64

# colleague-matrix eigensolves above this degree are subdivided instead
_MAX_EIG_DEGREE = 50
# reference-interval imaginary tolerance: |imag| <= 2e-10 means the mapped
# imaginary part is within 1e-10 of the piece width
_IMAG_TOL = 2e-10


class DomainError(ValueError):
    """Evaluation point outside the representation's domain."""


class ApproximationError(RuntimeError):
    """Adaptive approximation failed to converge.

    Attributes:
        residual: worst sampled residual among the failing pieces.
        interval: the piece that exhausted the budget, when known.
    """

    def __init__(self, message: str, residual: float = np.nan,
                 interval: tuple[float, float] | None = None):
        super().__init__(message)
        self.residual = residual
        self.interval = interval


def _chebpts1(n: int) -> np.ndarray:
    """First-kind Chebyshev points, descending from near 1 to near -1."""
    return np.cos((2.0 * np.arange(n) + 1.0) * np.pi / (2.0 * n))


def _coeffs_from_values1(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients from samples at first-kind points (descending)."""
    n = values.size
    c = dct(values, type=2) / n
    c[0] *= 0.5
    return c


def _trim(c: np.ndarray, tol_abs: float) -> np.ndarray:
    """Drop trailing coefficients below tol_abs, keeping at least one."""
    keep = np.nonzero(np.abs(c) > tol_abs)[0]
    if keep.size == 0:
        return c[:1] * 0.0
    return c[: keep[-1] + 1]


def _sample(f: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate f at xs, accepting either vectorized or scalar callables."""
    try:
        vals = np.asarray(f(xs), dtype=float)
        if vals.shape != xs.shape:
            raise ValueError
    except (TypeError, ValueError, IndexError):
        vals = np.array([float(f(x)) for x in xs])
    return vals


@dataclass(frozen=True)
class PiecewiseFunction:
    """Immutable piecewise Chebyshev representation on [breakpoints[0], breakpoints[-1]].

    pieces[i] holds the Chebyshev coefficients of the polynomial on
    [breakpoints[i], breakpoints[i+1]], expressed on the reference interval
    [-1, 1].  Left/right values at a shared breakpoint may differ, so jumps
    are representable.  Evaluation at an interior breakpoint returns the
    right-piece value.
    """

    breakpoints: np.ndarray
    pieces: tuple
    tolerance: float = DEFAULT_REL_TOL

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2 or not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing, length >= 2")
        if len(self.pieces) != bp.size - 1:
            raise ValueError("need exactly one coefficient vector per interval")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(
            self, "pieces", tuple(np.asarray(c, dtype=float) for c in self.pieces)
        )

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def npieces(self) -> int:
        return len(self.pieces)

    def _piece_index(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(idx, 0, self.npieces - 1)

    def _to_reference(self, i: int, x: np.ndarray) -> np.ndarray:
        a, b = self.breakpoints[i], self.breakpoints[i + 1]
        return (2.0 * x - (a + b)) / (b - a)

    def __call__(self, x):
        return evaluate(self, x)

    def piece_values_at_break(self, i: int) -> tuple[float, float]:
        """One-sided values (left-piece, right-piece) at interior breakpoint i."""
        if not 0 < i < self.breakpoints.size - 1:
            raise IndexError("interior breakpoints only")
        left = float(C.chebval(1.0, self.pieces[i - 1]))
        right = float(C.chebval(-1.0, self.pieces[i]))
        return left, right


def evaluate(pf: PiecewiseFunction, x):
    """Evaluate pf at x (scalar or array).

    Points must lie within the domain; interior breakpoints take the
    right-piece value, the right endpoint takes the last piece's value.
    """
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    lo, hi = pf.domain
    if np.any(xs < lo) or np.any(xs > hi):
        raise DomainError(f"evaluation point outside domain [{lo}, {hi}]")
    out = _evaluate_inside(pf, xs)
    return float(out[0]) if scalar else out


def evaluate_clamped(pf: PiecewiseFunction, x):
    """Evaluate with arguments clamped into the domain (constant extension)."""
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    lo, hi = pf.domain
    out = _evaluate_inside(pf, np.clip(np.atleast_1d(xs), lo, hi))
    return float(out[0]) if scalar else out


def _evaluate_inside(pf: PiecewiseFunction, xs: np.ndarray) -> np.ndarray:
    out = np.empty_like(xs)
    idx = pf._piece_index(xs)
    for i in np.unique(idx):
        sel = idx == i
        out[sel] = C.chebval(pf._to_reference(i, xs[sel]), pf.pieces[i])
    return out


def vscale(pf: PiecewiseFunction) -> float:
    """Cheap upper estimate of max |pf| over the domain."""
    return max(float(np.sum(np.abs(c))) for c in pf.pieces)


def approximate(
    f: Callable,
    interval: Sequence[float],
    breakpoints_hint: Iterable[float] = (),
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    max_degree: int = DEFAULT_MAX_DEGREE,
    max_pieces: int = DEFAULT_MAX_PIECES,
) -> PiecewiseFunction:
    """Adaptively approximate f on [lo, hi], splitting at hinted breakpoints.

    Each hint-delimited piece is sampled at first-kind Chebyshev points with
    the degree doubled until the coefficient tail drops below rel_tol times
    the function scale and an off-node residual check passes.  A piece that
    reaches max_degree unresolved is bisected and the halves are retried,
    up to max_pieces total pieces.

    f is never evaluated at the hinted breakpoints themselves, so it may
    jump (or be undefined) there.
    """
    lo, hi = float(interval[0]), float(interval[-1])
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    hints = np.asarray(sorted(set(float(h) for h in breakpoints_hint)), dtype=float)
    hints = hints[(hints > lo) & (hints < hi)]
    edges = np.concatenate([[lo], hints, [hi]])

    # phase 1: coarse scan to fix the global scale the tolerance is relative to
    seeds = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        seeds.append(_sample(f, mid + half * _chebpts1(9)))
    gscale = max(float(np.max(np.abs(v))) for v in seeds)

    pieces_out: list[tuple[float, float, np.ndarray]] = []
    worst = 0.0

    def build(a: float, b: float, values0: np.ndarray | None, budget: list):
        nonlocal gscale, worst
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        n = 9
        values = values0 if values0 is not None else _sample(f, mid + half * _chebpts1(n))
        while True:
            if not np.all(np.isfinite(values)):
                raise ApproximationError(
                    f"function not finite when sampled inside [{a}, {b}]"
                )
            pscale = float(np.max(np.abs(values)))
            gscale = max(gscale, pscale)
            tol_abs = rel_tol * max(pscale, gscale * 1e-2, np.finfo(float).tiny)
            c = _coeffs_from_values1(values)
            tail_ok = values.size > 3 and np.all(np.abs(c[-3:]) <= tol_abs)
            if tail_ok:
                ct = _trim(c, tol_abs)
                probe = mid + half * _chebpts1(min(2 * values.size + 11, 257))
                resid = float(
                    np.max(np.abs(_sample(f, probe) - C.chebval((probe - mid) / half, ct)))
                )
                if resid <= 50.0 * max(tol_abs, rel_tol * gscale):
                    pieces_out.append((a, b, ct))
                    return
                worst = max(worst, resid)
            if values.size - 1 >= max_degree:
                break
            n = 2 * (values.size - 1) + 1
            values = _sample(f, mid + half * _chebpts1(n))
        # unresolved at the degree cap: bisect and recurse
        if budget[0] <= 1:
            raise ApproximationError(
                f"no convergence on [{a}, {b}] at degree {max_degree} "
                f"with {max_pieces} pieces; worst residual {worst:.3e}",
                residual=worst,
                interval=(a, b),
            )
        budget[0] -= 1
        m = 0.5 * (a + b)
        build(a, m, None, budget)
        build(m, b, None, budget)

    budget = [max_pieces - (edges.size - 2)]
    if budget[0] < 1:
        raise ValueError("more breakpoint hints than max_pieces allows")
    for (a, b), v0 in zip(zip(edges[:-1], edges[1:]), seeds):
        build(a, b, v0, budget)

    pieces_out.sort(key=lambda t: t[0])
    bps = np.array([p[0] for p in pieces_out] + [pieces_out[-1][1]])
    return PiecewiseFunction(bps, tuple(p[2] for p in pieces_out), rel_tol)


def _roots_of_coeffs(c: np.ndarray, depth: int = 0) -> np.ndarray:
    """Real roots of a Chebyshev series on [-1, 1] (reference coordinates).

    High-degree series are re-expanded on half intervals until the colleague
    matrix is small enough; results are returned in the parent's coordinates.
    """
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0:
        return np.empty(0)  # identically zero piece: no isolated roots
    ct = _trim(c, 1e-14 * scale)
    if ct.size == 1:
        return np.empty(0)
    if ct.size - 1 > _MAX_EIG_DEGREE and depth < 40:
        out = []
        for lo, hi in ((-1.0, 0.0), (0.0, 1.0)):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            sub = _coeffs_from_values1(C.chebval(mid + half * _chebpts1(ct.size), ct))
            rr = _roots_of_coeffs(sub, depth + 1)
            out.append(mid + half * rr)
        return np.concatenate(out)
    rts = C.chebroots(ct)
    if rts.size == 0:
        return np.empty(0)
    rts = np.atleast_1d(rts)
    if np.iscomplexobj(rts):
        rts = rts[np.abs(rts.imag) <= _IMAG_TOL].real
    return rts[(rts >= -1.0 - 1e-9) & (rts <= 1.0 + 1e-9)]


def roots(pf: PiecewiseFunction, root_tol: float = DEFAULT_ROOT_TOL) -> np.ndarray:
    """All real roots of pf within its domain, sorted and deduplicated.

    Sign changes across a discontinuity are not roots; a root is always a
    zero of some piece polynomial within (a slight widening of) its piece.
    Each eigenvalue root is polished by one Newton step.
    """
    found = []
    for i, c in enumerate(pf.pieces):
        a, b = pf.breakpoints[i], pf.breakpoints[i + 1]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        rr = _roots_of_coeffs(c)
        if rr.size == 0:
            continue
        rr = np.clip(rr, -1.0, 1.0)
        dc = C.chebder(c)
        for r in rr:
            pv = C.chebval(r, c)
            dv = C.chebval(r, dc)
            if dv != 0.0:
                rn = r - pv / dv
                if -1.0 - 1e-8 <= rn <= 1.0 + 1e-8 and abs(C.chebval(rn, c)) <= abs(pv):
                    r = min(1.0, max(-1.0, rn))
            found.append(mid + half * r)
    if not found:
        return np.empty(0)
    found = np.sort(np.asarray(found))
    keep = [found[0]]
    for r in found[1:]:
        if r - keep[-1] > root_tol:
            keep.append(r)
    return np.asarray(keep)


def derivative(pf: PiecewiseFunction) -> PiecewiseFunction:
    """Piecewise derivative (distributional parts at jumps are dropped)."""
    new = []
    for i, c in enumerate(pf.pieces):
        h = 0.5 * (pf.breakpoints[i + 1] - pf.breakpoints[i])
        d = C.chebder(c) / h if c.size > 1 else np.zeros(1)
        new.append(d if d.size else np.zeros(1))
    return PiecewiseFunction(pf.breakpoints, tuple(new), pf.tolerance)


def antiderivative(pf: PiecewiseFunction) -> PiecewiseFunction:
    """Continuous antiderivative vanishing at the left endpoint."""
    new = []
    running = 0.0
    for i, c in enumerate(pf.pieces):
        h = 0.5 * (pf.breakpoints[i + 1] - pf.breakpoints[i])
        ci = C.chebint(c) * h
        ci[0] += running - C.chebval(-1.0, ci)
        running = float(C.chebval(1.0, ci))
        new.append(ci)
    return PiecewiseFunction(pf.breakpoints, tuple(new), pf.tolerance)


def prange(pf: PiecewiseFunction) -> tuple[float, float]:
    """Global [min, max] over the domain.

    Checks every piece's endpoints (both one-sided values at shared
    breakpoints) and the interior critical points of each piece.
    """
    lo = np.inf
    hi = -np.inf
    for i, c in enumerate(pf.pieces):
        crit = [-1.0, 1.0]
        if c.size > 2:
            dr = _roots_of_coeffs(np.asarray(C.chebder(c), dtype=float))
            crit.extend(np.clip(dr, -1.0, 1.0).tolist())
        vals = C.chebval(np.asarray(crit), c)
        lo = min(lo, float(np.min(vals)))
        hi = max(hi, float(np.max(vals)))
    return lo, hi


def jumps(pf: PiecewiseFunction, threshold: float) -> np.ndarray:
    """Interior breakpoints where the one-sided values differ by more than threshold."""
    out = []
    for i in range(1, pf.breakpoints.size - 1):
        left, right = pf.piece_values_at_break(i)
        if abs(right - left) > threshold:
            out.append(float(pf.breakpoints[i]))
    return np.asarray(out)


def affine(pf: PiecewiseFunction, scale: float, offset: float) -> PiecewiseFunction:
    """The function offset + scale * pf, on the same breakpoints."""
    new = []
    for c in pf.pieces:
        cc = c * scale
        cc[0] += offset
        new.append(cc)
    return PiecewiseFunction(pf.breakpoints, tuple(new), pf.tolerance)


def from_chebyshev_nodes(values: np.ndarray, interval: Sequence[float]) -> PiecewiseFunction:
    """Single-piece representation from values at second-kind Chebyshev points.

    values[j] must correspond to the ascending nodes
    x_j = mid - half*cos(j*pi/n), j = 0..n.
    """
    v = np.asarray(values, dtype=float)
    n = v.size - 1
    if n < 1:
        raise ValueError("need at least two nodal values")
    # DCT-I expects values ordered by descending reference coordinate
    y = dct(v[::-1], type=1)
    c = y / n
    c[0] *= 0.5
    c[-1] *= 0.5
    return PiecewiseFunction(np.asarray(interval, dtype=float), (c,))
