"""Pointwise entropy solver: candidate enumeration, cost evaluation, point and
grid solves, the brute-force value-function oracle and profile utilities."""

import numpy as np
import pytest

from entropoint.entropy import (
    EntropySolver,
    InitialData,
    locate_jumps,
    reconstruct_profile,
)
from entropoint.problems import burgers_box_analytic, quadratic_flux


class TestInitialData:
    def test_antiderivative_continuous(self, specs):
        for spec in specs.values():
            G = spec.init.G
            for i in range(1, G.breakpoints.size - 1):
                left, right = G.piece_values_at_break(i)
                assert abs(left - right) < 1e-12

    def test_derivative_consistency(self, specs):
        """G' recovers g at interior sample points (central differences)."""
        init = specs["burgers_sine"].init
        xs = np.linspace(-3.5, 7.5, 40)
        h = 1e-6
        fd = (init.G_at(xs + h) - init.G_at(xs - h)) / (2 * h)
        assert np.max(np.abs(fd - init.g_at(xs))) < 1e-8

    def test_discontinuities_are_jumping_breakpoints(self, specs):
        init = specs["burgers_box"].init
        assert init.discontinuities == (0.0, 1.0)
        for a in init.discontinuities:
            assert a in init.g.breakpoints

    def test_constant_extension(self, specs):
        init = specs["burgers_box"].init
        assert init.g_at(-50.0) == pytest.approx(0.0)
        assert init.g_at(50.0) == pytest.approx(0.0)
        # G extends linearly with the endpoint slope (here zero)
        assert init.G_at(-50.0) == pytest.approx(0.0)
        assert init.G_at(50.0) == pytest.approx(init.G_at(3.0))


class TestCandidateCostates:
    def test_box_fan_point(self, box_solver):
        """At (0.5, 1) the only solutions of the characteristic equations are
        p = 0.5 (from the jump at 0) and p = -0.5 (from the jump at 1):
        p = g(0.5 - p) has no solution since g(0.5 - p) is 1 for p < 0.5 and
        0 for p > 0.5, never equal to p."""
        c = box_solver.candidate_costates(0.5, 1.0)
        assert np.min(np.abs(c - 0.5)) < 1e-10
        assert np.min(np.abs(c - (-0.5))) < 1e-10
        assert not np.any(np.abs(c - 1.0) < 1e-6)

    def test_box_post_shock_point(self, box_solver):
        """(2, 1): p = 2 from the jump at 0, p = 1 from the jump at 1,
        p = 0 from the constant far field."""
        c = box_solver.candidate_costates(2.0, 1.0)
        for expected in (0.0, 1.0, 2.0):
            assert np.min(np.abs(c - expected)) < 1e-10

    def test_constant_data_single_candidate(self):
        init = InitialData.from_function(
            lambda x: 3.0 + 0.0 * np.asarray(x, dtype=float), (0, 1)
        )
        solver = EntropySolver(quadratic_flux(0.5), init)
        c = solver.candidate_costates(0.3, 2.0)
        assert c.size == 1
        assert c[0] == pytest.approx(3.0)

    def test_requires_positive_time(self, box_solver):
        with pytest.raises(ValueError):
            box_solver.candidate_costates(0.0, 0.0)

    def test_flat_flux_segment_yields_interval_candidates(self):
        """A piecewise-linear flux makes the jump equation a_k = x - F'(p) t
        hold on a whole costate interval when F' is flat at the right slope;
        the interval's endpoints and midpoint stand in for the continuum."""
        from entropoint.problems import tabulated_flux

        flux = tabulated_flux([-1.0, 0.0, 1.0], [1.0, 0.0, 1.5])  # F' = -1 then 1.5
        init = InitialData.from_function(
            lambda x: np.where(np.asarray(x, dtype=float) < 0, 1.0, 0.0),
            (-2, 2), breakpoints=(0.0,),
        )
        solver = EntropySolver(flux, init)
        # at (x, t) = (-1, 1) the jump at 0 needs slope (x - 0)/t = -1, which
        # F' takes on the whole flat stretch left of 0
        c = solver.candidate_costates(-1.0, 1.0)
        assert np.min(np.abs(c - 0.0)) < 1e-10
        flat = c[(c < -1e-10) & (np.abs(flux.Fprime(c) + 1.0) < 1e-12)]
        assert flat.size >= 2, "flat-segment representatives missing"
        s = solver.solve_point(-1.0, 1.0)
        assert np.isfinite(s.J) and s.candidate_count >= 3

    def test_small_time_far_slopes(self, box_solver):
        """Tiny t makes the jump slopes huge; widening still finds the data."""
        s = box_solver.solve_point(0.5, 1e-3)
        assert s.u == pytest.approx(1.0, abs=1e-12)
        s = box_solver.solve_point(-0.5, 1e-3)
        assert s.u == pytest.approx(0.0, abs=1e-12)


class TestCost:
    def test_unit_state(self, box_solver):
        """p=1 at (1.2, 1): J = (1 - 0.5) * 1 + G(0.2) = 0.5 + 0.2."""
        assert box_solver.cost(1.0, 1.2, 1.0) == pytest.approx(0.7, abs=1e-14)

    def test_far_field(self, box_solver):
        assert box_solver.cost(0.0, -5.0, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_fan_state(self, box_solver):
        """p=0.5 at (0.5, 1): J = (0.25 - 0.125) + G(0) = 0.125."""
        assert box_solver.cost(0.5, 0.5, 1.0) == pytest.approx(0.125, abs=1e-14)

    def test_vectorized(self, box_solver):
        ps = np.array([0.0, 0.5, 1.0])
        out = box_solver.cost(ps, 0.5, 1.0)
        assert out.shape == (3,)


class TestSolvePoint:
    @pytest.mark.parametrize(
        "x,t,expected",
        [
            (0.5, 1.0, 0.5),   # rarefaction fan, u = x/t
            (1.2, 1.0, 1.0),   # plateau between fan and shock
            (1.0, 2.5, 0.4),   # fan persists after the shock slows (sqrt(2t) > 1)
            (2.5, 2.5, 0.0),   # beyond the late-time shock
        ],
    )
    def test_box_reference_points(self, box_solver, x, t, expected):
        s = box_solver.solve_point(x, t)
        assert s.u == pytest.approx(expected, abs=1e-12)
        assert np.isfinite(s.J)

    def test_time_zero_returns_data(self, box_solver):
        s = box_solver.solve_point(0.5, 0.0)
        assert s.u == pytest.approx(1.0)
        assert s.J == pytest.approx(0.5)
        assert s.candidate_count == 0

    def test_negative_time_rejected(self, box_solver):
        with pytest.raises(ValueError):
            box_solver.solve_point(0.0, -0.1)

    def test_max_principle_sampled(self, entropy_solvers, specs):
        rng = np.random.default_rng(21)
        for name, solver in entropy_solvers.items():
            (xlo, xhi), (tlo, thi) = specs[name].domain_xt
            glo, ghi = solver.init.value_range()
            for _ in range(25):
                s = solver.solve_point(rng.uniform(xlo, xhi), rng.uniform(tlo, thi))
                assert glo - 1e-9 <= s.u <= ghi + 1e-9

    def test_deterministic_repeat(self, box_solver):
        a = box_solver.solve_point(1.7, 2.3)
        b = box_solver.solve_point(1.7, 2.3)
        assert (a.u, a.J, a.candidate_count) == (b.u, b.J, b.candidate_count)


class TestSolveGrid:
    def test_matches_pointwise(self, box_solver):
        xs, ts = [0.5, 1.2], [1.0, 2.5]
        grid = box_solver.solve_grid(xs, ts)
        assert len(grid) == 4
        k = 0
        for t in ts:
            for x in xs:
                direct = box_solver.solve_point(x, t)
                assert grid[k].u == direct.u and grid[k].J == direct.J
                k += 1

    def test_empty(self, box_solver):
        assert box_solver.solve_grid([], [1.0]) == []

    def test_parallel_bitwise_identical(self, box_solver):
        xs = np.linspace(-1, 3, 9)
        ts = np.linspace(0.1, 4, 5)
        serial = box_solver.solve_grid(xs, ts, parallel=False)
        threaded = box_solver.solve_grid(xs, ts, parallel=True, max_workers=4)
        assert [(s.u, s.J) for s in serial] == [(s.u, s.J) for s in threaded]

    def test_grid_accuracy_subset(self, box_solver):
        """25x25 sub-grid of the reference sweep, shocks excluded."""
        xs = np.linspace(-1, 3, 25)
        ts = np.linspace(0.1, 4, 25)
        for t in ts:
            shock = 1 + 0.5 * t if t <= 2 else np.sqrt(2 * t)
            for x in xs:
                if abs(x - shock) < 1e-9:
                    continue
                s = box_solver.solve_point(float(x), float(t))
                assert abs(s.u - burgers_box_analytic(float(x), float(t))) < 1e-12


class TestHopfLaxOracle:
    def test_box_reference_value(self, box_solver):
        """Brute-force value at (1.2, 1) over y in [-5, 5]: w = 0.7."""
        w, u = box_solver.hopf_lax_oracle(1.2, 1.0, ny=100_000, y_range=(-5, 5))
        assert w == pytest.approx(0.7, abs=1e-3)
        assert u == pytest.approx(1.0, abs=1e-3)

    def test_zero_data(self):
        init = InitialData.from_function(lambda x: 0.0 * np.asarray(x, dtype=float), (-1, 1))
        solver = EntropySolver(quadratic_flux(0.5), init)
        w, _ = solver.hopf_lax_oracle(0.3, 1.0)
        assert abs(w) < 1e-12

    def test_sine_value_matches_solver(self, entropy_solvers):
        solver = entropy_solvers["burgers_sine"]
        w, _ = solver.hopf_lax_oracle(1.0, 0.2)
        s = solver.solve_point(1.0, 0.2)
        assert abs(w - s.J) < 1e-4


class TestPdeResidual:
    def test_residual_at_smooth_points(self, box_solver):
        """u_t + (u^2/2)_x ~ 0 away from the shock and fan edges."""
        rng = np.random.default_rng(17)
        h = 1e-3
        checked = 0
        while checked < 100:
            x = rng.uniform(-0.9, 2.9)
            t = rng.uniform(0.2, 3.8)
            shock = 1 + 0.5 * t if t <= 2 else np.sqrt(2 * t)
            # only points at distance > 10h from the non-smooth set
            if min(abs(x), abs(x - t), abs(x - shock)) < 10 * h:
                continue
            ut = (box_solver.solve_point(x, t + h).u - box_solver.solve_point(x, t - h).u) / (2 * h)
            up = box_solver.solve_point(x + h, t).u
            um = box_solver.solve_point(x - h, t).u
            fx = (0.5 * up ** 2 - 0.5 * um ** 2) / (2 * h)
            assert abs(ut + fx) < 1e-3
            checked += 1


class TestProfileUtilities:
    def test_shock_located_precisely(self, box_solver):
        jl = locate_jumps(lambda x: box_solver.solve_point(x, 1.0).u, -1.0, 3.0)
        assert len(jl) == 1
        loc, ul, ur = jl[0]
        assert loc == pytest.approx(1.5, abs=1e-8)
        assert ul > ur  # entropy-admissible

    def test_steep_ramp_not_reported(self):
        steep = lambda x: float(np.tanh(50.0 * (x - 0.4)))
        assert locate_jumps(steep, 0.0, 1.0, n_scan=100) == []

    def test_reconstruct_box_profile(self, box_solver):
        pf, jmp = reconstruct_profile(lambda x: box_solver.solve_point(x, 1.0).u, (-1, 3))
        assert len(jmp) == 1
        assert jmp[0][0] == pytest.approx(1.5, abs=1e-8)
        xs = np.linspace(-1, 3, 300)
        exact = np.array([burgers_box_analytic(float(x), 1.0) for x in xs])
        mask = np.abs(xs - 1.5) > 1e-2
        assert np.max(np.abs(pf(xs)[mask] - exact[mask])) < 1e-4
