"""Problem catalog: analytic references, oracles, transforms and the JSON
problem-document round trip."""

import json

import numpy as np
import pytest

from entropoint.control import minimum_value_point
from entropoint.entropy import EntropySolver
from entropoint.problems import (
    ErrorReport,
    _ex6_cost,
    analytic_error,
    burgers_box_analytic,
    catalog,
    exp_space_analytic,
    get_problem,
    problem_from_json,
    problem_to_json,
    quadratic_space_analytic,
    quadratic_space_candidates,
    sine_characteristic_oracle,
    sine_preshock_newton,
    tabulated_flux,
)


class TestCatalog:
    def test_exactly_seven_problems(self):
        assert len(catalog()) == 7

    def test_box_analytic_reference(self):
        assert burgers_box_analytic(0.5, 1.0) == pytest.approx(0.5)
        assert burgers_box_analytic(1.2, 1.0) == pytest.approx(1.0)
        assert burgers_box_analytic(2.5, 2.5) == pytest.approx(0.0)

    def test_exponential_analytic_reference(self):
        assert exp_space_analytic(0.0, 0.1) == pytest.approx(-1.0 / (1.0 + 9.0 * np.exp(-1.0)))

    def test_get_problem(self):
        assert get_problem("burgers_box").name == "burgers_box"
        with pytest.raises(KeyError):
            get_problem("nonexistent")

    def test_flux_invariants(self, specs):
        for spec in specs.values():
            if spec.flux is not None:
                spec.flux.validate()


class TestAnalyticErrors:
    def test_box_coarse_grid(self, box_solver, specs):
        """20x20 sub-grid of the reference sweep stays at solver precision."""
        spec = specs["burgers_box"]
        report = analytic_error(
            spec, lambda x, t: box_solver.solve_point(x, t).u,
            np.linspace(-1, 3, 20), np.linspace(0.1, 4, 20),
        )
        assert isinstance(report, ErrorReport)
        assert report.max_abs <= 1e-12

    def test_sine_against_characteristic_oracle(self, entropy_solvers):
        solver = entropy_solvers["burgers_sine"]
        worst = 0.0
        for t in np.linspace(0.1, 0.8, 8):
            for x in np.linspace(0, 4, 15):
                u, _ = sine_characteristic_oracle(float(x), float(t))
                worst = max(worst, abs(solver.solve_point(float(x), float(t)).u - u))
        assert worst <= 1e-10

    def test_sine_preshock_newton_oracle(self, entropy_solvers):
        """Before characteristics cross, the single-root Newton solve agrees."""
        solver = entropy_solvers["burgers_sine"]
        for x in np.linspace(0, 4, 12):
            for t in (0.02, 0.06, 0.1):
                assert solver.solve_point(float(x), t).u == pytest.approx(
                    sine_preshock_newton(float(x), t), abs=1e-10
                )

    def test_exp_space_coarse_grid(self, specs):
        spec = specs["exp_space"]
        worst = 0.0
        for x in np.linspace(0, 1, 8):
            for t in np.linspace(0.1, 0.6, 6):
                s = minimum_value_point(spec.control, spec.enumerator, float(x), float(t))
                worst = max(worst, abs(s.u - exp_space_analytic(float(x), float(t))))
        assert worst <= 1e-8

    def test_shock_points_excluded(self, box_solver, specs):
        spec = specs["burgers_box"]
        report = analytic_error(
            spec, lambda x, t: box_solver.solve_point(x, t).u,
            xs=[1.5], ts=[1.0], shock_exclusion_radius=1e-9,
        )
        assert report.excluded_points == 1
        assert report.max_abs == 0.0

    def test_no_analytic_raises(self, specs):
        with pytest.raises(ValueError):
            analytic_error(specs["burgers_wiggly"], lambda x, t: 0.0, [0.0], [0.1])


class TestAnalyticPdeResiduals:
    def test_box_analytic_satisfies_pde(self):
        """u_t + u u_x = 0 at smooth points of the closed form."""
        rng = np.random.default_rng(9)
        h = 1e-4
        checked = 0
        while checked < 60:
            x, t = rng.uniform(-1, 3), rng.uniform(0.2, 3.8)
            shock = 1 + 0.5 * t if t <= 2 else np.sqrt(2 * t)
            if min(abs(x), abs(x - t), abs(x - shock)) < 20 * h:
                continue
            ut = (burgers_box_analytic(x, t + h) - burgers_box_analytic(x, t - h)) / (2 * h)
            fx = (burgers_box_analytic(x + h, t) ** 2 - burgers_box_analytic(x - h, t) ** 2) / (4 * h)
            assert abs(ut + fx) < 1e-6
            checked += 1

    def test_exp_space_analytic_satisfies_pde(self):
        """u_t + ((1 + u e^{10x}) u)_x = 0 everywhere (no shocks)."""
        rng = np.random.default_rng(10)
        h = 1e-5
        F = lambda x, u: (1.0 + u * np.exp(10.0 * x)) * u
        for _ in range(60):
            x, t = rng.uniform(0, 1), rng.uniform(0.1, 0.6)
            ut = (exp_space_analytic(x, t + h) - exp_space_analytic(x, t - h)) / (2 * h)
            fx = (F(x + h, exp_space_analytic(x + h, t))
                  - F(x - h, exp_space_analytic(x - h, t))) / (2 * h)
            assert abs(ut + fx) < 1e-6

    def test_quadratic_space_analytic_satisfies_pde(self):
        """u_t + u u_x - x = 0 on the smooth far-field branches."""
        h = 1e-5
        for x, t in [(-2.5, 0.7), (2.7, 1.1), (-2.0, 1.5), (2.2, 0.4)]:
            ut = (quadratic_space_analytic(x, t + h) - quadratic_space_analytic(x, t - h)) / (2 * h)
            u = quadratic_space_analytic(x, t)
            ux = (quadratic_space_analytic(x + h, t) - quadratic_space_analytic(x - h, t)) / (2 * h)
            assert abs(ut + u * ux - x) < 1e-6

    def test_sine_reference_satisfies_pde(self, specs):
        """The oracle-backed reference for the sinusoidal problem solves
        Burgers away from its shocks."""
        spec = specs["burgers_sine"]
        rng = np.random.default_rng(14)
        h = 1e-4
        checked = 0
        while checked < 20:
            x, t = rng.uniform(0.2, 3.8), rng.uniform(0.15, 0.75)
            if any(abs(x - s) < 50 * h for s in spec.shock_loci(t)):
                continue
            ut = (spec.analytic(x, t + h) - spec.analytic(x, t - h)) / (2 * h)
            fx = (spec.analytic(x + h, t) ** 2 - spec.analytic(x - h, t) ** 2) / (4 * h)
            assert abs(ut + fx) < 1e-6
            checked += 1


class TestTrafficTransform:
    def test_density_roundtrip(self, entropy_solvers, specs):
        """q = -u recovers densities in [0, 1]."""
        spec = specs["lwr_traffic"]
        solver = entropy_solvers["lwr_traffic"]
        rng = np.random.default_rng(12)
        for _ in range(40):
            x, t = rng.uniform(-30, 30), rng.uniform(0.1, 4)
            q = spec.transform.apply(solver.solve_point(x, t).u)
            assert -1e-9 <= q <= 1.0 + 1e-9


class TestQuadraticSpaceCost:
    def test_closed_form_cost_matches_quadrature(self, specs):
        """The paper-style cost formula agrees with the collocation quadrature."""
        spec = specs["quadratic_space"]
        for x, t in [(0.0, 1.0), (1.3, 0.6), (-0.4, 1.4)]:
            cands = [c for c in quadratic_space_candidates(x, t) if c.valid]
            costs = {round(c.X, 12): _ex6_cost(x, t, c.X) for c in cands}
            s = minimum_value_point(spec.control, spec.enumerator, x, t)
            assert s.J == pytest.approx(min(costs.values()), abs=1e-8)


class TestJsonDocuments:
    def test_box_roundtrip(self, specs, box_solver, tmp_path):
        doc = problem_to_json(specs["burgers_box"])
        path = tmp_path / "box.json"
        path.write_text(json.dumps(doc))
        spec2 = problem_from_json(str(path))
        solver2 = EntropySolver(spec2.flux, spec2.init)
        for x, t in [(0.5, 1.0), (2.0, 3.0), (-0.5, 0.4)]:
            assert solver2.solve_point(x, t).u == pytest.approx(
                box_solver.solve_point(x, t).u, abs=1e-12
            )

    def test_chebyshev_pieces_roundtrip(self, specs, entropy_solvers):
        doc = problem_to_json(specs["burgers_sine"])
        assert doc["init"]["kind"] == "chebyshev_pieces"
        spec2 = problem_from_json(doc)
        solver2 = EntropySolver(spec2.flux, spec2.init)
        orig = entropy_solvers["burgers_sine"]
        for x, t in [(0.7, 0.3), (2.2, 0.75)]:
            assert solver2.solve_point(x, t).u == orig.solve_point(x, t).u

    def test_lwr_transform_survives(self, specs):
        doc = problem_to_json(specs["lwr_traffic"])
        spec2 = problem_from_json(doc)
        assert spec2.transform.column == "q"
        assert spec2.transform.scale == -1.0

    def test_space_dependent_not_serializable(self, specs):
        with pytest.raises(ValueError):
            problem_to_json(specs["quadratic_space"])

    def test_unknown_kinds_rejected(self):
        with pytest.raises(ValueError):
            problem_from_json({"name": "x", "flux": {"kind": "cubic"},
                               "init": {"kind": "piecewise_constant",
                                        "breakpoints": [0, 1], "values": [1]}})
        with pytest.raises(ValueError):
            problem_from_json({"name": "x", "flux": {"kind": "quadratic"},
                               "init": {"kind": "mystery"}})

    def test_tabulated_flux(self):
        """Piecewise-linear flux table: convexity enforced, F' is a step."""
        flux = tabulated_flux([-1.0, 0.0, 1.0], [1.0, 0.0, 1.5])
        assert flux.F(np.asarray(0.5)) == pytest.approx(0.75)
        assert flux.Fprime(np.asarray(-0.5)) == pytest.approx(-1.0)
        assert flux.Fprime(np.asarray(0.5)) == pytest.approx(1.5)
        assert flux.smoothness_hints == (0.0,)
        with pytest.raises(ValueError):
            tabulated_flux([-1.0, 0.0, 1.0], [0.0, 1.0, 0.0])  # concave kink
