"""Finite-volume reference scheme: initialization quadrature, the limited
conservative update, CFL handling and structural properties."""

import numpy as np
import pytest

from entropoint import finite_volume as fv
from entropoint import piecewise as pw
from entropoint.duality import ConvexFlux
from entropoint.problems import quadratic_flux


def advection_flux():
    """F(u) = u: linear advection at unit speed (weakly convex)."""
    return ConvexFlux(
        F=lambda u: np.asarray(u, dtype=float),
        Fprime=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        p_domain=(-2, 2),
    )


@pytest.fixture(scope="module")
def box_grid(specs):
    return fv.init_from(specs["burgers_box"].init.g, -1, 3, 4)


class TestInitFrom:
    def test_constant_data(self):
        g = pw.approximate(lambda x: np.ones_like(np.asarray(x, dtype=float)), [0, 1])
        grid = fv.init_from(g, 0, 1, 10)
        assert np.allclose(grid.cell_averages, 1.0, atol=1e-15)

    def test_box_averages_exact(self, box_grid):
        assert np.allclose(box_grid.cell_averages, [0.0, 1.0, 0.0, 0.0], atol=1e-14)

    def test_linear_means(self):
        g = pw.approximate(lambda x: np.asarray(x, dtype=float), [0, 1])
        grid = fv.init_from(g, 0, 1, 2)
        assert np.allclose(grid.cell_averages, [0.25, 0.75], atol=1e-15)

    def test_grid_validation(self):
        g = pw.approximate(lambda x: np.asarray(x, dtype=float), [0, 1])
        with pytest.raises(ValueError):
            fv.init_from(g, 0, 1, 1)
        with pytest.raises(ValueError):
            fv.FvGrid(lo=0, hi=1, ncells=4, cell_averages=np.zeros(4), cfl_target=1.5)


class TestStep:
    def test_constant_state_preserved(self, specs):
        flux = specs["burgers_nwave"].flux
        grid = fv.FvGrid(lo=0, hi=1, ncells=20,
                         cell_averages=np.full(20, 0.7))
        out = fv.step(grid, flux, 0.01)
        assert np.allclose(out.cell_averages, 0.7, atol=1e-15)
        assert out.time == pytest.approx(0.01)

    def test_advection_matches_hand_stencil(self):
        """One limited Lax-Wendroff step on 5 cells vs the written-out update.

        For F(u) = u all speeds are 1, the Godunov flux is the upwind value
        and the correction at interface j is 0.5 (1 - dt/dx) phi_j W_j with
        theta_j = W_{j-1} / W_j.
        """
        flux = advection_flux()
        u = np.array([0.0, 0.1, 0.5, 0.9, 1.0])
        dx = 0.2
        dt = 0.1
        grid = fv.FvGrid(lo=0, hi=1, ncells=5, cell_averages=u.copy())

        ue = np.concatenate([[u[0], u[0]], u, [u[-1], u[-1]]])
        waves = np.diff(ue)
        godunov = ue[:-1]  # upwind for unit speed
        corr = np.zeros_like(godunov)
        nu = dt / dx
        for j in range(1, 6 + 1):
            wj = waves[j]
            theta = waves[j - 1] / wj if wj != 0 else 0.0
            phi = (theta + abs(theta)) / (1 + abs(theta))
            corr[j] = 0.5 * (1 - nu) * phi * wj
        # cell k (extended index k+2) flows through interfaces k+1 and k+2
        total = godunov + corr
        expected = u - nu * (total[2:7] - total[1:6])

        out = fv.step(grid, flux, dt)
        assert np.allclose(out.cell_averages, expected, atol=1e-14)

    def test_conservative_update(self, specs):
        """Total mass change per step is exactly the boundary flux imbalance
        (zero here: equal far-field states on both sides)."""
        spec = specs["burgers_nwave"]
        grid = fv.init_from(spec.init.g, -8, 8, 400)
        dt = 0.9 * grid.dx / fv.max_wave_speed(grid, spec.flux)
        total0 = np.sum(grid.cell_averages) * grid.dx
        out = fv.step(grid, spec.flux, dt)
        total1 = np.sum(out.cell_averages) * out.dx
        assert abs(total1 - total0) < 1e-13

    def test_cfl_violation_raises(self, specs):
        spec = specs["burgers_nwave"]
        grid = fv.init_from(spec.init.g, -8, 8, 100)
        dt_bad = 2.0 * grid.dx / fv.max_wave_speed(grid, spec.flux)
        with pytest.raises(fv.CflError):
            fv.step(grid, spec.flux, dt_bad)

    def test_sonic_point_handling(self):
        """A transonic rarefaction (u_l < 0 < u_r for Burgers) must use the
        sonic flux F(0) = 0 at the interface, not min(F(u_l), F(u_r))."""
        flux = quadratic_flux(0.5)
        u = np.array([-1.0, -1.0, 1.0, 1.0])
        grid = fv.FvGrid(lo=0, hi=1, ncells=4, cell_averages=u.copy())
        out = fv.step(grid, flux, 0.1, limiter="none")
        # with the sonic fix the middle interface flux is 0, so cell 1 loses
        # mass through its left face only: u1' = -1 - dt/dx (0 - 0.5)
        dtdx = 0.1 / 0.25
        assert out.cell_averages[1] == pytest.approx(-1.0 + dtdx * 0.5)
        assert out.cell_averages[2] == pytest.approx(1.0 - dtdx * 0.5)


class TestRunUntil:
    def test_identity_at_current_time(self, specs, box_grid):
        out = fv.run_until(box_grid, specs["burgers_box"].flux, box_grid.time)
        assert out.time == box_grid.time
        assert np.array_equal(out.cell_averages, box_grid.cell_averages)

    def test_lands_exactly_on_t_end(self, specs):
        spec = specs["burgers_nwave"]
        grid = fv.init_from(spec.init.g, -8, 8, 200)
        out = fv.run_until(grid, spec.flux, 0.37)
        assert out.time == pytest.approx(0.37, abs=1e-14)

    def test_backward_time_rejected(self, specs, box_grid):
        stepped = fv.run_until(box_grid, specs["burgers_box"].flux, 0.1)
        with pytest.raises(ValueError):
            fv.run_until(stepped, specs["burgers_box"].flux, 0.05)


class TestSchemeProperties:
    def test_tvd_on_monotone_data(self, specs):
        """Total variation of a monotone profile does not grow."""
        g = pw.approximate(np.tanh, [-3, 3])
        grid = fv.init_from(g, -3, 3, 150)
        flux = specs["burgers_nwave"].flux
        tv_prev = np.sum(np.abs(np.diff(grid.cell_averages)))
        for _ in range(20):
            dt = 0.9 * grid.dx / fv.max_wave_speed(grid, flux)
            grid = fv.step(grid, flux, dt)
            tv = np.sum(np.abs(np.diff(grid.cell_averages)))
            assert tv <= tv_prev + 1e-10
            tv_prev = tv

    def test_unlimited_reduces_to_upwind(self):
        """limiter='none' is plain Godunov: for linear advection the update
        is the first-order upwind stencil."""
        flux = advection_flux()
        rng = np.random.default_rng(2)
        u = rng.uniform(0, 1, 30)
        grid = fv.FvGrid(lo=0, hi=3, ncells=30, cell_averages=u.copy())
        dt = 0.05
        out = fv.step(grid, flux, dt, limiter="none")
        nu = dt / grid.dx
        ue = np.concatenate([[u[0]], u])
        expected = u - nu * (u - ue[:-1])
        assert np.allclose(out.cell_averages, expected, atol=1e-14)

    def test_upwind_approximates_exact_shift(self):
        """First-order upwind tracks the exact translate of a smooth profile
        to within its O(dx) diffusion error."""
        flux = advection_flux()
        g = pw.approximate(lambda x: np.exp(-((np.asarray(x, dtype=float) - 2) ** 2)),
                           [0, 8])
        grid = fv.init_from(g, 0, 8, 400)
        out = fv.run_until(grid, flux, 1.0, limiter="none")
        exact = np.exp(-((out.cell_centers - 1.0 - 2.0) ** 2))
        err = np.mean(np.abs(out.cell_averages - exact))
        assert err < 0.05
        limited = fv.run_until(grid, flux, 1.0)
        err_limited = np.mean(np.abs(limited.cell_averages - exact))
        assert err_limited < err
