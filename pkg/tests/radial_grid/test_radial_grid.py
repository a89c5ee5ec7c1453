"""Tests for the radial grid and its discrete calculus."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from common.errors import CoefficientBoundViolation, InvalidArgumentError
from radial_grid.core import (
    FieldSnapshot,
    build_grid,
    divide_by_r,
    grid_policy,
    hessian_frobenius_sq,
    l2_norm,
    moment_weights,
    radial_derivatives,
    radial_integral,
)


class TestBuildGrid:
    """Tests for build_grid and the grid policy."""

    def test_time_step_from_cfl(self):
        """dt = cfl * dr / sqrt(1 + coeff_bound)."""
        grid = build_grid(10.0, 100, cfl_factor=0.9, coeff_bound=1 / 6)
        assert grid.dr == pytest.approx(0.1)
        assert grid.dt == pytest.approx(0.9 * 0.1 / math.sqrt(1 + 1 / 6))

    def test_nodes(self):
        """Nodes run from 0 to r_max inclusive."""
        grid = build_grid(4.0, 16)
        assert grid.size == 17
        assert grid.r[0] == 0.0
        assert grid.r[-1] == pytest.approx(4.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"r_max": 0.0, "nr": 32},
            {"r_max": 1.0, "nr": 8},
            {"r_max": 1.0, "nr": 32, "cfl_factor": 1.0},
            {"r_max": 1.0, "nr": 32, "coeff_bound": -0.1},
        ],
    )
    def test_invalid_arguments(self, kwargs):
        """Degenerate meshes and CFL factors are rejected."""
        with pytest.raises(InvalidArgumentError):
            build_grid(**kwargs)

    def test_coefficient_bound_above_half(self):
        """A coefficient bound above 1/2 leaves the admissible class."""
        with pytest.raises(CoefficientBoundViolation):
            build_grid(1.0, 32, coeff_bound=0.6)

    def test_steps_land_on_final_time(self):
        """The effective step divides T and never exceeds dt."""
        grid = build_grid(10.0, 200)
        n_steps, dt = grid.steps_for(3.3)
        assert n_steps * dt == pytest.approx(3.3, rel=1e-14)
        assert dt <= grid.dt

    def test_steps_for_rejects_nonpositive_time(self):
        """T must be positive."""
        with pytest.raises(InvalidArgumentError):
            build_grid(10.0, 200).steps_for(0.0)

    def test_refined_halves_spacing(self):
        """refined(2) keeps the domain and halves dr and dt."""
        grid = build_grid(10.0, 100)
        fine = grid.refined(2)
        assert fine.nr == 200
        assert fine.dr == pytest.approx(grid.dr / 2)
        assert fine.dt == pytest.approx(grid.dt / 2)

    def test_grid_policy_holds_light_cone(self):
        """r_max = support + sqrt(1 + bound) T + margin."""
        grid = grid_policy(support=6.0, T=10.0, coeff_bound=1 / 6, margin=4.0, dr=0.05)
        assert grid.r_max == pytest.approx(6.0 + math.sqrt(1 + 1 / 6) * 10.0 + 4.0)
        assert grid.dr <= 0.05


class TestQuadrature:
    """Tests for the r^p cell-moment quadrature."""

    def test_ball_volume(self):
        """The integral of 1 is the volume of the ball."""
        grid = build_grid(3.0, 30)
        assert radial_integral(np.ones(grid.size), grid) == pytest.approx(4 * math.pi * 27 / 3, rel=1e-12)

    def test_singular_moment_exact(self):
        """r^{-1/2} is integrated exactly at the origin."""
        grid = build_grid(4.0, 16)
        expected = 4 * math.pi * 4.0**0.5 / 0.5
        assert radial_integral(np.ones(grid.size), grid, p=-0.5) == pytest.approx(expected, rel=1e-12)

    def test_linear_integrand_exact(self):
        """Piecewise-linear integrands are integrated exactly."""
        grid = build_grid(2.0, 20)
        expected = 4 * math.pi * 2.0**4 / 4
        assert radial_integral(grid.r.copy(), grid) == pytest.approx(expected, rel=1e-12)

    def test_weights_reject_nonintegrable_power(self):
        """p <= -1 is not integrable at the origin."""
        with pytest.raises(InvalidArgumentError):
            moment_weights(build_grid(1.0, 16), -1.0)

    def test_gaussian_norm(self, fine_grid):
        """||exp(-r^2)||_{L^2(R^3)} = (pi/2)^{3/4}."""
        phi = np.exp(-fine_grid.r**2)
        assert l2_norm(phi, fine_grid) == pytest.approx((math.pi / 2) ** 0.75, rel=1e-4)

    def test_length_mismatch(self):
        """Arrays must match the grid."""
        grid = build_grid(1.0, 16)
        with pytest.raises(InvalidArgumentError):
            radial_integral(np.ones(5), grid)


class TestDerivatives:
    """Tests for radial stencils and the origin treatment."""

    def test_quadratic_even(self):
        """r^2 is differentiated exactly, including the origin and the outer boundary."""
        grid = build_grid(2.0, 40)
        d1, d2 = radial_derivatives(grid.r**2, grid, parity="even")
        np.testing.assert_allclose(d1, 2 * grid.r, atol=1e-9)
        np.testing.assert_allclose(d2, 2.0, atol=1e-7)

    def test_odd_origin(self):
        """u = r has u_r(0) = 1 and u_rr(0) = 0 under odd parity."""
        grid = build_grid(1.0, 16)
        d1, d2 = radial_derivatives(grid.r.copy(), grid, parity="odd")
        assert d1[0] == pytest.approx(1.0)
        assert d2[0] == 0.0

    def test_divide_by_r_fills_origin(self):
        """u = r (1 + r^2) gives phi = 1 + r^2 with phi(0) = 1."""
        grid = build_grid(1.0, 20)
        phi = divide_by_r(grid.r * (1 + grid.r**2), grid)
        np.testing.assert_allclose(phi, 1 + grid.r**2, rtol=1e-12)

    def test_gaussian_derivatives_second_order(self):
        """Halving dr divides the derivative errors of exp(-r^2) by about 4."""
        errors = []
        for nr in (200, 400, 800):
            grid = build_grid(8.0, nr)
            r = grid.r
            d1, d2 = radial_derivatives(np.exp(-(r**2)), grid, parity="even")
            errors.append(
                (
                    np.max(np.abs(d1 + 2 * r * np.exp(-(r**2)))),
                    np.max(np.abs(d2 - (4 * r**2 - 2) * np.exp(-(r**2)))),
                )
            )
        for coarse, fine in zip(errors, errors[1:]):
            for e_coarse, e_fine in zip(coarse, fine):
                assert 3.5 <= e_coarse / e_fine <= 4.5

    def test_hessian_integral_matches_quadrature(self, fine_grid):
        """The integrated |D^2 exp(-r^2)|^2 is within 1% of adaptive quadrature."""
        d1, d2 = radial_derivatives(np.exp(-(fine_grid.r**2)), fine_grid, parity="even")
        discrete = radial_integral(hessian_frobenius_sq(d1, d2, fine_grid), fine_grid)

        def density(r: float) -> float:
            phi_r = -2 * r * math.exp(-(r**2))
            phi_rr = (4 * r**2 - 2) * math.exp(-(r**2))
            return 4 * math.pi * (r**2 * phi_rr**2 + 2 * phi_r**2)

        exact, _ = quad(density, 0.0, math.inf, epsabs=0.0, epsrel=1e-12)
        assert discrete == pytest.approx(exact, rel=1e-2)

    def test_hessian_of_quadratic(self):
        """|D^2 r^2|^2 = 12 everywhere, the origin limit included."""
        grid = build_grid(1.0, 20)
        out = hessian_frobenius_sq(2 * grid.r, np.full(grid.size, 2.0), grid)
        np.testing.assert_allclose(out, 12.0)


class TestFieldSnapshot:
    """Tests for FieldSnapshot views."""

    def test_from_phi_round_trip(self):
        """phi-level arrays survive the u = r phi storage."""
        grid = build_grid(4.0, 80)
        phi = np.exp(-grid.r**2)
        snap = FieldSnapshot.from_phi(0.0, phi, 2 * phi, grid)
        np.testing.assert_allclose(snap.phi, phi, atol=1e-4)
        np.testing.assert_allclose(snap.phi_t, 2 * phi, atol=1e-4)
        assert snap.u[0] == 0.0

    def test_dphi_sq(self):
        """|d phi|^2 = phi_t^2 + phi_r^2."""
        grid = build_grid(4.0, 80)
        phi = np.exp(-grid.r**2)
        snap = FieldSnapshot.from_phi(0.0, phi, phi, grid)
        np.testing.assert_allclose(snap.dphi_sq, snap.phi_t**2 + snap.phi_r**2)

    def test_second_order_needs_u_tt(self):
        """Without u_tt there is no d_t^2 phi."""
        grid = build_grid(4.0, 80)
        snap = FieldSnapshot.from_phi(0.0, np.zeros(grid.size), np.zeros(grid.size), grid)
        assert snap.phi_tt is None
        assert snap.d2phi_sq is None

    def test_is_finite(self):
        """NaN in u marks the snapshot as non-finite."""
        grid = build_grid(1.0, 16)
        u = np.zeros(grid.size)
        u[3] = np.nan
        assert not FieldSnapshot(t=0.0, u=u, u_t=np.zeros(grid.size), grid=grid).is_finite()
