"""Tests for data profiles, Sobolev norms, scaling and mollifiers."""

import math

import numpy as np
import pytest

from common.errors import CannotScaleError, InvalidArgumentError, ResolutionError
from initial_data.core import (
    data_distance,
    finest_resolvable_level,
    mollifier_kernel,
    mollify_pair,
    mollify_radial,
    pair_from_snapshot,
    profile,
    scale_to_epsilon,
    sobolev_norms,
    telescoping_increments,
)
from initial_data.types import SampledProfile
from radial_grid.core import FieldSnapshot, build_grid, l2_norm, radial_derivatives

# ||grad exp(-r^2)||_{L^2(R^3)} = (6 pi^{3/2} / 2^{5/2})^{1/2}
GAUSSIAN_GRAD_NORM = math.sqrt(6 * math.pi**1.5 / 2**2.5)


class _Quadratic:
    """f(x) = |x|^2 in closed form."""

    spacing = None
    support = math.inf

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return np.asarray(r, dtype=float) ** 2


class TestProfiles:
    """Tests for profile builders."""

    def test_gaussian_values(self, fine_grid):
        """f = A exp(-r^2/w^2), g = B exp(-r^2/w^2)."""
        pair = profile("gaussian", amplitude=2.0, width=0.5, velocity_amplitude=-1.0)
        f, g = pair.sample(fine_grid)
        np.testing.assert_allclose(f, 2.0 * np.exp(-(fine_grid.r / 0.5) ** 2))
        np.testing.assert_allclose(g, -np.exp(-(fine_grid.r / 0.5) ** 2))

    def test_bump_compact_support(self, fine_grid):
        """The bump vanishes outside its width."""
        pair = profile("bump", width=1.5)
        f, _ = pair.sample(fine_grid)
        assert np.all(f[fine_grid.r >= 1.5] == 0.0)
        assert f[0] == pytest.approx(1.0)
        assert pair.support == pytest.approx(1.5)

    def test_centered_shell_is_even(self):
        """Off-center profiles are symmetrized in r."""
        pair = profile("ripple", center=2.0)
        r = np.array([0.3, 1.1])
        np.testing.assert_allclose(pair.f(r), pair.f(-r))

    def test_unknown_kind(self):
        """Unknown kinds are rejected."""
        with pytest.raises(InvalidArgumentError):
            profile("square")

    def test_nonpositive_width(self):
        """Width must be positive."""
        with pytest.raises(InvalidArgumentError):
            profile("gaussian", width=0.0)


class TestSobolevNorms:
    """Tests for sobolev_norms and scale_to_epsilon."""

    def test_gaussian_gradient_norm(self, fine_grid, gaussian_pair):
        """||grad exp(-r^2)|| = 2.4303."""
        norms = sobolev_norms(gaussian_pair, fine_grid)
        assert norms.h1dot_f == pytest.approx(GAUSSIAN_GRAD_NORM, rel=1e-3)
        assert GAUSSIAN_GRAD_NORM == pytest.approx(2.4303, abs=1e-4)
        assert norms.l2_g == 0.0

    def test_epsilon_is_sum_of_parts(self, fine_grid):
        """eps = ||grad f||_{H^1} + ||g||_{H^1}."""
        norms = sobolev_norms(profile("gaussian", velocity_amplitude=1.0), fine_grid)
        assert norms.epsilon == pytest.approx(norms.h1_grad_f + norms.h1_g)
        assert norms.h1_grad_f >= norms.h1dot_f
        assert norms.h1_g >= norms.l2_g

    def test_scale_hits_target(self, fine_grid, gaussian_pair):
        """Rescaled data have exactly the requested size."""
        scaled = scale_to_epsilon(gaussian_pair, fine_grid, 0.05)
        assert sobolev_norms(scaled, fine_grid).epsilon == pytest.approx(0.05, rel=1e-12)
        assert scaled.descriptor["scale"] != 1.0

    def test_scale_to_zero(self, fine_grid, gaussian_pair):
        """Target 0 gives the zero pair."""
        scaled = scale_to_epsilon(gaussian_pair, fine_grid, 0.0)
        assert sobolev_norms(scaled, fine_grid).epsilon == 0.0

    def test_zero_pair_cannot_scale(self, fine_grid):
        """A zero pair cannot reach a nonzero size."""
        with pytest.raises(CannotScaleError):
            scale_to_epsilon(profile("gaussian", amplitude=0.0), fine_grid, 0.1)

    def test_negative_target(self, fine_grid, gaussian_pair):
        """Negative targets are rejected."""
        with pytest.raises(InvalidArgumentError):
            scale_to_epsilon(gaussian_pair, fine_grid, -1.0)

    def test_data_distance(self, fine_grid, gaussian_pair):
        """distance(d, d) = 0 and distance(d, None) = ||grad f|| + ||g||."""
        assert data_distance(gaussian_pair, gaussian_pair, fine_grid) == 0.0
        norms = sobolev_norms(gaussian_pair, fine_grid)
        assert data_distance(gaussian_pair, None, fine_grid) == pytest.approx(norms.h1dot_f + norms.l2_g)


class TestMollifier:
    """Tests for the mollifier family."""

    @pytest.mark.parametrize("k", range(9))
    def test_unit_mass(self, k):
        """rho_{2^k} has mass 1."""
        assert abs(mollifier_kernel(2.0**k).mass() - 1.0) < 1e-10

    def test_support(self):
        """rho_j vanishes beyond 1/j."""
        kernel = mollifier_kernel(4.0)
        assert kernel.support_radius == 0.25
        assert kernel.value(0.25) == 0.0
        assert np.all(kernel(np.array([0.3, 1.0])) == 0.0)
        assert kernel.value(0.0) > 0.0

    def test_scale_below_one(self):
        """j < 1 is not a mollifier scale."""
        with pytest.raises(InvalidArgumentError):
            mollifier_kernel(0.5)

    def test_second_moment_scaling(self):
        """m_2(j) = m_2(1) / j^2."""
        assert mollifier_kernel(4.0).second_moment() == pytest.approx(mollifier_kernel(1.0).second_moment() / 16)

    def test_mollified_gaussian_converges_second_order(self):
        """||rho_j * f - f|| shrinks like j^-2."""
        grid = build_grid(8.0, 400)
        f = profile("gaussian").f
        exact = f(grid.r)
        errors = [l2_norm(mollify_radial(f, j, grid)(grid.r) - exact, grid) for j in (4.0, 8.0, 16.0)]
        assert errors[0] > errors[1] > errors[2]
        for coarse, fine in zip(errors, errors[1:]):
            assert 3.0 < coarse / fine < 5.0

    @pytest.mark.parametrize("k", range(9))
    def test_size_does_not_increase(self, k):
        """Mollification does not increase eps = ||grad f||_{H^1} + ||g||_{H^1} (0.5% slack)."""
        grid = build_grid(8.0, 400)
        pair = profile("gaussian", amplitude=1.0, velocity_amplitude=-0.5)
        base = sobolev_norms(pair, grid).epsilon
        smoothed = sobolev_norms(mollify_pair(pair, 2.0**k, grid), grid).epsilon
        assert smoothed <= base * 1.005

    @pytest.mark.parametrize("j", [1.0, 4.0, 16.0])
    def test_quadratic_gains_second_moment(self, j):
        """rho_j * |x|^2 = |x|^2 + m_2(j)."""
        grid = build_grid(8.0, 400)
        smoothed = mollify_radial(_Quadratic(), j, grid)(grid.r)
        inside = (grid.r >= 1.0) & (grid.r <= 6.0)
        expected = grid.r[inside] ** 2 + mollifier_kernel(j).second_moment()
        np.testing.assert_allclose(smoothed[inside], expected, rtol=1e-7)

    def test_error_rate_bounded_by_scale(self, gaussian_pair):
        """2^k ||rho_{2^k} * f - f|| / ||f||_{H^1} stays bounded for k = 0..8."""
        grid = build_grid(8.0, 400)
        f = gaussian_pair.f
        exact = f(grid.r)
        f_r, _ = radial_derivatives(exact, grid, parity="even")
        h1 = math.sqrt(l2_norm(exact, grid) ** 2 + l2_norm(f_r, grid) ** 2)
        scaled = [2.0**k * l2_norm(mollify_radial(f, 2.0**k, grid)(grid.r) - exact, grid) / h1 for k in range(9)]
        assert max(scaled) <= 1.0
        # The error is second order, so the scaled error keeps falling
        assert scaled[-1] < scaled[0]

    def test_sampled_data_must_resolve_kernel(self):
        """Sampled data with spacing 0.05 cannot resolve rho_8."""
        grid = build_grid(4.0, 80)
        sampled = SampledProfile(grid.r.copy(), np.exp(-grid.r**2))
        with pytest.raises(ResolutionError):
            mollify_radial(sampled, 8.0, grid)

    def test_finest_resolvable_level(self):
        """Spacing 0.05 resolves kernels up to j = 4."""
        grid = build_grid(4.0, 80)
        snap = FieldSnapshot.from_phi(0.0, np.exp(-grid.r**2), np.zeros(grid.size), grid)
        pair = pair_from_snapshot(snap)
        assert finest_resolvable_level(pair, 10) == 2
        assert finest_resolvable_level(profile("gaussian"), 10) == 10

    def test_pair_from_snapshot(self):
        """Restart data reproduce the snapshot fields at the nodes."""
        grid = build_grid(4.0, 80)
        snap = FieldSnapshot.from_phi(1.5, np.exp(-grid.r**2), np.cos(grid.r), grid)
        pair = pair_from_snapshot(snap)
        f, g = pair.sample(grid)
        np.testing.assert_allclose(f, snap.phi, atol=1e-12)
        np.testing.assert_allclose(g, snap.phi_t, atol=1e-12)
        assert pair.descriptor["t"] == 1.5

    def test_telescoping_increments(self, gaussian_pair):
        """Increments are positive and the partial sums accumulate them."""
        grid = build_grid(8.0, 400)
        table = telescoping_increments(gaussian_pair, grid, 3)
        assert list(table.columns) == ["k", "increment", "partial_sum"]
        assert list(table["k"]) == [1, 2, 3]
        assert np.all(table["increment"] > 0)
        np.testing.assert_allclose(table["partial_sum"], np.cumsum(table["increment"]))
