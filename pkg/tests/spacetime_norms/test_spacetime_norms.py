"""Tests for streamed energy and weighted space-time norms."""

import math

import numpy as np
import pytest

from common.errors import InvalidArgumentError, SequencingError
from radial_grid.core import FieldSnapshot, build_grid, radial_integral
from spacetime_norms.core import (
    accumulate_level,
    conserved_energy,
    energy,
    finalize,
    merge,
)
from spacetime_norms.types import NormAccumulator


@pytest.fixture
def grid():
    return build_grid(8.0, 160)


def _static(grid, t, scale=1.0):
    """phi = scale exp(-r^2), d_t phi = 0, d_t^2 phi = 0."""
    phi = scale * np.exp(-grid.r**2)
    return FieldSnapshot.from_phi(t, phi, np.zeros(grid.size), grid, phi_tt=np.zeros(grid.size))


def _levels(grid, times, scale=1.0):
    return [_static(grid, t, scale) for t in times]


class TestEnergy:
    """Tests for instantaneous energies."""

    def test_order_one(self, grid):
        """E1 candidate = ||grad phi|| + ||d_t phi||."""
        snap = _static(grid, 0.0)
        expected = math.sqrt(radial_integral(snap.phi_r**2, grid))
        assert energy(snap, grid, order=1) == pytest.approx(expected)

    def test_order_two_adds_hessian(self, grid):
        """E2 candidate exceeds E1 by the second-order terms."""
        snap = _static(grid, 0.0)
        assert energy(snap, grid, order=2) > energy(snap, grid, order=1)

    def test_invalid_order(self, grid):
        """Only orders 1 and 2 exist."""
        with pytest.raises(InvalidArgumentError):
            energy(_static(grid, 0.0), grid, order=3)

    def test_conserved_energy_is_quadratic_sum(self, grid):
        """(||d_t phi||^2 + ||grad phi||^2)^{1/2} for a static field is ||grad phi||."""
        snap = _static(grid, 0.0)
        assert conserved_energy(snap, grid) == pytest.approx(energy(snap, grid, order=1))


class TestAccumulator:
    """Tests for accumulate_level, merge and finalize."""

    def test_static_field_integrals(self, grid):
        """A static field integrates to T times its spatial density."""
        acc = NormAccumulator(order=2)
        for snap in _levels(grid, np.linspace(0.0, 2.0, 9)):
            acc.accept(snap)
        phi = _static(grid, 0.0).phi
        assert acc.integral("I1") == pytest.approx(2.0 * radial_integral(phi**2, grid, -0.5), rel=1e-12)
        assert acc.levels == 9

    def test_weighted_integrals_below_unweighted(self, grid):
        """<r>^{-1/2} weights only shrink the integrands."""
        acc = NormAccumulator(order=2)
        for snap in _levels(grid, [0.0, 1.0]):
            acc.accept(snap)
        for z, y in (("J1", "I1"), ("J2", "I2"), ("J1d", "I1d"), ("J2d", "I2d")):
            assert acc.integral(z) <= acc.integral(y)

    def test_finalize_prefactors(self, grid):
        """Y1^2 = (1+T)^{-1/2} (I1 + I2), Z1^2 = (log(2+T))^{-1} (J1 + J2)."""
        acc = NormAccumulator(order=1)
        for snap in _levels(grid, np.linspace(0.0, 3.0, 7)):
            acc.accept(snap)
        report = finalize(acc)
        assert report.T == pytest.approx(3.0)
        assert report.Y1**2 == pytest.approx((acc.integral("I1") + acc.integral("I2")) / 2.0)
        assert report.Z1**2 == pytest.approx((acc.integral("J1") + acc.integral("J2")) / math.log(5.0))
        assert report.E2 is None

    def test_second_order_report(self, grid):
        """Order 2 reports E2 >= E1 and Y2 >= Y1."""
        acc = NormAccumulator(order=2)
        for snap in _levels(grid, [0.0, 0.5, 1.0]):
            acc.accept(snap)
        report = finalize(acc)
        assert report.E2 >= report.E1
        assert report.Y2 >= report.Y1
        assert report.Z2 >= report.Z1

    def test_zero_field(self, grid):
        """The zero field has all norms zero."""
        acc = NormAccumulator(order=2)
        for snap in _levels(grid, [0.0, 1.0], scale=0.0):
            acc.accept(snap)
        report = finalize(acc)
        assert (report.E1, report.Y1, report.Z1, report.E2, report.Y2, report.Z2) == (0, 0, 0, 0, 0, 0)

    def test_homogeneous_of_degree_one(self, grid):
        """Norms are homogeneous of degree one."""
        reports = []
        for scale in (1.0, 3.0):
            acc = NormAccumulator(order=1)
            for snap in _levels(grid, [0.0, 1.0], scale):
                acc.accept(snap)
            reports.append(finalize(acc))
        assert reports[1].Y1 == pytest.approx(3.0 * reports[0].Y1)
        assert reports[1].E1 == pytest.approx(3.0 * reports[0].E1)

    def test_out_of_order_level(self, grid):
        """A level earlier than the last one is a sequencing error."""
        acc = NormAccumulator(order=1)
        acc.accept(_static(grid, 1.0))
        with pytest.raises(SequencingError):
            accumulate_level(acc, _static(grid, 0.5), grid)

    def test_repeated_level_is_zero_width(self, grid):
        """A level repeated at the same time adds nothing."""
        acc = NormAccumulator(order=1)
        for snap in _levels(grid, [0.0, 1.0, 1.0]):
            acc.accept(snap)
        single = NormAccumulator(order=1)
        for snap in _levels(grid, [0.0, 1.0]):
            single.accept(snap)
        np.testing.assert_allclose(acc.integrals, single.integrals)

    def test_finalize_needs_positive_span(self, grid):
        """A single level spans no time."""
        acc = NormAccumulator(order=1)
        acc.accept(_static(grid, 0.0))
        with pytest.raises(InvalidArgumentError):
            finalize(acc)

    def test_merge_matches_single_pass(self, grid):
        """Slabs [0, 1] and [1, 2] merge into the single-pass result."""
        times = np.linspace(0.0, 2.0, 9)
        full = NormAccumulator(order=2)
        first = NormAccumulator(order=2)
        second = NormAccumulator(order=2)
        for snap in _levels(grid, times):
            full.accept(snap)
        for snap in _levels(grid, times[:5]):
            first.accept(snap)
        for snap in _levels(grid, times[4:]):
            second.accept(snap)

        merged = merge(second, first)
        np.testing.assert_allclose(merged.integrals, full.integrals, rtol=1e-12)
        assert merged.levels == full.levels
        assert finalize(merged).Y2 == pytest.approx(finalize(full).Y2, rel=1e-12)

    def test_merge_rejects_gap(self, grid):
        """Slabs that do not abut cannot merge."""
        first = NormAccumulator(order=1)
        second = NormAccumulator(order=1)
        for snap in _levels(grid, [0.0, 1.0]):
            first.accept(snap)
        for snap in _levels(grid, [1.5, 2.0]):
            second.accept(snap)
        with pytest.raises(SequencingError):
            merge(first, second)
