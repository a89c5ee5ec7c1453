"""Tests for the Picard iteration and its constants."""

import math

import numpy as np
import pytest

from common.errors import AdmissibilityFailure, InvalidArgumentError
from initial_data.core import profile, scale_to_epsilon
from picard.core import contraction_ratios, contraction_threshold, estimate_constants, run
from picard.types import IterationRecord, IterationReport
from radial_grid.core import build_grid
from wave_solver.core import solve_quasilinear
from wave_solver.types import Nonlinearity

MILD = Nonlinearity(a=1.0, b=1.0, lam=1.0)


@pytest.fixture
def grid():
    return build_grid(12.0, 240)


def _record(k, diff, increment=1.0, size=1.0):
    return IterationRecord(
        k=k,
        e1_diff=diff,
        y1_diff=0.0,
        e2_k=size,
        y2_k=0.0,
        z2_k=0.0,
        sup_h=0.0,
        admissible=True,
        data_increment=increment,
    )


class TestRun:
    """Tests for the stage loop."""

    def test_zero_data_converge_at_once(self, grid):
        """Zero data give a zero first stage and stop on tolerance."""
        report = run(profile("gaussian", amplitude=0.0), MILD, 1.0, grid, k_max=5)
        assert report.converged
        assert report.stop_reason == "tolerance"
        assert len(report.records) == 1
        assert report.records[0].diff == 0.0

    def test_small_data_increments_shrink(self, grid):
        """Increments of small data decrease along the iteration."""
        report = run(profile("gaussian", amplitude=0.01), MILD, 2.0, grid, k_max=4, tol=0.0)
        assert [r.k for r in report.records] == [0, 1, 2, 3, 4]
        assert report.stop_reason == "k_max"
        assert report.records[-1].diff < report.records[1].diff
        assert all(r.admissible for r in report.records)
        assert report.final_table is not None

    def test_contracts_to_quasilinear_solution(self, grid):
        """
        eps = 0.01, T = 1, (a, b, lam) = (1, 0, 1): ratios <= 1/2 from k = 2, and the
        last iterate sits within three discretization errors of the quasilinear solve.
        """
        nl = Nonlinearity(a=1.0, b=0.0, lam=1.0)
        pair = scale_to_epsilon(profile("gaussian"), grid, 0.01)
        report = run(pair, nl, 1.0, grid, k_max=6, tol=0.0)
        ratios = contraction_ratios(report)
        assert all(ratio is not None and ratio <= 0.5 for ratio in ratios[1:])

        coarse = solve_quasilinear(pair, nl, 1.0, grid)
        fine = solve_quasilinear(pair, nl, 1.0, grid.refined(2))
        assert coarse.completed and fine.completed
        discretization = np.max(np.abs(coarse.final.phi - fine.final.phi[::2]))
        iterate = report.final_table.final.phi
        assert np.max(np.abs(iterate - coarse.final.phi)) <= 3.0 * discretization

    def test_first_increment_is_first_stage(self, grid):
        """phi_{-1} = 0, so the k = 0 increment is the size of phi_0."""
        report = run(profile("gaussian", amplitude=0.01), MILD, 1.0, grid, k_max=0)
        first = report.records[0]
        assert first.e1_diff > 0.0
        assert first.e2_k >= first.e1_diff

    def test_inadmissible_stage(self, grid):
        """sup |h(phi_0)| = 0.4 > 1/6 stops the run with a partial report."""
        with pytest.raises(AdmissibilityFailure) as excinfo:
            run(profile("gaussian", amplitude=0.4), MILD, 1.0, grid, k_max=3, mollify=False)
        assert excinfo.value.k == 0
        assert excinfo.value.sup_h == pytest.approx(0.4, abs=1e-3)
        assert len(excinfo.value.partial.records) == 1

    def test_report_serializes(self, grid):
        """to_dict drops the level table."""
        report = run(profile("gaussian", amplitude=0.0), MILD, 1.0, grid, k_max=1)
        payload = report.to_dict()
        assert "final_table" not in payload
        assert payload["records"][0]["k"] == 0

    @pytest.mark.parametrize("kwargs", [{"k_max": -1}, {"table_stride": 5}, {"table_stride": 0}])
    def test_invalid_arguments(self, grid, kwargs):
        """k_max must be nonnegative and the table stride in [1, 4]."""
        with pytest.raises(InvalidArgumentError):
            run(profile("gaussian"), MILD, 1.0, grid, **kwargs)


class TestConstants:
    """Tests for contraction ratios and the iteration constants."""

    def test_ratios(self):
        """Ratios of consecutive increments."""
        report = IterationReport(epsilon=1.0, T=1.0, nl={})
        report.records = [_record(0, 1.0), _record(1, 0.5), _record(2, 0.125)]
        assert contraction_ratios(report) == [0.5, 0.25]

    def test_zero_denominator_gives_none(self):
        """A zero increment leaves the next ratio undefined."""
        report = IterationReport(epsilon=1.0, T=1.0, nl={})
        report.records = [_record(0, 1.0), _record(1, 0.0), _record(2, 0.0)]
        assert contraction_ratios(report) == [0.0, None]

    def test_ratios_need_three_records(self):
        """Fewer than three stages give no ratios."""
        report = IterationReport(epsilon=1.0, T=1.0, nl={})
        report.records = [_record(0, 1.0), _record(1, 0.5)]
        with pytest.raises(InvalidArgumentError):
            contraction_ratios(report)

    def test_threshold(self):
        """C4 * 2 M1 eps (1+T)^{1/2} against 1/4."""
        result = contraction_threshold(c4=1.0, m1=2.0, epsilon=0.01, T=3.0)
        assert result["value"] == pytest.approx(0.08)
        assert result["satisfied"]
        assert not contraction_threshold(c4=1.0, m1=2.0, epsilon=0.1, T=3.0)["satisfied"]

    def test_estimate_constants(self):
        """M1 is the largest stage size per eps, C4 the largest increment per data increment."""
        report = IterationReport(epsilon=0.5, T=1.0, nl={})
        report.records = [
            _record(0, 1.0, increment=0.5, size=1.0),
            _record(1, 0.2, increment=0.1, size=1.5),
            _record(2, 0.05, increment=0.05, size=1.2),
        ]
        constants = estimate_constants([report])
        assert constants["M1"] == pytest.approx(3.0)
        assert constants["C4"] == pytest.approx(2.0)
        assert constants["A2"] == pytest.approx(1.0 / (2 * 64 * 4.0 * 9.0))

    def test_constants_without_data(self):
        """Zero-size runs leave A2 undefined."""
        report = IterationReport(epsilon=0.0, T=1.0, nl={})
        report.records = [_record(0, 0.0)]
        constants = estimate_constants([report])
        assert constants == {"C4": 0.0, "M1": 0.0, "A2": None}
        assert math.isfinite(constants["M1"])
