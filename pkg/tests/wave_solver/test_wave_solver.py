"""Tests for the leapfrog solvers, the free-wave oracle and the level sinks."""

import numpy as np
import pytest
from conftest import requires_slow

from common.errors import CoefficientBoundViolation, InvalidArgumentError, SequencingError
from initial_data.core import profile
from radial_grid.core import FieldSnapshot, build_grid, l2_norm
from spacetime_norms.core import conserved_energy
from wave_solver.core import dalembert_free, solve_linear, solve_quasilinear
from wave_solver.sinks import AdmissibilityMonitor, DifferenceSink, LevelTable, TraceRecorder
from wave_solver.types import CoefficientField, Nonlinearity


def _final_error(pair, T, grid):
    outcome = solve_linear(pair, None, None, T, grid)
    exact = dalembert_free(pair, T, grid.r)
    return l2_norm(outcome.final.phi - exact, grid)


def _energy_drift(pair, T, grid):
    table = LevelTable(grid, stride=1)
    solve_linear(pair, None, None, T, grid, sinks=[table])
    first = conserved_energy(table.snapshot(0), grid)
    last = conserved_energy(table.final, grid)
    return abs(last - first) / first


class TestDalembert:
    """Tests for the exact free-wave oracle."""

    def test_initial_time_returns_data(self, gaussian_pair):
        """phi(0, r) = f(r)."""
        r = np.linspace(0.0, 4.0, 41)
        np.testing.assert_allclose(dalembert_free(gaussian_pair, 0.0, r), np.exp(-(r**2)), atol=1e-12)

    def test_closed_form(self, gaussian_pair):
        """Gaussian position data: phi = [(r+t) e^{-(r+t)^2} + (r-t) e^{-(r-t)^2}] / (2r)."""
        r = np.array([0.5, 1.0, 2.5, 4.0])
        t = 1.7
        expected = ((r + t) * np.exp(-((r + t) ** 2)) + (r - t) * np.exp(-((r - t) ** 2))) / (2 * r)
        np.testing.assert_allclose(dalembert_free(gaussian_pair, t, r), expected, atol=1e-12)

    def test_scalar_input(self, velocity_pair):
        """A scalar radius gives a float."""
        assert isinstance(dalembert_free(velocity_pair, 1.0, 0.5), float)

    def test_negative_time(self, gaussian_pair):
        """t < 0 is rejected."""
        with pytest.raises(InvalidArgumentError):
            dalembert_free(gaussian_pair, -1.0, 1.0)


class TestLinearSolver:
    """Tests for solve_linear."""

    def test_second_order_convergence(self, gaussian_pair):
        """Halving dr divides the error against d'Alembert by about 4."""
        errors = [_final_error(gaussian_pair, 3.0, build_grid(20.0, nr)) for nr in (200, 400, 800)]
        assert errors[0] > errors[1] > errors[2]
        for coarse, fine in zip(errors, errors[1:]):
            assert 3.0 < coarse / fine < 5.0

    def test_energy_drift(self, gaussian_pair, wave_grid):
        """The free energy drifts by less than 1% on a coarse mesh."""
        assert _energy_drift(gaussian_pair, 3.0, wave_grid) < 1e-2

    @requires_slow
    def test_energy_drift_fine_mesh(self, gaussian_pair):
        """The free energy drifts by at most 1e-4 on a fine mesh."""
        assert _energy_drift(gaussian_pair, 3.0, build_grid(16.0, 4096)) <= 1e-4

    def test_zero_data_stay_zero(self, wave_grid):
        """Zero data and no forcing give the zero solution."""
        outcome = solve_linear(profile("gaussian", amplitude=0.0), None, None, 1.0, wave_grid)
        assert outcome.completed
        assert np.all(outcome.final.u == 0.0)
        assert outcome.final.t == pytest.approx(1.0)

    def test_coefficient_above_half(self, gaussian_pair, wave_grid):
        """sup |h| = 0.6 leaves the admissible class at the first level."""
        with pytest.raises(CoefficientBoundViolation):
            solve_linear(gaussian_pair, CoefficientField.gaussian(0.6), None, 1.0, wave_grid)

    def test_coefficient_sets_cfl_violation(self, gaussian_pair):
        """A step sized for |h| <= 1/6 is unstable when sup |h| = 0.4."""
        grid = build_grid(16.0, 320, coeff_bound=0.0)
        outcome = solve_linear(gaussian_pair, CoefficientField.gaussian(0.4), None, 1.0, grid)
        assert outcome.status == "cfl_violation"

    def test_coefficient_statistics(self, gaussian_pair, wave_grid):
        """The run records sup |h| of the coefficient."""
        outcome = solve_linear(gaussian_pair, CoefficientField.gaussian(0.1), None, 0.5, wave_grid)
        assert outcome.completed
        assert outcome.max_abs_h == pytest.approx(0.1)
        assert outcome.max_weighted_dh > 0.0

    def test_needs_data_or_restart(self, wave_grid):
        """A solve without data or restart is rejected."""
        with pytest.raises(InvalidArgumentError):
            solve_linear(None, None, None, 1.0, wave_grid)

    def test_restart_continues_time_and_steps(self, gaussian_pair, wave_grid):
        """A restart resumes from the snapshot time and step count."""
        first = solve_linear(gaussian_pair, None, None, 1.0, wave_grid)
        second = solve_linear(None, None, None, 1.0, wave_grid, start=first.final)
        assert second.final.t == pytest.approx(2.0)
        assert second.final.step == first.final.step + second.steps


class TestQuasilinearSolver:
    """Tests for solve_quasilinear."""

    def test_free_equation_matches_linear(self, gaussian_pair, wave_grid):
        """With a = b = lam = 0 the quasilinear solve is the free wave."""
        linear = solve_linear(gaussian_pair, None, None, 2.0, wave_grid)
        quasi = solve_quasilinear(gaussian_pair, Nonlinearity(), 2.0, wave_grid)
        assert quasi.completed
        np.testing.assert_array_equal(quasi.final.u, linear.final.u)

    def test_riccati_blowup(self, velocity_pair, wave_grid):
        """a (d_t phi)^2 with a = 5 blows up well before T = 5."""
        outcome = solve_quasilinear(velocity_pair, Nonlinearity(a=5.0), 5.0, wave_grid)
        assert outcome.status == "blowup"
        assert outcome.criterion in ("non-finite", "energy-growth")
        assert 0.0 < outcome.t_star < 5.0

    def test_small_data_complete(self, wave_grid):
        """Small data of a mild nonlinearity stay admissible."""
        pair = profile("gaussian", amplitude=0.05)
        monitor = AdmissibilityMonitor(Nonlinearity(lam=1.0))
        outcome = solve_quasilinear(pair, Nonlinearity(a=1.0, b=1.0, lam=1.0), 2.0, wave_grid, sinks=[monitor])
        assert outcome.completed
        assert outcome.t_star is None
        assert monitor.admissible

    def test_coefficient_bound_blowup(self, wave_grid):
        """h(phi) = lam phi above 1/2 at t = 0 is a blow-up."""
        outcome = solve_quasilinear(profile("gaussian"), Nonlinearity(lam=1.0), 1.0, wave_grid)
        assert outcome.status == "blowup"
        assert outcome.criterion == "coefficient-bound"
        assert outcome.t_event == 0.0

    def test_unknown_h_kind(self):
        """h must be linear or quadratic in phi."""
        with pytest.raises(InvalidArgumentError):
            Nonlinearity(h_kind="cubic")


class TestSinks:
    """Tests for the level sinks."""

    def test_trace_stride_keeps_final(self, gaussian_pair, wave_grid):
        """Decimated traces keep every stride-th level and the final one."""
        trace = TraceRecorder(time_stride=5, radius_stride=4)
        outcome = solve_linear(gaussian_pair, None, None, 1.0, wave_grid, sinks=[trace])
        frame = trace.to_frame()
        assert list(frame.columns) == ["t", "r", "phi", "phi_t"]
        assert frame["t"].iloc[-1] == pytest.approx(1.0)
        assert len(trace) == outcome.steps // 5 + 1 + (outcome.steps % 5 != 0)
        assert outcome.trace is trace

    def test_trace_csv(self, gaussian_pair, wave_grid, tmp_path):
        """The trace is written as CSV."""
        trace = TraceRecorder(time_stride=10)
        solve_linear(gaussian_pair, None, None, 0.5, wave_grid, sinks=[trace])
        path = trace.write_csv(tmp_path / "trace.csv")
        assert path.read_text().startswith("t,r,phi,phi_t")

    def test_level_table_interpolates(self, gaussian_pair, wave_grid):
        """Interpolation reproduces recorded levels and clamps at the ends."""
        table = LevelTable(wave_grid, stride=2)
        solve_linear(gaussian_pair, None, None, 1.0, wave_grid, sinks=[table])
        snap = table.snapshot(3)
        u, _ = table.interpolate(snap.t)
        np.testing.assert_allclose(u, snap.u)
        u_late, _ = table.interpolate(10.0)
        np.testing.assert_array_equal(u_late, table.final.u)

    def test_level_table_rejects_out_of_order(self, wave_grid):
        """Levels must arrive in time order."""
        table = LevelTable(wave_grid, stride=1)
        zeros = np.zeros(wave_grid.size)
        table.accept(FieldSnapshot(t=1.0, u=zeros, u_t=zeros, grid=wave_grid, step=1))
        with pytest.raises(SequencingError):
            table.accept(FieldSnapshot(t=0.5, u=zeros, u_t=zeros, grid=wave_grid, step=2))

    def test_difference_with_itself_is_zero(self, gaussian_pair, wave_grid):
        """A run compared with its own table has zero difference norms."""
        table = LevelTable(wave_grid, stride=2)
        solve_linear(gaussian_pair, None, None, 1.0, wave_grid, sinks=[table])
        diff = DifferenceSink(table)
        solve_linear(gaussian_pair, None, None, 1.0, wave_grid, sinks=[diff])
        assert diff.e1_plus_y1() == 0.0
        assert diff.max_abs_diff == 0.0

    def test_difference_without_reference(self, gaussian_pair, wave_grid):
        """Without a reference the sink measures the run itself."""
        diff = DifferenceSink(None)
        solve_linear(gaussian_pair, None, None, 1.0, wave_grid, sinks=[diff])
        assert diff.report().E1 > 0.0
