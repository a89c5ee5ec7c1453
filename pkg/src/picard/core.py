"""
Picard Iteration

Successive approximation for the quasilinear equation:

    phi_{-1} = 0
    d_t^2 phi_k - Delta phi_k + h(phi_{k-1}) Delta phi_k = F(d phi_{k-1})
    (phi_k, d_t phi_k)(0) = (rho_{2^k} * f, rho_{2^k} * g)

Input: DataPair, Nonlinearity, T, RadialGrid
Output: IterationReport with the E1 + Y1 size of every increment phi_k - phi_{k-1}

Each stage keeps only its streamed norms and a time table of (u, u_t), which is
the frozen coefficient of the next stage and the reference of its difference norms.
"""

import math

import numpy as np

from common.config import H_ADMISSIBLE, PICARD_K_MAX, PICARD_TABLE_STRIDE, PICARD_TOL
from common.errors import AdmissibilityFailure, CoefficientBoundViolation, InvalidArgumentError
from common.logging_config import get_logger
from common.metrics import picard_iterations
from initial_data.core import data_distance, mollify_pair, sobolev_norms
from initial_data.types import DataPair
from picard.types import IterationRecord, IterationReport
from radial_grid.core import RadialGrid
from spacetime_norms.core import finalize
from spacetime_norms.types import NormAccumulator
from wave_solver.core import solve_linear
from wave_solver.sinks import AdmissibilityMonitor, DifferenceSink, LevelTable
from wave_solver.types import CoefficientField, Nonlinearity

logger = get_logger("picard")


class IterateCoefficients:
    """h(phi_{k-1}) and F(d phi_{k-1}) read from the previous stage's table."""

    def __init__(self, table: LevelTable, nl: Nonlinearity):
        self.table = table
        self.nl = nl
        self._t: float | None = None
        self._cache: tuple[np.ndarray, ...] = ()

    def _fields(self, t: float) -> tuple[np.ndarray, ...]:
        if t != self._t:
            snap = self.table.fields_at(t)
            phi, phi_t, phi_r = snap.phi, snap.phi_t, snap.phi_r
            slope = self.nl.h_prime(phi)
            self._cache = (
                self.nl.h(phi),
                slope * phi_t,
                slope * phi_r,
                self.nl.forcing(phi_t, phi_r),
            )
            self._t = t
        return self._cache

    def coefficient(self) -> CoefficientField:
        return CoefficientField(
            value=lambda t, r: self._fields(t)[0],
            gradient=lambda t, r: (self._fields(t)[1], self._fields(t)[2]),
            label="previous iterate",
        )

    def forcing(self, t: float, r: np.ndarray) -> np.ndarray:
        return self._fields(t)[3]


def run(
    pair: DataPair,
    nl: Nonlinearity,
    T: float,
    grid: RadialGrid,
    k_max: int = PICARD_K_MAX,
    tol: float = PICARD_TOL,
    table_stride: int = PICARD_TABLE_STRIDE,
    mollify: bool = True,
) -> IterationReport:
    """
    Run the successive approximation up to k_max stages.

    Args:
        pair: Initial data (f, g)
        nl: Nonlinearity defining h and F
        T: Final time
        grid: RadialGrid shared by every stage
        k_max: Last stage index
        tol: Stop once e1_diff + y1_diff < tol
        table_stride: Steps between recorded coefficient levels (<= 4)
        mollify: Smooth the data at scale 2^k for stage k

    Returns:
        IterationReport

    Raises:
        AdmissibilityFailure: sup |h(phi_k)| > 1/6 at stage k (partial report attached)
    """
    if k_max < 0:
        raise InvalidArgumentError(f"k_max must be >= 0, got {k_max}")
    if not 1 <= table_stride <= 4:
        raise InvalidArgumentError(f"table_stride must lie in [1, 4], got {table_stride}")

    epsilon = sobolev_norms(pair, grid).epsilon
    report = IterationReport(epsilon=epsilon, T=T, nl=nl.to_dict())
    logger.info(f"Picard run: eps={epsilon:.4g}, T={T}, k_max={k_max}, nl={nl.to_dict()}")

    previous_table: LevelTable | None = None
    previous_data: DataPair | None = None

    for k in range(k_max + 1):
        data = mollify_pair(pair, 2.0**k, grid) if mollify else pair

        if previous_table is None:
            h, forcing = CoefficientField.zero(), None
        else:
            frozen = IterateCoefficients(previous_table, nl)
            h, forcing = frozen.coefficient(), frozen.forcing

        table = LevelTable(grid, stride=table_stride)
        norms = NormAccumulator(order=2)
        diff = DifferenceSink(previous_table)
        monitor = AdmissibilityMonitor(nl, bound=H_ADMISSIBLE)

        try:
            outcome = solve_linear(data, h, forcing, T, grid, sinks=(table, norms, diff, monitor))
        except CoefficientBoundViolation as e:
            raise AdmissibilityFailure(f"Stage k={k}: {e}", k=k, partial=report) from e
        if not outcome.completed:
            raise AdmissibilityFailure(
                f"Stage k={k} stopped early: {outcome.status} at t={outcome.t_event}",
                k=k,
                partial=report,
            )

        stage = finalize(norms)
        difference = diff.report()
        record = IterationRecord(
            k=k,
            e1_diff=difference.E1,
            y1_diff=difference.Y1,
            e2_k=stage.E2,
            y2_k=stage.Y2,
            z2_k=stage.Z2,
            sup_h=monitor.sup_h,
            admissible=monitor.admissible,
            data_increment=data_distance(data, previous_data, grid),
        )
        report.records.append(record)
        picard_iterations.add(1)
        logger.info(
            f"Stage k={k}: e1_diff={record.e1_diff:.3e}, y1_diff={record.y1_diff:.3e}, "
            f"sup|h|={record.sup_h:.3e}"
        )

        if not record.admissible:
            raise AdmissibilityFailure(
                f"Stage k={k} left the admissible ball: sup|h| = {record.sup_h:.4g} > 1/6",
                k=k,
                sup_h=record.sup_h,
                partial=report,
            )

        report.final_table = table
        previous_table, previous_data = table, data

        if record.diff < tol:
            report.converged = True
            report.stop_reason = "tolerance"
            break

    return report


def contraction_ratios(report: IterationReport) -> list[float | None]:
    """
    Ratios (e1_diff_k + y1_diff_k) / (e1_diff_{k-1} + y1_diff_{k-1}) for k >= 1.

    A zero denominator gives None (undefined entry).

    Raises:
        InvalidArgumentError: fewer than 3 records
    """
    if len(report.records) < 3:
        raise InvalidArgumentError(f"Need at least 3 records, got {len(report.records)}")
    ratios: list[float | None] = []
    for prev, cur in zip(report.records, report.records[1:]):
        ratios.append(cur.diff / prev.diff if prev.diff > 0 else None)
    return ratios


def contraction_threshold(c4: float, m1: float, epsilon: float, T: float) -> dict:
    """Smallness condition C4 * 2 M1 eps (1+T)^{1/2} <= 1/4."""
    value = c4 * 2.0 * m1 * epsilon * math.sqrt(1.0 + T)
    return {"value": value, "bound": 0.25, "satisfied": value <= 0.25}


def estimate_constants(reports: list[IterationReport]) -> dict:
    """
    Empirical stand-ins for the iteration constants.

    M1 = max over runs and stages of (E2 + Y2 + Z2)(phi_k) / eps, C4 = max over
    k >= 1 of the increment size per unit of data increment, and
    A2 = 1 / (2 * 8^2 * C4^2 * M1^2).
    """
    m1 = 0.0
    c4 = 0.0
    for report in reports:
        if report.epsilon <= 0:
            continue
        for record in report.records:
            m1 = max(m1, (record.e2_k + record.y2_k + record.z2_k) / report.epsilon)
            if record.k >= 1 and record.data_increment > 0:
                c4 = max(c4, record.diff / record.data_increment)

    a2 = 1.0 / (2.0 * 64.0 * c4**2 * m1**2) if c4 > 0 and m1 > 0 else None
    return {"C4": c4, "M1": m1, "A2": a2}
