"""
Solve Pipeline

Runs one solve with the standard sinks attached and collects the norms.
"""

from dataclasses import dataclass

from common.logging_config import get_logger
from initial_data.types import DataPair
from radial_grid.core import RadialGrid
from spacetime_norms.core import finalize
from spacetime_norms.types import NormAccumulator, NormReport
from wave_solver.core import solve_linear, solve_quasilinear
from wave_solver.sinks import TraceRecorder
from wave_solver.types import CoefficientField, ForcingFn, Nonlinearity, SolveOutcome

logger = get_logger("wave_pipeline")


@dataclass
class PipelineResult:
    """Result from the solve pipeline."""

    outcome: SolveOutcome
    # None when the run stopped before a second level
    norms: NormReport | None
    trace: TraceRecorder | None


def solve_and_measure(
    pair: DataPair,
    T: float,
    grid: RadialGrid,
    nl: Nonlinearity | None = None,
    h: CoefficientField | None = None,
    F: ForcingFn | None = None,
    trace_stride: int | None = None,
    order: int = 2,
) -> PipelineResult:
    """
    Run a solve -> norm accumulation pipeline.

    With nl given the quasilinear equation is solved (h and F are ignored),
    otherwise the linear one with coefficient h and forcing F.

    Args:
        pair: Initial data
        T: Final time
        grid: RadialGrid
        nl: Nonlinearity for a quasilinear run
        h: Coefficient of a linear run
        F: Forcing of a linear run
        trace_stride: Record every trace_stride-th level and node (None: no trace)
        order: Norm order, 1 or 2

    Returns:
        PipelineResult with the outcome, the norms over the levels actually run,
        and the trace if requested
    """
    norms = NormAccumulator(order=order)
    trace = TraceRecorder(trace_stride, trace_stride) if trace_stride else None
    sinks = (norms,) if trace is None else (norms, trace)

    logger.info(f"Starting solve pipeline: T={T}, nr={grid.nr}, {'linear' if nl is None else 'quasilinear'}")
    if nl is not None:
        outcome = solve_quasilinear(pair, nl, T, grid, sinks=sinks)
    else:
        outcome = solve_linear(pair, h, F, T, grid, sinks=sinks)

    report = finalize(norms) if norms.levels > 1 and norms.t_last > norms.t_first else None
    logger.info(f"Solve finished: {outcome.status} after {outcome.steps} steps")
    return PipelineResult(outcome=outcome, norms=report, trace=trace)
