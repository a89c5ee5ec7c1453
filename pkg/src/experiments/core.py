"""
Experiments

Desk-scale drivers for the headline claims:

- lifespan_sweep: blow-up time against data size, with a log-linear fit of
  log T_star against 1/eps,
- continuation_run: a quasilinear run split into restarted segments,
- continuity_probe / continuity_directions: difference quotients of the solution
  map in E1 + Y1 against the data distance in Hdot^1 x L^2,
- constants_ledger: empirical stand-ins for the smallness constants.

Blow-up and budget exhaustion are data, never errors.
"""

import dataclasses
import math
from collections.abc import Iterable, Sequence

import numpy as np
from scipy.stats import linregress

from common.config import (
    COEFF_BOUND_MAX,
    CONTINUITY_DIRECTIONS,
    GRID_POLICY_DR,
    H_ADMISSIBLE,
    LIFESPAN_PROFILE_WIDTH,
    LIFESPAN_SIZE_MODES,
    LIFESPAN_T_BUDGET,
)
from common.errors import AdmissibilityFailure, InvalidArgumentError, LifespanOrderViolation
from common.logging_config import get_logger
from common.metrics import experiment_points
from common.parallel import map_ordered
from estimate_harness.types import EnergyInequalityRecord, SobolevRecord
from experiments.types import (
    ConstantsLedger,
    FitResult,
    LifespanPoint,
    LipschitzPoint,
    LipschitzReport,
)
from initial_data.core import (
    data_distance,
    finest_resolvable_level,
    mollify_pair,
    pair_from_snapshot,
    profile,
    scale_to_epsilon,
    sobolev_norms,
)
from initial_data.types import DataPair
from radial_grid.core import FieldSnapshot, RadialGrid, grid_policy
from wave_solver.core import solve_quasilinear
from wave_solver.sinks import AdmissibilityMonitor, DifferenceSink, LevelTable
from wave_solver.types import LevelSink, Nonlinearity, SolveOutcome

logger = get_logger("experiments")


# =============================================================================
# Lifespan
# =============================================================================


def default_lifespan_shape() -> DataPair:
    """
    Wide Gaussian velocity profile with unit peak; the (d_t phi)^2 term drives blow-up from it.

    Near the center the data are nearly homogeneous for t well below the width, so
    the run follows phi_tt = a phi_t^2 there and T_star grows like 1/eps.
    """
    return profile("gaussian", amplitude=0.0, width=LIFESPAN_PROFILE_WIDTH, velocity_amplitude=1.0)


def check_lifespan_order(points: Sequence[LifespanPoint]) -> None:
    """
    Raise unless T_star is nondecreasing as eps decreases.

    Raises:
        LifespanOrderViolation: a smaller eps stopped before a larger one
    """
    ordered = sorted(points, key=lambda p: -p.epsilon)
    for larger, smaller in zip(ordered, ordered[1:]):
        if smaller.t_star < larger.t_star:
            raise LifespanOrderViolation(
                f"Lifespan not monotone: eps={smaller.epsilon:g} stopped at t={smaller.t_star:.6g}, "
                f"before eps={larger.epsilon:g} at t={larger.t_star:.6g}"
            )


def fit_lifespan(points: Sequence[LifespanPoint]) -> FitResult:
    """
    Least squares of log T_star against 1/eps over the blow-up points.

    Fewer than 3 blow-up points leave the fit undefined (reason recorded).
    """
    ordered = sorted(points, key=lambda p: -p.epsilon)
    t_values = [p.t_star for p in ordered]
    monotone = all(b >= a for a, b in zip(t_values, t_values[1:]))

    blown = [p for p in ordered if not p.exhausted]
    if len(blown) < 3:
        return FitResult(points=len(blown), monotone=monotone, reason="fewer than 3 blow-up points")

    x = np.array([1.0 / p.epsilon for p in blown])
    y = np.log([p.t_star for p in blown])
    if np.ptp(x) == 0:
        return FitResult(points=len(blown), monotone=monotone, reason="degenerate eps values")
    fit = linregress(x, y)
    return FitResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
        points=len(blown),
        monotone=monotone,
    )


def lifespan_sweep(
    eps_list: Iterable[float],
    nl: Nonlinearity,
    T_budget: float = LIFESPAN_T_BUDGET,
    shape: DataPair | None = None,
    dr: float = GRID_POLICY_DR,
    threads: int = 1,
    size: str = "amplitude",
) -> tuple[list[LifespanPoint], FitResult]:
    """
    Run the quasilinear equation to blow-up or budget for each data size.

    Every run gets its own grid sized to hold the light cone of the data over the
    whole budget, with dt chosen for |h| up to the hard bound 1/2 so the coefficient
    bound stops a run before the CFL check does. Runs that still stop on the CFL
    check count as blow-up.

    With size "amplitude" the shape is multiplied by eps; with "h1" it is rescaled
    to H^1 size eps. Each point records the H^1 size of the data it ran.

    Args:
        eps_list: Data sizes, strictly decreasing
        nl: Nonlinearity
        T_budget: Time budget per run
        shape: Profile scaled to each eps (default: wide Gaussian velocity)
        dr: Target spacing of the grid policy
        threads: Sweep workers
        size: How eps sizes the shape, "amplitude" or "h1"

    Returns:
        (points in eps_list order, FitResult over the blow-up points)
    """
    if size not in LIFESPAN_SIZE_MODES:
        raise InvalidArgumentError(f"Unknown size mode '{size}', expected one of {LIFESPAN_SIZE_MODES}")
    eps_values = [float(e) for e in eps_list]
    if not eps_values:
        raise InvalidArgumentError("eps_list is empty")
    if any(e <= 0 for e in eps_values):
        raise InvalidArgumentError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise InvalidArgumentError("eps_list must be strictly decreasing")
    if not T_budget > 0:
        raise InvalidArgumentError(f"T_budget must be positive, got {T_budget}")

    shape = shape if shape is not None else default_lifespan_shape()

    def run_point(eps: float) -> LifespanPoint:
        grid = grid_policy(shape.support, T_budget, coeff_bound=COEFF_BOUND_MAX, dr=dr)
        pair = shape.scaled(eps) if size == "amplitude" else scale_to_epsilon(shape, grid, eps)
        h1_size = sobolev_norms(pair, grid).epsilon
        outcome = solve_quasilinear(pair, nl, T_budget, grid)
        experiment_points.add(1, {"experiment": "lifespan"})
        if outcome.completed:
            point = LifespanPoint(eps, T_budget, "budget", exhausted=True, h1_size=h1_size, grid=grid.describe())
        else:
            point = LifespanPoint(
                eps,
                float(outcome.t_event),
                outcome.criterion or outcome.status,
                exhausted=False,
                h1_size=h1_size,
                grid=grid.describe(),
            )
        logger.info(f"Lifespan eps={eps:g}: t_star={point.t_star:.6g} ({point.criterion})")
        return point

    points = map_ordered(run_point, eps_values, threads)
    fit = fit_lifespan(points)
    if not fit.monotone:
        logger.error("Lifespan is not monotone in eps over this sweep")
    if fit.defined:
        logger.info(f"Lifespan fit: slope={fit.slope:.4g}, r^2={fit.r_squared:.4f}")
    else:
        logger.info(f"Lifespan fit undefined: {fit.reason}")
    return points, fit


# =============================================================================
# Continuation
# =============================================================================


def _restart_snapshot(final: FieldSnapshot, grid: RadialGrid, mollify_k: int | None) -> FieldSnapshot:
    if mollify_k is None:
        return final
    restart = pair_from_snapshot(final)
    k = finest_resolvable_level(restart, mollify_k)
    if k < mollify_k:
        logger.warning(f"Restart mollifier capped at k={k} by the grid spacing")
    smoothed = mollify_pair(restart, 2.0**k, grid)
    f, g = smoothed.sample(grid)
    return FieldSnapshot.from_phi(final.t, f, g, grid, step=final.step)


def continuation_run(
    pair: DataPair,
    nl: Nonlinearity,
    segments: int,
    grid: RadialGrid,
    T: float,
    sinks: Iterable[LevelSink] = (),
    mollify_k: int | None = None,
    bound: float | None = H_ADMISSIBLE,
) -> SolveOutcome:
    """
    Solve on [0, T] in equal segments, each restarted from the previous final level.

    The restart level is handed to the sinks again at the start of the next segment;
    accumulators see it as a zero-width time panel.

    Args:
        pair: Initial data
        nl: Nonlinearity
        segments: Number of segments (>= 1)
        grid: RadialGrid shared by all segments
        T: Total time
        sinks: Sinks fed by every segment
        mollify_k: Re-mollify restart data at scale 2^k (None keeps them as is)
        bound: Admissibility bound on sup |h(phi)| per segment (None disables the check)

    Returns:
        SolveOutcome of the last segment run, with steps summed over segments.
        A segment that stops early ends the run; its index is in `segment`.

    Raises:
        AdmissibilityFailure: a segment left the admissible ball (segment index attached)
    """
    if segments < 1:
        raise InvalidArgumentError(f"segments must be >= 1, got {segments}")
    if not T > 0:
        raise InvalidArgumentError(f"T must be positive, got {T}")

    sinks = tuple(sinks)
    length = T / segments
    start: FieldSnapshot | None = None
    steps = 0
    max_abs_h = 0.0
    max_weighted_dh = 0.0
    outcome: SolveOutcome | None = None

    for index in range(segments):
        monitor = AdmissibilityMonitor(nl, bound=bound if bound is not None else math.inf)
        outcome = solve_quasilinear(
            pair if start is None else None,
            nl,
            length,
            grid,
            sinks=(*sinks, monitor),
            start=start,
        )
        steps += outcome.steps
        max_abs_h = max(max_abs_h, outcome.max_abs_h)
        max_weighted_dh = max(max_weighted_dh, outcome.max_weighted_dh)
        outcome = dataclasses.replace(
            outcome,
            steps=steps,
            max_abs_h=max_abs_h,
            max_weighted_dh=max_weighted_dh,
            sinks=sinks,
            segment=index,
        )
        logger.info(f"Segment {index}: {outcome.status} at t={outcome.final.t:.6g}")

        if not monitor.admissible:
            raise AdmissibilityFailure(
                f"Segment {index} left the admissible ball: sup|h| = {monitor.sup_h:.4g}",
                segment=index,
                sup_h=monitor.sup_h,
                partial=outcome,
            )
        if not outcome.completed:
            break
        start = _restart_snapshot(outcome.final, grid, mollify_k)

    return outcome


# =============================================================================
# Continuity of the solution map
# =============================================================================


def _reference_run(base: DataPair, nl: Nonlinearity, T: float, grid: RadialGrid) -> LevelTable:
    table = LevelTable(grid, stride=1)
    monitor = AdmissibilityMonitor(nl)
    outcome = solve_quasilinear(base, nl, T, grid, sinks=(table, monitor))
    if not outcome.completed or not monitor.admissible:
        raise AdmissibilityFailure(
            f"Base run is not admissible: status={outcome.status}, sup|h| = {monitor.sup_h:.4g}",
            sup_h=monitor.sup_h,
        )
    return table


def _difference_point(
    base: DataPair,
    reference: LevelTable,
    perturbation: DataPair,
    delta: float,
    direction: int,
    nl: Nonlinearity,
    T: float,
    grid: RadialGrid,
) -> LipschitzPoint:
    perturbed = base.plus(perturbation, delta)
    diff = DifferenceSink(reference)
    monitor = AdmissibilityMonitor(nl)
    outcome = solve_quasilinear(perturbed, nl, T, grid, sinks=(diff, monitor))
    experiment_points.add(1, {"experiment": "continuity"})

    difference = diff.e1_plus_y1()
    data_difference = data_distance(perturbed, base, grid)
    return LipschitzPoint(
        delta=delta,
        direction=direction,
        difference=difference,
        data_difference=data_difference,
        ratio=difference / data_difference if data_difference > 0 else None,
        flagged=not outcome.completed or not monitor.admissible,
    )


def continuity_probe(
    base: DataPair,
    perturbation: DataPair,
    delta_list: Iterable[float],
    nl: Nonlinearity,
    T: float,
    grid: RadialGrid,
    threads: int = 1,
) -> LipschitzReport:
    """
    Difference quotients of the solution map along one perturbation direction.

    ratio_delta = ||Phi(d) - Phi(d + delta p)||_{E1 + Y1} / ||d - (d + delta p)||_{Hdot^1 x L^2}

    Raises:
        AdmissibilityFailure: the base run itself is not admissible
    """
    deltas = [float(d) for d in delta_list]
    if any(d < 0 for d in deltas):
        raise InvalidArgumentError("delta values must be nonnegative")

    reference = _reference_run(base, nl, T, grid)
    points = map_ordered(
        lambda delta: _difference_point(base, reference, perturbation, delta, 0, nl, T, grid),
        deltas,
        threads,
    )
    report = LipschitzReport(T=T, nl=nl.to_dict(), points=points)
    logger.info(f"Continuity probe: {len(points)} deltas, spread={report.spread}")
    return report


def random_directions(grid: RadialGrid, count: int = CONTINUITY_DIRECTIONS, seed: int = 0) -> list[DataPair]:
    """Seeded Gaussian perturbations normalized to unit Hdot^1 x L^2 size."""
    rng = np.random.default_rng(seed)
    directions = []
    for _ in range(count):
        shape = profile(
            "gaussian",
            amplitude=float(rng.normal()),
            center=float(rng.uniform(0.0, 2.0)),
            width=float(rng.uniform(0.5, 1.5)),
            velocity_amplitude=float(rng.normal()),
        )
        size = data_distance(shape, None, grid)
        directions.append(shape.scaled(1.0 / size))
    return directions


def continuity_directions(
    base: DataPair,
    delta: float,
    nl: Nonlinearity,
    T: float,
    grid: RadialGrid,
    count: int = CONTINUITY_DIRECTIONS,
    seed: int = 0,
    threads: int = 1,
) -> LipschitzReport:
    """Difference quotients at a fixed delta over seeded random directions."""
    if not delta > 0:
        raise InvalidArgumentError(f"delta must be positive, got {delta}")
    reference = _reference_run(base, nl, T, grid)
    directions = list(enumerate(random_directions(grid, count, seed)))
    points = map_ordered(
        lambda item: _difference_point(base, reference, item[1], delta, item[0], nl, T, grid),
        directions,
        threads,
    )
    report = LipschitzReport(T=T, nl=nl.to_dict(), points=points)
    logger.info(f"Continuity directions: {count} directions at delta={delta:g}, spread={report.spread}")
    return report


# =============================================================================
# Constants
# =============================================================================


def admissible_radius(nl: Nonlinearity, c_s: float) -> float | None:
    """
    c0 with ||phi||_{E2} <= c0 => sup |h(phi)| <= 1/6, given sup |phi| <= C_S ||phi||_{E2}.

    Linear h: 1/(6 lam C_S); quadratic h: (1/(6 lam))^{1/2} / C_S.
    """
    lam = abs(nl.lam)
    if lam == 0 or c_s <= 0:
        return None
    if nl.h_kind == "linear":
        return 1.0 / (6.0 * lam * c_s)
    return math.sqrt(1.0 / (6.0 * lam)) / c_s


def continuation_scales(c4: float, m1: float, a2: float, eps2: float, eps0: float) -> dict:
    """T1 = A2 eps2^-2, A3 = min(A2 M1^-2, 1/(2 4^2 C4^2 M1^2 (2+M1)^2)), T2 = A3 eps0^-2."""
    if eps2 <= 0 or eps0 <= 0:
        raise InvalidArgumentError("eps2 and eps0 must be positive")
    a3 = min(a2 / m1**2, 1.0 / (2.0 * 16.0 * c4**2 * m1**2 * (2.0 + m1) ** 2))
    return {"T1": a2 / eps2**2, "A3": a3, "T2": a3 / eps0**2}


def constants_ledger(
    experiment_id: str,
    nl: Nonlinearity,
    picard_constants: dict | None = None,
    sobolev: SobolevRecord | None = None,
    energy: EnergyInequalityRecord | None = None,
    estimate_ratio: float | None = None,
    fit: FitResult | None = None,
    eps2: float | None = None,
    eps0: float | None = None,
    ledger: ConstantsLedger | None = None,
) -> ConstantsLedger:
    """
    Record whichever constants the given runs determine.

    C_S from the sup ratio, C2 from the energy inequality, C3 from the space-time
    estimate, C4 / M1 / A2 from Picard runs, c0 from C_S and lam, A1 from the
    lifespan slope, and T1 / A3 / T2 when eps2 and eps0 are supplied.
    """
    ledger = ledger if ledger is not None else ConstantsLedger()
    c_s = None
    if sobolev is not None and sobolev.sup_ratio is not None:
        c_s = sobolev.sup_ratio
        ledger.record("C_S", c_s, experiment_id, "max sup|phi| / E2 over snapshots")
        ledger.record("c0", admissible_radius(nl, c_s), experiment_id, f"h_kind={nl.h_kind}, lam={nl.lam}")
    if energy is not None:
        ledger.record("C2", energy.implied_C, experiment_id, "energy inequality lhs / rhs")
    if estimate_ratio is not None:
        ledger.record("C3", estimate_ratio, experiment_id, "max space-time estimate ratio")
    if picard_constants is not None:
        ledger.record("C4", picard_constants.get("C4"), experiment_id, "max increment per data increment")
        ledger.record("M1", picard_constants.get("M1"), experiment_id, "max (E2 + Y2 + Z2) / eps")
        ledger.record("A2", picard_constants.get("A2"), experiment_id, "1 / (2 8^2 C4^2 M1^2)")
        c4, m1, a2 = (picard_constants.get(key) for key in ("C4", "M1", "A2"))
        if eps2 is not None and eps0 is not None and c4 and m1 and a2:
            scales = continuation_scales(c4, m1, a2, eps2, eps0)
            for name, value in scales.items():
                ledger.record(name, value, experiment_id, f"eps2={eps2:g}, eps0={eps0:g}")
    if fit is not None:
        ledger.record("A1", fit.slope, experiment_id, "slope of log T_star against 1/eps")
    return ledger
