"""
Wave Solver

Explicit leapfrog time stepping for radial waves in u = r*phi:

    d_t^2 phi - (1 - h) Delta phi = F   <=>   u_tt = (1 - h) u_rr + r F

with u = 0 at the origin and at r_max. The first step is a second-order Taylor
step that uses the equation at the initial time.

Input: DataPair (or a restart snapshot), coefficient and forcing, final time
Output: SolveOutcome; every time level is streamed to the sinks in order

Level n is handed to the sinks once u^{n+1} exists, so its u_t is the central
difference. The last level uses a third-order one-sided formula instead.
"""

import math
import time
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from common.config import (
    DALEMBERT_NODES,
    ENERGY_GROWTH_CAP,
    H_BLOWUP,
)
from common.errors import CoefficientBoundViolation, InvalidArgumentError
from common.logging_config import get_logger
from common.metrics import solver_blowups, solver_duration, solver_steps
from initial_data.types import DataPair
from radial_grid.core import FieldSnapshot, RadialGrid, divide_by_r, radial_derivatives
from wave_solver.types import (
    CoefficientField,
    ForcingFn,
    LevelSink,
    Nonlinearity,
    SolveOutcome,
)

logger = get_logger("wave_solver")


@dataclass
class _Level:
    """Coefficient h, forcing F and the gradient of h at one time level."""

    h: np.ndarray
    forcing: np.ndarray
    dh_t: np.ndarray
    dh_r: np.ndarray


# (step, t, u, u_t, level) -> None to continue, or (status, criterion) to stop
_Check = Callable[[int, float, np.ndarray, np.ndarray, _Level], tuple[str, str] | None]
_LevelFn = Callable[[float, np.ndarray, np.ndarray], _Level]


def _acceleration(u: np.ndarray, level: _Level, grid: RadialGrid) -> np.ndarray:
    a = np.zeros_like(u)
    u_rr = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / grid.dr**2
    a[1:-1] = (1.0 - level.h[1:-1]) * u_rr + grid.r[1:-1] * level.forcing[1:-1]
    return a


def _u_energy(u: np.ndarray, u_t: np.ndarray, grid: RadialGrid) -> float:
    """(4 pi int (u_t^2 + u_r^2) dr)^{1/2}, the energy of phi for u(0) = 0."""
    kinetic = grid.dr * float(np.dot(u_t, u_t))
    potential = float(np.sum(np.diff(u) ** 2)) / grid.dr
    return math.sqrt(4.0 * math.pi * (kinetic + potential))


def _initial_state(
    pair: DataPair | None,
    start: FieldSnapshot | None,
    grid: RadialGrid,
) -> tuple[float, int, np.ndarray, np.ndarray]:
    if start is not None:
        if start.grid.size != grid.size or start.grid.dr != grid.dr:
            raise InvalidArgumentError("Restart snapshot lives on a different grid")
        u0, ut0 = start.u.copy(), start.u_t.copy()
        t0, step0 = start.t, start.step
    elif pair is not None:
        f, g = pair.sample(grid)
        u0, ut0 = grid.r * f, grid.r * g
        t0, step0 = 0.0, 0
    else:
        raise InvalidArgumentError("Either initial data or a restart snapshot is required")

    u0[0] = u0[-1] = 0.0
    ut0[0] = ut0[-1] = 0.0
    return t0, step0, u0, ut0


def _march(
    grid: RadialGrid,
    T: float,
    t0: float,
    step0: int,
    u0: np.ndarray,
    ut0: np.ndarray,
    level_fn: _LevelFn,
    check: _Check,
    sinks: tuple[LevelSink, ...],
    final_corrector: bool,
) -> SolveOutcome:
    n_steps, dt = grid.steps_for(T)
    r = grid.r
    weight = np.sqrt(r * grid.bracket_r)
    started = time.perf_counter()

    max_abs_h = 0.0
    max_weighted_dh = 0.0

    def emit(n: int, u: np.ndarray, u_t: np.ndarray, u_tt: np.ndarray, level: _Level) -> FieldSnapshot:
        nonlocal max_abs_h, max_weighted_dh
        max_abs_h = max(max_abs_h, float(np.max(np.abs(level.h))))
        dh = np.sqrt(level.dh_t**2 + level.dh_r**2)
        max_weighted_dh = max(max_weighted_dh, float(np.max(weight * dh)))
        t = t0 + T if n == n_steps else t0 + n * dt
        snap = FieldSnapshot(
            t=t,
            u=u,
            u_t=u_t,
            grid=grid,
            u_tt=u_tt,
            step=step0 + n,
            is_final=n == n_steps,
            h=level.h,
            forcing=level.forcing,
            dh_t=level.dh_t,
            dh_r=level.dh_r,
        )
        for sink in sinks:
            sink.accept(snap)
        return snap

    def finish(status: str, final: FieldSnapshot, steps: int, t_event=None, criterion=None) -> SolveOutcome:
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        solver_steps.add(steps)
        solver_duration.record(elapsed_ms, {"status": status})
        if status == "blowup":
            solver_blowups.add(1)
        if status != "completed":
            logger.info(f"Run stopped at t={t_event:.6g}: {status} ({criterion})")
        return SolveOutcome(
            status=status,
            final=final,
            steps=steps,
            t_event=t_event,
            criterion=criterion,
            max_abs_h=max_abs_h,
            max_weighted_dh=max_weighted_dh,
            sinks=sinks,
        )

    # Level 0
    level = level_fn(t0, u0, ut0)
    stop = check(0, t0, u0, ut0, level)
    if stop is not None:
        placeholder = FieldSnapshot(t=t0, u=u0, u_t=ut0, grid=grid, step=step0)
        return finish(stop[0], placeholder, 0, t0, stop[1])
    a_prev = _acceleration(u0, level, grid)
    u_prev = u0
    u_cur = u0 + dt * ut0 + 0.5 * dt**2 * a_prev
    u_cur[0] = u_cur[-1] = 0.0
    last = emit(0, u0, ut0, a_prev, level)

    for n in range(1, n_steps + 1):
        t_n = t0 + n * dt
        ut_pred = (u_cur - u_prev) / dt + 0.5 * dt * a_prev
        level = level_fn(t_n, u_cur, ut_pred)
        stop = check(n, t_n, u_cur, ut_pred, level)
        if stop is not None:
            return finish(stop[0], last, n - 1, t_n, stop[1])

        a_cur = _acceleration(u_cur, level, grid)
        if n < n_steps:
            u_next = 2.0 * u_cur - u_prev + dt**2 * a_cur
            u_next[0] = u_next[-1] = 0.0
            ut_cur = (u_next - u_prev) / (2.0 * dt)
        else:
            # u_t(T) from u^N, u^{N-1} and u_tt at both levels, third order
            ut_cur = (u_cur - u_prev) / dt + dt / 6.0 * (2.0 * a_cur + a_prev)
            if final_corrector:
                level = level_fn(t_n, u_cur, ut_cur)
                a_cur = _acceleration(u_cur, level, grid)
                ut_cur = (u_cur - u_prev) / dt + dt / 6.0 * (2.0 * a_cur + a_prev)
            u_next = u_cur

        last = emit(n, u_cur, ut_cur, a_cur, level)
        u_prev, u_cur, a_prev = u_cur, u_next, a_cur

    return finish("completed", last, n_steps)


def _cfl_criterion(dt: float, grid: RadialGrid, sup_h: float) -> bool:
    return dt > grid.dr / math.sqrt(1.0 + sup_h)


def _check_light_cone(pair: DataPair | None, T: float, grid: RadialGrid, speed_bound: float):
    if pair is None:
        return
    reach = pair.support + math.sqrt(1.0 + speed_bound) * T
    if reach > grid.r_max:
        logger.warning(
            f"Data support {pair.support:.3g} plus light cone reaches r={reach:.3g} beyond r_max={grid.r_max:.3g}"
        )


def solve_linear(
    pair: DataPair | None,
    h: CoefficientField | None,
    F: ForcingFn | None,
    T: float,
    grid: RadialGrid,
    sinks: Iterable[LevelSink] = (),
    start: FieldSnapshot | None = None,
) -> SolveOutcome:
    """
    Solve d_t^2 phi - Delta phi + h(t, r) Delta phi = F(t, r) on [t0, t0 + T].

    Args:
        pair: Initial data (ignored when start is given)
        h: Coefficient field (None for h = 0)
        F: Forcing F(t, r) (None for F = 0)
        T: Duration of the run (> 0)
        grid: RadialGrid
        sinks: Level consumers, fed in time order
        start: Snapshot to restart from; times and steps continue from it

    Returns:
        SolveOutcome; status "cfl_violation" if sup |h| makes dt unstable

    Raises:
        CoefficientBoundViolation: sup |h| > 1/2 at some level
    """
    coefficient = h if h is not None else CoefficientField.zero()
    sinks = tuple(sinks)
    t0, step0, u0, ut0 = _initial_state(pair, start, grid)
    _check_light_cone(pair, T, grid, coefficient.sup_bound or grid.coeff_bound)
    _, dt = grid.steps_for(T)

    def level_fn(t: float, u: np.ndarray, u_t: np.ndarray) -> _Level:
        h_vals, h_t, h_r = coefficient.sample(t, grid)
        forcing = np.zeros_like(u) if F is None else np.asarray(F(t, grid.r), dtype=float)
        return _Level(h_vals, forcing, h_t, h_r)

    def check(n: int, t: float, u: np.ndarray, u_t: np.ndarray, level: _Level):
        sup_h = float(np.max(np.abs(level.h)))
        if sup_h > H_BLOWUP:
            raise CoefficientBoundViolation(f"sup|h| = {sup_h:.4g} exceeds 1/2 at t={t:.6g}")
        if not np.all(np.isfinite(u)):
            return "blowup", "non-finite"
        if _cfl_criterion(dt, grid, sup_h):
            return "cfl_violation", f"sup|h| = {sup_h:.4g}"
        return None

    logger.debug(f"Linear solve: T={T}, h={coefficient.label}, nr={grid.nr}")
    return _march(grid, T, t0, step0, u0, ut0, level_fn, check, sinks, final_corrector=False)


def solve_quasilinear(
    pair: DataPair | None,
    nl: Nonlinearity,
    T: float,
    grid: RadialGrid,
    sinks: Iterable[LevelSink] = (),
    start: FieldSnapshot | None = None,
) -> SolveOutcome:
    """
    Solve d_t^2 phi - Delta phi + h(phi) Delta phi = a (d_t phi)^2 + b |grad phi|^2.

    Coefficients are frozen at the current level. Each level is validated in
    order: all values finite, sup |h(phi)| <= 1/2, energy below 10^3 times its
    initial value (any failure is a blow-up), then the CFL condition for the
    instantaneous wave speed.

    Args:
        pair: Initial data (ignored when start is given)
        nl: Nonlinearity
        T: Duration of the run (> 0)
        grid: RadialGrid
        sinks: Level consumers, fed in time order
        start: Snapshot to restart from

    Returns:
        SolveOutcome with status completed, blowup or cfl_violation
    """
    sinks = tuple(sinks)
    t0, step0, u0, ut0 = _initial_state(pair, start, grid)
    _check_light_cone(pair, T, grid, grid.coeff_bound)
    _, dt = grid.steps_for(T)
    initial_energy = _u_energy(u0, ut0, grid)

    def level_fn(t: float, u: np.ndarray, u_t: np.ndarray) -> _Level:
        phi = divide_by_r(u, grid)
        phi_t = divide_by_r(u_t, grid)
        phi_r, _ = radial_derivatives(phi, grid, parity="even")
        slope = nl.h_prime(phi)
        return _Level(nl.h(phi), nl.forcing(phi_t, phi_r), slope * phi_t, slope * phi_r)

    def check(n: int, t: float, u: np.ndarray, u_t: np.ndarray, level: _Level):
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(u_t))):
            return "blowup", "non-finite"
        sup_h = float(np.max(np.abs(level.h)))
        if sup_h > H_BLOWUP:
            return "blowup", "coefficient-bound"
        if initial_energy > 0 and _u_energy(u, u_t, grid) > ENERGY_GROWTH_CAP * initial_energy:
            return "blowup", "energy-growth"
        if _cfl_criterion(dt, grid, sup_h):
            return "cfl_violation", "cfl"
        return None

    logger.debug(f"Quasilinear solve: T={T}, nl={nl.to_dict()}, nr={grid.nr}")
    return _march(grid, T, t0, step0, u0, ut0, level_fn, check, sinks, final_corrector=not nl.is_free)


def dalembert_free(pair: DataPair, t: float, r: float | np.ndarray) -> float | np.ndarray:
    """
    Exact free wave with data (f, g) via d'Alembert's formula on u = r*phi.

        phi(t, r) = [U0(r+t) + U0(r-t)]/(2r) + (1/(2r)) int_{r-t}^{r+t} U1(s) ds

    with U0, U1 the odd extensions of r f and r g. At r = 0 the limit
    f(t) + t f'(t) + t g(t) is used.

    Args:
        pair: Initial data
        t: Time (>= 0)
        r: Radius or array of radii (>= 0)

    Returns:
        phi(t, r), scalar for scalar r
    """
    scalar = np.ndim(r) == 0
    radii = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(radii < 0):
        raise InvalidArgumentError("dalembert_free needs r >= 0")
    if t < 0:
        raise InvalidArgumentError("dalembert_free needs t >= 0")

    f, g = pair.f, pair.g
    out = np.empty_like(radii)

    at_origin = radii == 0.0
    if np.any(at_origin):
        step = 1e-5 * max(1.0, t)
        ft = float(f(np.array([t]))[0])
        if t > 0:
            f_prime = float((f(np.array([t + step])) - f(np.array([abs(t - step)])))[0]) / (2.0 * step)
        else:
            f_prime = 0.0
        out[at_origin] = ft + t * f_prime + t * float(g(np.array([t]))[0])

    rr = radii[~at_origin]
    if rr.size:
        def odd(fn, s):
            return s * fn(np.abs(s))

        travelling = 0.5 * (odd(f, rr + t) + odd(f, rr - t)) / rr
        if t > 0:
            nodes, weights = np.polynomial.legendre.leggauss(DALEMBERT_NODES)
            s = rr[:, None] + t * nodes[None, :]
            integral = t * np.sum(weights * odd(g, s), axis=1)
        else:
            integral = np.zeros_like(rr)
        out[~at_origin] = travelling + 0.5 * integral / rr

    return float(out[0]) if scalar else out
