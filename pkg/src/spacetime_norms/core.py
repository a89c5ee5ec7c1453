"""
Spacetime Norms

Streaming computation of the energy norms E1/E2 and the weighted space-time norms
Y1/Y2/Z1/Z2 of a solution trace.

Input: FieldSnapshot levels in increasing t
Output: NormReport

    ||phi||_{Y1(T)}^2 = (1+T)^{-1/2} (||r^{-5/4} phi||^2 + ||r^{-1/4} d phi||^2)
    ||phi||_{Z1(T)}^2 = (log(2+T))^{-1} (same with an extra <r>^{-1/2} in the integrand)
    ||phi||_{Y2(T)}^2 = ||phi||_{Y1}^2 + ||d phi||_{Y1}^2, Z2 likewise
    ||phi||_{E1(T)} = sup ||grad phi|| + sup ||d_t phi||
    ||phi||_{E2(T)} = ||phi||_{E1} + ||grad phi||_{E1} + ||d_t phi||_{E1}

Space integrals use the exact r^p cell-moment rule of radial_grid; time integrals
use the trapezoid rule across levels.
"""

import math

import numpy as np

from common.config import TIME_TOLERANCE
from common.errors import InvalidArgumentError, SequencingError
from common.logging_config import get_logger
from radial_grid.core import FieldSnapshot, RadialGrid, l2_norm, radial_integral
from spacetime_norms.types import (
    DENSITY_KEYS,
    SUP_KEYS,
    NormAccumulator,
    NormReport,
)

logger = get_logger("spacetime_norms")

# r^{-5/2} * r^2 and r^{-1/2} * r^2 after the 4 pi r^2 measure
_P_ZERO_ORDER = -0.5
_P_FIRST_ORDER = 1.5


def energy(snap: FieldSnapshot, grid: RadialGrid, order: int = 1) -> float:
    """
    Instantaneous candidate for the E1 / E2 running sup.

    order 1: ||grad phi|| + ||d_t phi||
    order 2: adds ||D^2 phi|| + 2 ||grad d_t phi|| + ||d_t^2 phi||
    """
    if order not in (1, 2):
        raise InvalidArgumentError(f"energy order must be 1 or 2, got {order}")
    sups = _level_sups(snap, grid, order)
    value = sups["grad"] + sups["dt"]
    if order == 2:
        value += sups["hess"] + 2.0 * sups["grad_t"] + sups["tt"]
    return value


def conserved_energy(snap: FieldSnapshot, grid: RadialGrid) -> float:
    """(||d_t phi||^2 + ||grad phi||^2)^{1/2}, conserved by the free wave."""
    return math.sqrt(l2_norm(snap.phi_t, grid) ** 2 + l2_norm(snap.phi_r, grid) ** 2)


def _level_sups(snap: FieldSnapshot, grid: RadialGrid, order: int) -> dict[str, float]:
    sups = dict.fromkeys(SUP_KEYS, 0.0)
    sups["grad"] = l2_norm(snap.phi_r, grid)
    sups["dt"] = l2_norm(snap.phi_t, grid)
    if order == 2:
        if snap.phi_tt is None:
            raise InvalidArgumentError("Second-order norms need u_tt on the snapshot")
        sups["hess"] = math.sqrt(max(radial_integral(snap.hessian_sq, grid), 0.0))
        sups["grad_t"] = l2_norm(snap.phi_tr, grid)
        sups["tt"] = l2_norm(snap.phi_tt, grid)
    return sups


def _level_densities(snap: FieldSnapshot, grid: RadialGrid, order: int) -> np.ndarray:
    """Spatial integrals of one level, in DENSITY_KEYS order."""
    damping = grid.bracket_r**-0.5
    phi_sq = snap.phi**2
    dphi_sq = snap.dphi_sq

    densities = np.zeros(len(DENSITY_KEYS))
    densities[0] = radial_integral(phi_sq, grid, _P_ZERO_ORDER)
    densities[1] = radial_integral(dphi_sq, grid, _P_FIRST_ORDER)
    densities[2] = radial_integral(damping * phi_sq, grid, _P_ZERO_ORDER)
    densities[3] = radial_integral(damping * dphi_sq, grid, _P_FIRST_ORDER)

    if order == 2:
        d2phi_sq = snap.d2phi_sq
        if d2phi_sq is None:
            raise InvalidArgumentError("Second-order norms need u_tt on the snapshot")
        densities[4] = radial_integral(dphi_sq, grid, _P_ZERO_ORDER)
        densities[5] = radial_integral(d2phi_sq, grid, _P_FIRST_ORDER)
        densities[6] = radial_integral(damping * dphi_sq, grid, _P_ZERO_ORDER)
        densities[7] = radial_integral(damping * d2phi_sq, grid, _P_FIRST_ORDER)
    return densities


def accumulate_level(acc: NormAccumulator, snap: FieldSnapshot, grid: RadialGrid) -> NormAccumulator:
    """
    Add one time level to the accumulator.

    Args:
        acc: Accumulator (updated in place)
        snap: Next level; its time must not precede the previous level
        grid: RadialGrid of the snapshot

    Returns:
        The same accumulator

    Raises:
        SequencingError: level out of order
    """
    if acc.t_last is not None and snap.t < acc.t_last - TIME_TOLERANCE * max(1.0, abs(acc.t_last)):
        raise SequencingError(f"Level at t={snap.t} arrived after t={acc.t_last}")

    densities = _level_densities(snap, grid, acc.order)
    for key, value in _level_sups(snap, grid, acc.order).items():
        acc.sups[key] = max(acc.sups[key], value)

    if acc.last_densities is None:
        acc.t_first = snap.t
    else:
        acc.integrals += 0.5 * (snap.t - acc.t_last) * (acc.last_densities + densities)

    acc.last_densities = densities
    acc.t_last = snap.t
    acc.levels += 1
    return acc


def merge(first: NormAccumulator, second: NormAccumulator) -> NormAccumulator:
    """
    Combine accumulators over abutting time slabs.

    The slabs share their boundary level, which each side has already accumulated.
    Argument order does not matter; slabs are ordered by their start time.

    Raises:
        SequencingError: slabs do not abut
        InvalidArgumentError: different orders
    """
    if first.order != second.order:
        raise InvalidArgumentError("Cannot merge accumulators of different order")
    if first.levels == 0:
        return second
    if second.levels == 0:
        return first

    early, late = sorted((first, second), key=lambda acc: acc.t_first)
    gap = late.t_first - early.t_last
    if abs(gap) > TIME_TOLERANCE * max(1.0, abs(early.t_last)):
        raise SequencingError(
            f"Slabs do not abut: [{early.t_first}, {early.t_last}] and [{late.t_first}, {late.t_last}]"
        )

    return NormAccumulator(
        order=early.order,
        levels=early.levels + late.levels - 1,
        t_first=early.t_first,
        t_last=late.t_last,
        integrals=early.integrals + late.integrals,
        sups={key: max(early.sups[key], late.sups[key]) for key in SUP_KEYS},
        last_densities=late.last_densities,
    )


def finalize(acc: NormAccumulator) -> NormReport:
    """
    Apply the (1+T)^{-1/2} and (log(2+T))^{-1} prefactors.

    Raises:
        InvalidArgumentError: the trace spans no time (T = 0)
    """
    if acc.t_first is None or acc.t_last is None or not acc.t_last > acc.t_first:
        raise InvalidArgumentError("Cannot finalize a trace with T = 0")

    T = acc.t_last - acc.t_first
    y_factor = (1.0 + T) ** -0.5
    z_factor = 1.0 / math.log(2.0 + T)

    values = dict(zip(DENSITY_KEYS, acc.integrals.tolist()))
    y1_sq = y_factor * (values["I1"] + values["I2"])
    z1_sq = z_factor * (values["J1"] + values["J2"])
    e1 = acc.sups["grad"] + acc.sups["dt"]

    report = NormReport(
        E1=e1,
        Y1=math.sqrt(y1_sq),
        Z1=math.sqrt(z1_sq),
        I1=values["I1"],
        I2=values["I2"],
        J1=values["J1"],
        J2=values["J2"],
        T=T,
    )
    if acc.order == 2:
        # ||grad phi||_{E1} + ||d_t phi||_{E1}; grad d_t phi appears in both
        e2_extra = acc.sups["hess"] + 2.0 * acc.sups["grad_t"] + acc.sups["tt"]
        report.E2 = e1 + e2_extra
        report.Y2 = math.sqrt(y1_sq + y_factor * (values["I1d"] + values["I2d"]))
        report.Z2 = math.sqrt(z1_sq + z_factor * (values["J1d"] + values["J2d"]))
    return report
