"""
Estimate Harness

Evaluates the a priori estimates on solved instances:

- the weighted space-time estimate with weight exponent 0 < mu < 1/2,
- the standard energy inequality,
- radial Sobolev-type and Hardy inequalities on snapshots,
- the kernel and line-average bounds behind the difference-quotient argument.

Input: DataPair, coefficient and forcing, or snapshots / sample points
Output: EstimateReport, EnergyInequalityRecord, SobolevRecord, ConvolutionReport

Empirical constants are reported, never compared with theoretical ones.
"""

import math
from collections.abc import Iterable

import numpy as np
import pandas as pd
from scipy.integrate import quad
from scipy.special import hyp2f1

from common.config import MU_DEFAULT
from common.errors import InvalidArgumentError
from common.logging_config import get_logger
from common.metrics import experiment_points
from common.parallel import map_ordered
from estimate_harness.types import (
    INTERACTION_TERMS,
    SWEEP_COLUMNS,
    ConvolutionReport,
    EnergyInequalityRecord,
    EstimateInstance,
    EstimateReport,
    SobolevRecord,
)
from initial_data.core import mollifier_kernel, profile, scale_to_epsilon, sobolev_norms
from initial_data.types import DataPair
from radial_grid.core import (
    FieldSnapshot,
    RadialGrid,
    grid_policy,
    l2_norm,
    radial_integral,
)
from wave_solver.core import solve_linear
from wave_solver.types import CoefficientField, ForcingFn, LevelSink

logger = get_logger("estimate_harness")

_LHS_KEYS: tuple[str, ...] = ("Y_phi", "Y_dphi", "Z_phi", "Z_dphi")


def _check_mu(mu: float) -> None:
    if not 0.0 < mu < 0.5:
        raise InvalidArgumentError(f"mu must lie in (0, 1/2), got {mu}")


def _level_fields(snap: FieldSnapshot) -> tuple[np.ndarray, ...]:
    zeros = np.zeros(snap.grid.size)
    h = snap.h if snap.h is not None else zeros
    forcing = snap.forcing if snap.forcing is not None else zeros
    dh_t = snap.dh_t if snap.dh_t is not None else zeros
    dh_r = snap.dh_r if snap.dh_r is not None else zeros
    return np.abs(h), np.abs(forcing), np.sqrt(dh_t**2 + dh_r**2)


class EstimateAccumulator:
    """
    Sink for the space-time estimate: four left-hand integrals and six interaction
    integrals, trapezoid in time.
    """

    def __init__(self, mu: float = MU_DEFAULT):
        _check_mu(mu)
        self.mu = mu
        self.keys = _LHS_KEYS + INTERACTION_TERMS
        self.totals = np.zeros(len(self.keys))
        self.t_first: float | None = None
        self.t_last: float | None = None
        self._last: np.ndarray | None = None

    def _densities(self, snap: FieldSnapshot) -> np.ndarray:
        grid = snap.grid
        mu = self.mu
        damping = grid.bracket_r ** (-2.0 * mu)
        phi = np.abs(snap.phi)
        dphi_sq = snap.dphi_sq
        dphi = np.sqrt(dphi_sq)
        h, forcing, dh = _level_fields(snap)

        # Powers of r after the 4 pi r^2 measure
        p_phi = 2.0 * mu - 1.0
        p_dphi = 2.0 * mu + 1.0
        return np.array(
            [
                radial_integral(phi**2, grid, p_phi),
                radial_integral(dphi_sq, grid, p_dphi),
                radial_integral(damping * phi**2, grid, p_phi),
                radial_integral(damping * dphi_sq, grid, p_dphi),
                radial_integral(dphi * forcing, grid),
                radial_integral(damping * phi * forcing, grid, p_dphi),
                radial_integral(dh * dphi_sq, grid),
                radial_integral(damping * dh * phi * dphi, grid, p_dphi),
                radial_integral(damping * h * dphi_sq, grid, p_dphi),
                radial_integral(damping * h * phi * dphi, grid, 2.0 * mu),
            ]
        )

    def accept(self, snap: FieldSnapshot) -> None:
        densities = self._densities(snap)
        if self._last is None:
            self.t_first = snap.t
        else:
            self.totals += 0.5 * (snap.t - self.t_last) * (self._last + densities)
        self._last = densities
        self.t_last = snap.t

    def report(self, rhs_data: float) -> EstimateReport:
        if self.t_first is None or self.t_last is None:
            raise InvalidArgumentError("No levels accumulated")
        T = self.t_last - self.t_first
        raw = dict(zip(self.keys, self.totals.tolist()))
        terms = {key: raw[key] for key in INTERACTION_TERMS}
        return EstimateReport(
            mu=self.mu,
            T=T,
            lhs_y=(1.0 + T) ** (-2.0 * self.mu) * (raw["Y_phi"] + raw["Y_dphi"]),
            lhs_z=(raw["Z_phi"] + raw["Z_dphi"]) / math.log(2.0 + T),
            rhs_data=rhs_data,
            rhs_interaction=sum(terms.values()),
            terms=terms,
            raw={key: raw[key] for key in _LHS_KEYS},
        )


def kss_sides(
    pair: DataPair,
    h: CoefficientField | None,
    F: ForcingFn | None,
    mu: float,
    T: float,
    grid: RadialGrid,
    sinks: Iterable[LevelSink] = (),
) -> EstimateReport:
    """
    Solve the linear problem and evaluate both sides of the space-time estimate.

    Args:
        pair: Initial data
        h: Coefficient (None for 0)
        F: Forcing (None for 0)
        mu: Weight exponent in (0, 1/2)
        T: Final time
        grid: RadialGrid
        sinks: Extra sinks fed by the same run

    Returns:
        EstimateReport; ratio is None when both data and interaction vanish
    """
    _check_mu(mu)
    accumulator = EstimateAccumulator(mu)
    solve_linear(pair, h, F, T, grid, sinks=(accumulator, *sinks))
    norms = sobolev_norms(pair, grid)
    report = accumulator.report(rhs_data=norms.h1dot_f**2 + norms.l2_g**2)
    logger.debug(f"Estimate sides mu={mu}, T={T}: ratio={report.ratio}")
    return report


class EnergyInequalityAccumulator:
    """Sink for ||d phi(T)||^2 against ||d phi(0)||^2 + int int (|d_t phi F| + |dh| |d phi|^2)."""

    def __init__(self):
        self.initial: float | None = None
        self.current = 0.0
        self.forcing = 0.0
        self.coefficient = 0.0
        self._t: float | None = None
        self._last: np.ndarray | None = None

    def accept(self, snap: FieldSnapshot) -> None:
        grid = snap.grid
        energy_sq = l2_norm(snap.phi_t, grid) ** 2 + l2_norm(snap.phi_r, grid) ** 2
        _, forcing, dh = _level_fields(snap)
        densities = np.array(
            [
                radial_integral(np.abs(snap.phi_t) * forcing, grid),
                radial_integral(dh * snap.dphi_sq, grid),
            ]
        )
        if self.initial is None:
            self.initial = energy_sq
        else:
            panel = 0.5 * (snap.t - self._t) * (self._last + densities)
            self.forcing += float(panel[0])
            self.coefficient += float(panel[1])
        self.current = energy_sq
        self._t = snap.t
        self._last = densities

    def record(self) -> EnergyInequalityRecord:
        return EnergyInequalityRecord(
            lhs=self.current,
            initial=self.initial or 0.0,
            forcing=self.forcing,
            coefficient=self.coefficient,
        )


def energy_inequality_check(
    pair: DataPair,
    h: CoefficientField | None,
    F: ForcingFn | None,
    T: float,
    grid: RadialGrid,
    sinks: Iterable[LevelSink] = (),
) -> EnergyInequalityRecord:
    """Run the linear problem and report the constant implied by the energy inequality."""
    accumulator = EnergyInequalityAccumulator()
    solve_linear(pair, h, F, T, grid, sinks=(accumulator, *sinks))
    record = accumulator.record()
    logger.debug(f"Energy inequality: implied C = {record.implied_C}")
    return record


def sobolev_checks(snapshots: Iterable[FieldSnapshot]) -> SobolevRecord:
    """
    Empirical constants of the radial Sobolev, decay and Hardy inequalities.

    For each snapshot:
        sup r^{1/2} |phi| / ||grad phi||
        sup |phi| / E2-proxy
        sup r^{1/2} <r>^{1/2} |d phi| / E2-proxy
        ||phi / r|| / ||grad phi||
    where the E2-proxy is the instantaneous E2 sum (the d_t^2 phi term is dropped
    when the snapshot has no u_tt). Snapshots with grad phi = 0 are skipped.

    Returns:
        SobolevRecord with the max of each ratio over the snapshots
    """
    record = SobolevRecord()
    for snap in snapshots:
        record.snapshots += 1
        grid = snap.grid
        grad = l2_norm(snap.phi_r, grid)
        if grad == 0.0:
            record.skipped += 1
            continue

        r = grid.r
        proxy = (
            grad
            + l2_norm(snap.phi_t, grid)
            + math.sqrt(max(radial_integral(snap.hessian_sq, grid), 0.0))
            + 2.0 * l2_norm(snap.phi_tr, grid)
            + (l2_norm(snap.phi_tt, grid) if snap.phi_tt is not None else 0.0)
        )
        radial = float(np.max(np.sqrt(r) * np.abs(snap.phi))) / grad
        sup = float(np.max(np.abs(snap.phi))) / proxy
        decay = float(np.max(np.sqrt(r * grid.bracket_r) * np.sqrt(snap.dphi_sq))) / proxy
        hardy = math.sqrt(max(radial_integral(snap.phi**2, grid, p=0.0), 0.0)) / grad

        record.radial_ratio = max(record.radial_ratio or 0.0, radial)
        record.sup_ratio = max(record.sup_ratio or 0.0, sup)
        record.decay_ratio = max(record.decay_ratio or 0.0, decay)
        record.hardy_ratio = max(record.hardy_ratio or 0.0, hardy)

    if record.skipped:
        logger.debug(f"Sobolev checks skipped {record.skipped} zero snapshots")
    return record


# =============================================================================
# Kernel and line-average bounds
# =============================================================================


def _sphere_average(R: float, s: float, alpha: float) -> float:
    """Average of |x - y|^{-alpha} over |y| = s for |x| = R."""
    if s == 0.0:
        return R**-alpha
    if alpha == 2.0:
        return (math.log(R + s) - math.log(abs(R - s))) / (2.0 * R * s)
    return ((R + s) ** (2.0 - alpha) - abs(R - s) ** (2.0 - alpha)) / (2.0 * R * s * (2.0 - alpha))


def kernel_average(k: float, alpha: float, R: float) -> float:
    """int rho_k(y) |x - y|^{-alpha} dy for |x| = R."""
    kernel = mollifier_kernel(k)
    support = kernel.support_radius
    points = [R] if 0.0 < R < support else None
    value, _ = quad(
        lambda s: 4.0 * math.pi * s * s * kernel.value(s) * _sphere_average(R, s, alpha),
        0.0,
        support,
        points=points,
        limit=200,
    )
    return value


def line_average(x: np.ndarray, z: np.ndarray, gamma: float) -> float:
    """int_0^1 |x + theta z|^{-gamma} d theta."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    zz = float(np.dot(z, z))
    points = None
    if zz > 0:
        theta0 = -float(np.dot(x, z)) / zz
        if 0.0 < theta0 < 1.0:
            points = [theta0]
    value, _ = quad(lambda th: float(np.linalg.norm(x + th * z)) ** -gamma, 0.0, 1.0, points=points, limit=200)
    return value


def line_average_orthogonal(a: float, b: float, gamma: float) -> float:
    """Closed form for x . z = 0: a^{-gamma} 2F1(gamma/2, 1/2; 3/2; -b^2/a^2)."""
    return a**-gamma * float(hyp2f1(0.5 * gamma, 0.5, 1.5, -(b * b) / (a * a)))


def convolution_bound_check(
    k_list: Iterable[float],
    alpha_list: Iterable[float],
    x_grid: Iterable[float],
    gamma_list: Iterable[float] = (0.5,),
    z_norms: Iterable[float] = (0.25, 0.5, 1.0),
    angles: int = 9,
) -> ConvolutionReport:
    """
    Sup constants of |x|^alpha int rho_k(y) |x-y|^{-alpha} dy and of
    |x|^gamma int_0^1 |x + theta z|^{-gamma} d theta over sample points.

    Args:
        k_list: Mollifier scales (>= 1)
        alpha_list: Kernel exponents in [0, 3)
        x_grid: Radii |x| > 0
        gamma_list: Line-average exponents in [0, 1)
        z_norms: |z| <= 1 for the line average
        angles: Directions of z relative to x in [0, pi]

    Returns:
        ConvolutionReport
    """
    xs = np.asarray(list(x_grid), dtype=float)
    if xs.size == 0 or np.any(xs <= 0):
        raise InvalidArgumentError("x_grid must hold radii > 0")
    alphas = list(alpha_list)
    gammas = list(gamma_list)
    norms = list(z_norms)
    for alpha in alphas:
        if not 0.0 <= alpha < 3.0:
            raise InvalidArgumentError(f"alpha must lie in [0, 3), got {alpha}")
    for gamma in gammas:
        if not 0.0 <= gamma < 1.0:
            raise InvalidArgumentError(f"gamma must lie in [0, 1), got {gamma}")
    if any(not 0.0 < b <= 1.0 for b in norms):
        raise InvalidArgumentError("z_norms must lie in (0, 1]")

    report = ConvolutionReport()
    for k in k_list:
        for alpha in alphas:
            ratios = np.array([R**alpha * kernel_average(k, alpha, R) for R in xs])
            worst = int(np.argmax(ratios))
            report.kernel.append(
                {
                    "k": float(k),
                    "alpha": float(alpha),
                    "sup_ratio": float(ratios[worst]),
                    "location": float(xs[worst]),
                    "far_field_ratio": float(ratios[-1]),
                }
            )

    psi = np.linspace(0.0, math.pi, angles)
    for gamma in gammas:
        best = 0.0
        samples = 0
        for R in xs:
            x = np.array([R, 0.0])
            for b in norms:
                for angle in psi:
                    z = b * np.array([math.cos(angle), math.sin(angle)])
                    best = max(best, R**gamma * line_average(x, z, gamma))
                    samples += 1
        report.line.append({"gamma": float(gamma), "sup_ratio": best, "samples": samples})

    logger.info(f"Convolution bounds: {len(report.kernel)} kernel entries, {len(report.line)} line entries")
    return report


# =============================================================================
# Sweeps
# =============================================================================


def run_instance(instance: EstimateInstance) -> dict:
    """Solve one sweep instance and return its CSV row."""
    shape = profile(instance.kind, amplitude=1.0, width=instance.width)
    h = CoefficientField.gaussian(instance.h_amplitude) if instance.h_amplitude else None
    grid = grid_policy(shape.support, instance.T, dr=instance.dr)
    pair = scale_to_epsilon(shape, grid, instance.eps)
    report = kss_sides(pair, h, None, instance.mu, instance.T, grid)
    experiment_points.add(1, {"experiment": "estimate"})
    return {
        "instance_id": instance.instance_id,
        "mu": instance.mu,
        "T": instance.T,
        "eps": instance.eps,
        "h_amplitude": instance.h_amplitude,
        "lhs_y": report.lhs_y,
        "lhs_z": report.lhs_z,
        "rhs_data": report.rhs_data,
        "rhs_interaction": report.rhs_interaction,
        "ratio": report.ratio,
    }


def build_instances(
    eps_list: Iterable[float],
    T_list: Iterable[float],
    h_amplitudes: Iterable[float],
    mu: float = MU_DEFAULT,
    dr: float = 0.05,
) -> list[EstimateInstance]:
    """Cartesian product of sweep parameters with stable instance ids."""
    instances = []
    for eps in eps_list:
        for T in T_list:
            for amp in h_amplitudes:
                instances.append(
                    EstimateInstance(
                        instance_id=f"eps={eps:g}_T={T:g}_h={amp:g}_mu={mu:g}",
                        eps=eps,
                        T=T,
                        mu=mu,
                        h_amplitude=amp,
                        dr=dr,
                    )
                )
    return instances


def sweep(instances: Iterable[EstimateInstance], threads: int = 1) -> pd.DataFrame:
    """Run a sweep and collect rows with columns instance_id, mu, T, eps, h_amplitude, lhs_y, lhs_z, rhs_data, rhs_interaction, ratio."""
    rows = map_ordered(run_instance, list(instances), threads)
    logger.info(f"Estimate sweep finished: {len(rows)} instances")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
