"""
Multiplier Lab

Energy-momentum tensor, radial multipliers and the divergence identity for

    d_t^2 phi - Delta phi + h^{ab} d_a d_b phi = F

reduced to the (t, r) plane. With X = f(r) x/r * d_x and c = (n-1)/2:

    Q_ab   = d_a phi d_b phi - 1/2 g_ab (d^c phi d_c phi + h^{cd} d_c phi d_d phi) + (h-corrections)
    P_a    = Q_ab X^b
    Pbar_0 = f Q_0r + c (f/r) phi d_t phi + c (f/r) phi h^{0b} d_b phi
    Pbar_r = f Q_rr + c (f/r) phi d_r phi - c/2 d_r(f/r) phi^2 - c (f/r) phi h^{rb} d_b phi

    -d_t Pbar_0 + r^{1-n} d_r (r^{n-1} Pbar_r)
        = 1/2 f' (|d_r phi|^2 + |d_t phi|^2) - c/2 Delta(f/r) phi^2 + Rbar

Input: MultiplierField, scenario closed forms, RadialGrid
Output: scalar records, inequality reports, TensorSample, residual reports
"""

import math

import numpy as np
import sympy

from common.config import INEQUALITY_RTOL, RESIDUAL_COLLAR_CELLS, SPACE_DIMENSION
from common.errors import CoefficientBoundViolation, InvalidArgumentError
from common.logging_config import get_logger
from initial_data.types import DataPair
from multiplier_lab.types import (
    CoefficientSample,
    InequalityCheck,
    InequalityReport,
    MultiplierField,
    MultiplierScalars,
    ResidualReport,
    Scenario,
    TensorSample,
)
from radial_grid.core import RadialGrid, radial_integral
from wave_solver.core import dalembert_free

logger = get_logger("multiplier_lab")

MULTIPLIER_VARIANTS: tuple[str, ...] = ("kss", "ms")

# Step of the finite differences wrapped around the free-wave oracle
ORACLE_DIFF_STEP = 1e-4


# =============================================================================
# Multiplier scalars and pointwise inequalities
# =============================================================================


def multiplier_field(variant: str, parameter: float, n: int = SPACE_DIMENSION) -> MultiplierField:
    """
    Build a validated multiplier.

    Raises:
        InvalidArgumentError: unknown variant, kappa outside (0, 1), rho <= 0, n < 2
    """
    if variant not in MULTIPLIER_VARIANTS:
        raise InvalidArgumentError(f"Unknown multiplier variant '{variant}', expected one of {MULTIPLIER_VARIANTS}")
    if variant == "kss" and not 0.0 < parameter < 1.0:
        raise InvalidArgumentError(f"kappa must lie in (0, 1), got {parameter}")
    if variant == "ms" and not parameter > 0.0:
        raise InvalidArgumentError(f"rho must be positive, got {parameter}")
    if int(n) != n or n < 2:
        raise InvalidArgumentError(f"Dimension n must be an integer >= 2, got {n}")
    return MultiplierField(variant=variant, parameter=float(parameter), n=int(n))


def multiplier_scalars(mf: MultiplierField, r: float) -> MultiplierScalars:
    """f, f', f/r - f', Delta(f/r) and tr(pi) at a radius r > 0."""
    if not r > 0:
        raise InvalidArgumentError(f"Multiplier scalars need r > 0, got {r}")
    radius = np.array([float(r)])
    f = float(mf.f(radius)[0])
    f_prime = float(mf.f_prime(radius)[0])
    return MultiplierScalars(
        f=f,
        f_prime=f_prime,
        f_over_r_minus_f_prime=f / r - f_prime,
        laplacian_f_over_r=float(mf.laplacian_f_over_r(radius)[0]),
        trace_pi=float(mf.trace_pi(radius)[0]),
    )


def log_samples(lo: float, hi: float, count: int) -> np.ndarray:
    """count log-spaced radii in [lo, hi]."""
    return np.geomspace(lo, hi, count)


def dyadic_band_samples(k: int, count: int) -> np.ndarray:
    """count radii spread over [2^{k-1}, 2^k], endpoints included."""
    return np.linspace(2.0 ** (k - 1), 2.0**k, count)


def _compare(name: str, lhs: np.ndarray, rhs: np.ndarray, r: np.ndarray) -> InequalityCheck:
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), np.finfo(float).tiny)
    margin = (lhs - rhs) / scale
    worst = int(np.argmin(margin))
    violations = r[margin < -INEQUALITY_RTOL]
    return InequalityCheck(
        name=name,
        samples=int(r.size),
        min_margin=float(margin[worst]),
        location=float(r[worst]),
        violations=violations.tolist(),
    )


def check_pointwise_inequalities(mf: MultiplierField, samples: np.ndarray) -> InequalityReport:
    """
    Check the pointwise multiplier inequalities on sample radii.

    KSS (any r > 0):
        f/r - f' >= (1-kappa) r^{kappa-1} / (1+r)^kappa
        -Delta(f/r) >= kappa (1-kappa) / (r^{3-kappa} (1+r)^{2+kappa})
    MS (r in the band [rho/2, rho]):
        f' >= 1 / (2 (rho+r))
        f/r - f' >= 1 / (3 (rho+r))
        -Delta(f/r) >= (n-1) / (rho+r)^3

    Equality within a relative 1e-12 counts as satisfied (the MS bounds are sharp
    at the band ends). Violations are data, not errors.
    """
    r = np.asarray(samples, dtype=float)
    if r.size == 0 or np.any(r <= 0):
        raise InvalidArgumentError("Inequality samples must be a non-empty set of radii > 0")

    f = mf.f(r)
    f_prime = mf.f_prime(r)
    lap = mf.laplacian_f_over_r(r)
    p = mf.parameter
    checks: list[InequalityCheck] = []

    if mf.variant == "kss":
        checks.append(
            _compare(
                "f/r - f' >= (1-kappa) r^(kappa-1) / (1+r)^kappa",
                f / r - f_prime,
                (1.0 - p) * r ** (p - 1.0) / (1.0 + r) ** p,
                r,
            )
        )
        checks.append(
            _compare(
                "-Delta(f/r) >= kappa (1-kappa) / (r^(3-kappa) (1+r)^(2+kappa))",
                -lap,
                p * (1.0 - p) / (r ** (3.0 - p) * (1.0 + r) ** (2.0 + p)),
                r,
            )
        )
    else:
        lo, hi = 0.5 * p, p
        slack = INEQUALITY_RTOL * p
        if np.any(r < lo - slack) or np.any(r > hi + slack):
            raise InvalidArgumentError(f"MS samples must lie in the band [{lo}, {hi}]")
        checks.append(_compare("f' >= 1 / (2 (rho+r))", f_prime, 1.0 / (2.0 * (p + r)), r))
        checks.append(_compare("f/r - f' >= 1 / (3 (rho+r))", f / r - f_prime, 1.0 / (3.0 * (p + r)), r))
        checks.append(_compare("-Delta(f/r) >= (n-1) / (rho+r)^3", -lap, (mf.n - 1) / (p + r) ** 3, r))

    report = InequalityReport(
        variant=mf.variant,
        parameter=p,
        samples=int(r.size),
        checks=checks,
        f_in_unit_interval=bool(np.all((f >= 0.0) & (f <= 1.0 + 1e-15))),
        flux_constant=float(np.max(r**2 * np.abs(mf.d_f_over_r(r)))),
    )
    if report.violation_count:
        logger.warning(f"{mf.variant}({p}): {report.violation_count} inequality violations")
    return report


# =============================================================================
# Tensor densities
# =============================================================================


def assemble_densities(
    phi: np.ndarray | float,
    dphi: tuple[np.ndarray | float, np.ndarray | float],
    h: CoefficientSample | None,
    mf: MultiplierField,
    r: np.ndarray | float,
    F: np.ndarray | float = 0.0,
) -> TensorSample:
    """
    Energy-momentum components, momentum densities and Rbar at points (t, r).

    Args:
        phi: Field value(s)
        dphi: (d_t phi, d_r phi); the angular gradient vanishes for radial fields
        h: Coefficient components with derivatives (None for h = 0)
        mf: Multiplier
        r: Radius (> 0), broadcast against the fields
        F: Forcing entering Rbar

    Returns:
        TensorSample

    Raises:
        CoefficientBoundViolation: sum |h^{ab}| > 1/2
        InvalidArgumentError: r <= 0
    """
    h = h if h is not None else CoefficientSample()
    if h.sup_abs() > 0.5:
        raise CoefficientBoundViolation(f"sum |h^ab| = {h.sup_abs():.4g} exceeds 1/2")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InvalidArgumentError("Densities need r > 0")

    # Every component comes back with the common shape of r and the fields
    phi, phi_t, phi_r, r = np.broadcast_arrays(
        np.asarray(phi, dtype=float), np.asarray(dphi[0], dtype=float), np.asarray(dphi[1], dtype=float), r
    )
    c = 0.5 * (mf.n - 1)
    f = mf.f(r)
    f_prime = mf.f_prime(r)
    f_r = mf.f_over_r(r)

    # h^{cd} d_c phi d_d phi, h^{rb} d_b phi, h^{0b} d_b phi
    h_q = h.h00 * phi_t**2 + 2.0 * h.h0r * phi_t * phi_r + h.hs * phi_r**2
    h_r = h.h0r * phi_t + h.hs * phi_r
    h_0 = h.h00 * phi_t + h.h0r * phi_r

    # d^c phi d_c phi = -phi_t^2 + phi_r^2 for g = diag(-1, 1, 1, 1)
    wave = -(phi_t**2) + phi_r**2
    q00 = phi_t**2 + 0.5 * wave + h_0 * phi_t - 0.5 * h_q
    q0r = phi_t * phi_r + h_0 * phi_r
    qr0 = phi_r * phi_t - h_r * phi_t
    qrr = phi_r**2 - 0.5 * wave - h_r * phi_r + 0.5 * h_q

    p0 = f * q0r
    pr = f * qrr
    p0_bar = p0 + c * f_r * phi * phi_t + c * f_r * phi * h_0
    pr_bar = pr + c * f_r * phi * phi_r - 0.5 * c * mf.d_f_over_r(r) * phi**2 - c * f_r * h_r * phi

    div_h = (h.h00_t + h.h0r_r + (mf.n - 1) * h.h0r / r) * phi_t + (h.h0r_t + h.hs_r) * phi_r
    dr_h = h.h00_r * phi_t**2 + 2.0 * h.h0r_r * phi_t * phi_r + h.hs_r * phi_r**2
    lower = phi_r + c * phi / r

    r_bar = (
        -f * phi_r * F
        - c * f_r * phi * F
        - f * div_h * lower
        + 0.5 * f * dr_h
        - f_prime * h_r * lower
        + f_r * h_r * lower
        - f_r * h_r * phi_r
        + 0.5 * f_prime * h_q
    )

    return TensorSample(
        Q00=q00,
        Q0r=q0r,
        Qr0=qr0,
        Qrr=qrr,
        P0=p0,
        Pr=pr,
        P0_bar=p0_bar,
        Pr_bar=pr_bar,
        R_bar=r_bar,
    )


# =============================================================================
# Scenarios
# =============================================================================


def _lambdify(expr: sympy.Expr, t: sympy.Symbol, r: sympy.Symbol):
    fn = sympy.lambdify((t, r), expr, modules="numpy")

    def evaluate(time: float, radii: np.ndarray) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = np.asarray(fn(time, radii), dtype=float)
        return np.broadcast_to(value, radii.shape).copy()

    return evaluate


def manufactured_scenario(
    phi: str,
    h00: str = "0",
    h0r: str = "0",
    hs: str = "0",
    name: str | None = None,
    n: int = SPACE_DIMENSION,
) -> Scenario:
    """
    Closed-form scenario with the forcing derived from the equation.

        F = d_t^2 phi - Delta phi + h00 d_t^2 phi + 2 h0r d_t d_r phi + hs Delta phi

    Args:
        phi: Expression in t and r, e.g. "exp(-t)*exp(-r**2)"
        h00, h0r, hs: Coefficient components as expressions in t and r
        name: Scenario label
        n: Space dimension of the radial Laplacian

    Returns:
        Scenario with vectorized evaluators
    """
    t, r = sympy.symbols("t r", real=True)
    symbols = {"t": t, "r": r}
    phi_e = sympy.sympify(phi, locals=symbols)
    h00_e, h0r_e, hs_e = (sympy.sympify(e, locals=symbols) for e in (h00, h0r, hs))

    phi_t = sympy.diff(phi_e, t)
    phi_r = sympy.diff(phi_e, r)
    phi_tt = sympy.diff(phi_e, t, 2)
    phi_tr = sympy.diff(phi_t, r)
    laplacian = sympy.diff(phi_e, r, 2) + (n - 1) / r * phi_r
    forcing = phi_tt - laplacian + h00_e * phi_tt + 2 * h0r_e * phi_tr + hs_e * laplacian

    components = {
        "h00": h00_e,
        "h0r": h0r_e,
        "hs": hs_e,
        "h00_t": sympy.diff(h00_e, t),
        "h00_r": sympy.diff(h00_e, r),
        "h0r_t": sympy.diff(h0r_e, t),
        "h0r_r": sympy.diff(h0r_e, r),
        "hs_t": sympy.diff(hs_e, t),
        "hs_r": sympy.diff(hs_e, r),
    }
    evaluators = {key: _lambdify(expr, t, r) for key, expr in components.items()}

    def coefficients(time: float, radii: np.ndarray) -> CoefficientSample:
        return CoefficientSample(**{key: fn(time, radii) for key, fn in evaluators.items()})

    return Scenario(
        name=name or f"manufactured[{phi}]",
        phi=_lambdify(phi_e, t, r),
        phi_t=_lambdify(phi_t, t, r),
        phi_r=_lambdify(phi_r, t, r),
        forcing=_lambdify(forcing, t, r),
        coefficients=coefficients,
        expressions={"phi": str(phi_e), "h00": str(h00_e), "h0r": str(h0r_e), "hs": str(hs_e), "F": str(forcing)},
    )


def dalembert_scenario(pair: DataPair, step: float = ORACLE_DIFF_STEP) -> Scenario:
    """Free wave (h = 0, F = 0) from the d'Alembert oracle, derivatives by central differences."""

    def phi(t: float, r: np.ndarray) -> np.ndarray:
        return dalembert_free(pair, t, np.asarray(r, dtype=float))

    def phi_t(t: float, r: np.ndarray) -> np.ndarray:
        lo = max(t - step, 0.0)
        return (phi(t + step, r) - phi(lo, r)) / (t + step - lo)

    def phi_r(t: float, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return (phi(t, r + step) - phi(t, np.abs(r - step))) / (2.0 * step)

    def zero(t: float, r: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(r, dtype=float))

    return Scenario(
        name="dalembert",
        phi=phi,
        phi_t=phi_t,
        phi_r=phi_r,
        forcing=zero,
        coefficients=lambda t, r: CoefficientSample(),
        expressions={"phi": "d'Alembert free wave", "descriptor": pair.descriptor},
    )


# =============================================================================
# Divergence identity
# =============================================================================


def _sample(scenario: Scenario, mf: MultiplierField, t: float, r: np.ndarray) -> tuple[TensorSample, np.ndarray]:
    phi = scenario.phi(t, r)
    sample = assemble_densities(
        phi,
        (scenario.phi_t(t, r), scenario.phi_r(t, r)),
        scenario.coefficients(t, r),
        mf,
        r,
        scenario.forcing(t, r),
    )
    return sample, phi


def _residual_at(scenario: Scenario, mf: MultiplierField, grid: RadialGrid, t: float) -> np.ndarray:
    """LHS - RHS of the identity at the interior nodes r_1 .. r_{nr-1} (origin excluded)."""
    r = grid.r[1:]
    dr, dt = grid.dr, grid.dt
    c = 0.5 * (mf.n - 1)

    here, phi = _sample(scenario, mf, t, r)
    later, _ = _sample(scenario, mf, t + dt, r)
    earlier, _ = _sample(scenario, mf, max(t - dt, 0.0), r)
    dt_p0 = (later.P0_bar - earlier.P0_bar) / (t + dt - max(t - dt, 0.0))

    d_f_over_r = mf.d_f_over_r(r)
    phi_sq = phi**2
    # -c/2 d_r(f/r) phi^2 is differentiated by the product rule with Delta(f/r) in closed form
    geometry = 0.5 * c * mf.laplacian_f_over_r(r) * phi_sq
    field = here.Pr_bar - (-0.5 * c * d_f_over_r * phi_sq)

    inner = slice(1, -1)
    field_div = (field[2:] - field[:-2]) / (2.0 * dr) + (mf.n - 1) * field[inner] / r[inner]
    dphi_sq = (phi_sq[2:] - phi_sq[:-2]) / (2.0 * dr)
    lhs = -dt_p0[inner] + field_div - geometry[inner] - 0.5 * c * d_f_over_r[inner] * dphi_sq

    phi_t = scenario.phi_t(t, r)[inner]
    phi_r = scenario.phi_r(t, r)[inner]
    kinetic = 0.5 * mf.f_prime(r[inner]) * (phi_r**2 + phi_t**2)
    rhs = kinetic - geometry[inner] + here.R_bar[inner]
    return lhs - rhs


def divergence_residual(
    scenario: Scenario,
    mf: MultiplierField,
    grid: RadialGrid,
    T: float,
    collar: float | None = None,
    time_samples: int = 3,
) -> ResidualReport:
    """
    Residual of the divergence identity on [collar, r_max) at interior times.

    The LHS differentiates the assembled momentum densities by central
    differences in t (step dt) and r (step dr); the RHS is assembled pointwise.

    Args:
        scenario: Closed-form (phi, h, F)
        mf: Multiplier
        grid: RadialGrid giving dr, dt and the radial nodes
        T: Time window; residuals are sampled at interior times j*T/(m+1)
        collar: Excluded origin collar (default 4*dr)
        time_samples: Number m of sampled times

    Returns:
        ResidualReport with max and L^2 residuals
    """
    if not T > 0:
        raise InvalidArgumentError(f"T must be positive, got {T}")
    if time_samples < 1:
        raise InvalidArgumentError("time_samples must be >= 1")
    collar = RESIDUAL_COLLAR_CELLS * grid.dr if collar is None else collar

    interior_r = grid.r[2:-1]
    mask = interior_r >= collar
    times = T * np.arange(1, time_samples + 1) / (time_samples + 1)

    max_residual = 0.0
    squared = 0.0
    for t in times:
        residual = np.where(mask, _residual_at(scenario, mf, grid, float(t)), 0.0)
        max_residual = max(max_residual, float(np.max(np.abs(residual))))
        full = np.zeros(grid.size)
        full[2:-1] = residual
        squared += radial_integral(full**2, grid) * T / time_samples

    report = ResidualReport(
        variant=mf.variant,
        parameter=mf.parameter,
        scenario=scenario.name,
        samples=int(mask.sum()) * time_samples,
        collar=float(collar),
        max_residual=max_residual,
        l2_residual=math.sqrt(squared),
    )
    logger.debug(f"Residual {scenario.name} / {mf.variant}({mf.parameter}), nr={grid.nr}: {max_residual:.3e}")
    return report


def residual_refinement_ratio(
    scenario: Scenario,
    mf: MultiplierField,
    grid: RadialGrid,
    T: float,
    collar: float = 0.5,
    time_samples: int = 3,
) -> ResidualReport:
    """
    Residual on grid and on grid.refined(2) over the same physical region.

    Returns:
        The coarse-grid report with refinement_ratio = max_coarse / max_fine
    """
    coarse = divergence_residual(scenario, mf, grid, T, collar, time_samples)
    fine = divergence_residual(scenario, mf, grid.refined(2), T, collar, time_samples)
    coarse.refinement_ratio = coarse.max_residual / fine.max_residual if fine.max_residual > 0 else None
    logger.info(
        f"Identity residual {scenario.name} / {mf.variant}({mf.parameter}): "
        f"{coarse.max_residual:.3e} -> {fine.max_residual:.3e} (ratio {coarse.refinement_ratio})"
    )
    return coarse
