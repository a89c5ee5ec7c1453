"""
Initial Data

Builds radial data pairs (f, g), measures their Sobolev norms, rescales them to a
target size epsilon, and smooths them with the mollifier family rho_j.

Input: profile kind and parameters, RadialGrid
Output: DataPair, NormRecord, MollifierKernel, mollified radial functions

Mollification uses the exact shell formula for the 3-D convolution of radial
functions:

    (rho_j * f)(r) = (2 pi / r) int s f(s) [int_{|r-s|}^{r+s} t rho_j(t) dt] ds

with the r -> 0 limit 4 pi int s^2 rho_j(s) f(s) ds.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from common.config import KERNEL_TABLE_POINTS, SHELL_QUADRATURE_NODES
from common.errors import CannotScaleError, InvalidArgumentError, ResolutionError
from common.io import write_csv
from common.logging_config import get_logger
from initial_data.types import (
    PROFILE_KINDS,
    AnalyticProfile,
    DataPair,
    NormRecord,
    RadialFunction,
    SampledProfile,
)
from radial_grid.core import (
    FieldSnapshot,
    RadialGrid,
    hessian_frobenius_sq,
    l2_norm,
    radial_derivatives,
    radial_integral,
)

logger = get_logger("initial_data")


# =============================================================================
# Profiles
# =============================================================================


def profile(
    kind: str,
    amplitude: float = 1.0,
    center: float = 0.0,
    width: float = 1.0,
    velocity_amplitude: float = 0.0,
) -> DataPair:
    """
    Build a radial data pair from a named profile family.

    f(r) = A * shape((r - c)/w) and g(r) = B * shape((r - c)/w), both symmetrized
    in r so the data are smooth at the origin.

    Args:
        kind: "gaussian", "bump" (compactly supported) or "ripple" (oscillating Gaussian)
        amplitude: A, amplitude of f
        center: c, radius of the profile peak (0 keeps the data centered)
        width: w (> 0)
        velocity_amplitude: B, amplitude of g

    Returns:
        DataPair

    Raises:
        InvalidArgumentError: unknown kind or non-positive width
    """
    if kind not in PROFILE_KINDS:
        raise InvalidArgumentError(f"Unknown profile kind '{kind}', expected one of {PROFILE_KINDS}")
    if not width > 0:
        raise InvalidArgumentError(f"Profile width must be positive, got {width}")

    descriptor = {
        "kind": kind,
        "amplitude": amplitude,
        "center": center,
        "width": width,
        "velocity_amplitude": velocity_amplitude,
        "scale": 1.0,
    }
    return DataPair(
        f=AnalyticProfile(kind, amplitude, center, width),
        g=AnalyticProfile(kind, velocity_amplitude, center, width),
        descriptor=descriptor,
    )


def pair_from_snapshot(snap: FieldSnapshot) -> DataPair:
    """Restart data (phi(t), d_t phi(t)) of a snapshot as a sampled pair."""
    grid = snap.grid
    return DataPair(
        f=SampledProfile(grid.r.copy(), snap.phi.copy()),
        g=SampledProfile(grid.r.copy(), snap.phi_t.copy()),
        descriptor={"kind": "snapshot", "t": snap.t, "scale": 1.0},
    )


def write_pair_csv(pair: DataPair, grid: RadialGrid, path: str | Path) -> Path:
    """Write sampled data to CSV with columns r, f, g."""
    f, g = pair.sample(grid)
    return write_csv(path, pd.DataFrame({"r": grid.r, "f": f, "g": g}))


# =============================================================================
# Norms and scaling
# =============================================================================


def sobolev_norms(pair: DataPair, grid: RadialGrid) -> NormRecord:
    """
    Measure ||grad f||_{H^1} + ||g||_{H^1} and its parts on the grid.

    Args:
        pair: Data pair
        grid: RadialGrid used for sampling and quadrature

    Returns:
        NormRecord
    """
    f, g = pair.sample(grid)
    f_r, f_rr = radial_derivatives(f, grid, parity="even")
    g_r, _ = radial_derivatives(g, grid, parity="even")

    h1dot_f = l2_norm(f_r, grid)
    hessian = math.sqrt(max(radial_integral(hessian_frobenius_sq(f_r, f_rr, grid), grid), 0.0))
    l2_g = l2_norm(g, grid)

    h1_grad_f = math.sqrt(h1dot_f**2 + hessian**2)
    h1_g = math.sqrt(l2_g**2 + l2_norm(g_r, grid) ** 2)

    return NormRecord(
        l2_f=l2_norm(f, grid),
        h1dot_f=h1dot_f,
        h1_grad_f=h1_grad_f,
        l2_g=l2_g,
        h1_g=h1_g,
        epsilon=h1_grad_f + h1_g,
    )


def scale_to_epsilon(pair: DataPair, grid: RadialGrid, eps_target: float) -> DataPair:
    """
    Rescale a pair so that ||grad f||_{H^1} + ||g||_{H^1} = eps_target.

    The norm is homogeneous of degree one, so a single multiplication suffices.

    Raises:
        InvalidArgumentError: negative target
        CannotScaleError: the pair is zero and the target is not
    """
    if eps_target < 0:
        raise InvalidArgumentError(f"eps_target must be nonnegative, got {eps_target}")
    if eps_target == 0:
        return pair.scaled(0.0)

    eps = sobolev_norms(pair, grid).epsilon
    if eps == 0:
        raise CannotScaleError("Cannot rescale a zero data pair to a nonzero size")

    multiplier = eps_target / eps
    logger.debug(f"Scaling pair: eps {eps:.6g} -> {eps_target:.6g} (x{multiplier:.6g})")
    return pair.scaled(multiplier)


# =============================================================================
# Mollifiers
# =============================================================================


def _base_bump(s: np.ndarray) -> np.ndarray:
    """exp(-1/(1 - s^2)) on |s| < 1, zero outside (unnormalized)."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _scalar_bump(s: float) -> float:
    return math.exp(-1.0 / (1.0 - s * s)) if abs(s) < 1.0 else 0.0


@lru_cache(maxsize=1)
def _normalization() -> float:
    """Z such that 4 pi Z int_0^1 s^2 exp(-1/(1-s^2)) ds = 1."""
    integral, _ = quad(lambda s: s * s * _scalar_bump(s), 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return 1.0 / (4.0 * math.pi * integral)


@lru_cache(maxsize=1)
def _first_moment_table() -> CubicSpline:
    """G(a) = int_0^a t rho(t) dt for the normalized base kernel, a in [0, 1]."""
    z = _normalization()
    edges = np.linspace(0.0, 1.0, KERNEL_TABLE_POINTS)
    pieces = [
        quad(lambda t: z * t * _scalar_bump(t), lo, hi, epsabs=0.0, epsrel=1e-13)[0]
        for lo, hi in zip(edges[:-1], edges[1:])
    ]
    cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
    return CubicSpline(edges, cumulative)


@dataclass(frozen=True)
class MollifierKernel:
    """rho_j(x) = j^3 rho(j x) with rho = Z exp(-1/(1 - |x|^2)) on the unit ball."""

    j: float
    normalization: float

    @property
    def support_radius(self) -> float:
        return 1.0 / self.j

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.j**3 * self.normalization * _base_bump(self.j * np.asarray(r, dtype=float))

    def value(self, r: float) -> float:
        """rho_j at a single radius."""
        return self.j**3 * self.normalization * _scalar_bump(self.j * r)

    def mass(self) -> float:
        """int_{R^3} rho_j dx by adaptive quadrature."""
        value, _ = quad(
            lambda r: 4.0 * math.pi * r * r * self.value(r),
            0.0,
            self.support_radius,
            epsabs=0.0,
            epsrel=1e-13,
            limit=200,
        )
        return value

    def second_moment(self) -> float:
        """m_2(j) = int |y|^2 rho_j(y) dy."""
        z = self.normalization
        value, _ = quad(
            lambda s: 4.0 * math.pi * s**4 * z * _scalar_bump(s),
            0.0,
            1.0,
            epsabs=0.0,
            epsrel=1e-13,
        )
        return value / self.j**2

    def cumulative_first_moment(self, a: np.ndarray) -> np.ndarray:
        """int_0^a t rho_j(t) dt, saturating at the support radius."""
        scaled = np.clip(self.j * np.asarray(a, dtype=float), 0.0, 1.0)
        return self.j * _first_moment_table()(scaled)


def mollifier_kernel(j: float) -> MollifierKernel:
    """
    Mollifier at scale j (support radius 1/j).

    Raises:
        InvalidArgumentError: j < 1
    """
    if not j >= 1:
        raise InvalidArgumentError(f"Mollifier scale j must be >= 1, got {j}")
    return MollifierKernel(j=float(j), normalization=_normalization())


def _convolve_at(f: RadialFunction, kernel: MollifierKernel, r: np.ndarray) -> np.ndarray:
    """Shell-formula convolution at radii r (vectorized over r)."""
    nodes, weights = np.polynomial.legendre.leggauss(SHELL_QUADRATURE_NODES)
    eps = kernel.support_radius
    out = np.empty_like(r)

    at_origin = r == 0.0
    if np.any(at_origin):
        s = 0.5 * eps * (nodes + 1.0)
        value = 0.5 * eps * np.sum(weights * 4.0 * math.pi * s**2 * kernel(s) * f(s))
        out[at_origin] = value

    rr = r[~at_origin][:, None]
    if rr.size == 0:
        return out

    total = np.zeros(rr.shape[0])
    # Split at s = r where |r - s| has its kink
    for lo, hi in ((np.maximum(rr - eps, 0.0), rr), (rr, rr + eps)):
        half = 0.5 * (hi - lo)
        s = lo + half * (nodes + 1.0)
        shell = kernel.cumulative_first_moment(rr + s) - kernel.cumulative_first_moment(np.abs(rr - s))
        total += np.sum(weights * half * s * f(s) * shell, axis=1)

    out[~at_origin] = 2.0 * math.pi * total / rr[:, 0]
    return out


def mollify_radial(f: RadialFunction, j: float, grid: RadialGrid) -> SampledProfile:
    """
    Radial convolution rho_j * f, sampled on the grid nodes.

    Closed-form f are integrated exactly at any scale. Sampled f must resolve the
    kernel: their spacing has to be below 1/(4j).

    Args:
        f: Radial function
        j: Mollifier scale (>= 1)
        grid: Nodes where the result is sampled

    Returns:
        SampledProfile of the mollified function

    Raises:
        ResolutionError: sampled f too coarse for the kernel
    """
    kernel = mollifier_kernel(j)
    spacing = f.spacing
    if spacing is not None and not spacing < 1.0 / (4.0 * kernel.j):
        raise ResolutionError(
            f"Sampled data with spacing {spacing:.3g} cannot resolve mollifier scale j={j} "
            f"(need spacing < {1.0 / (4.0 * kernel.j):.3g})"
        )
    values = _convolve_at(f, kernel, grid.r.copy())
    return SampledProfile(grid.r.copy(), values)


def mollify_pair(pair: DataPair, j: float, grid: RadialGrid) -> DataPair:
    """Mollify both components of a pair at scale j."""
    return DataPair(
        f=mollify_radial(pair.f, j, grid),
        g=mollify_radial(pair.g, j, grid),
        descriptor={**pair.descriptor, "mollifier_j": float(j)},
    )


def finest_resolvable_level(pair: DataPair, k_max: int) -> int:
    """Largest k <= k_max whose kernel rho_{2^k} the pair's sampling can resolve."""
    spacings = [s for s in (pair.f.spacing, pair.g.spacing) if s is not None]
    if not spacings:
        return k_max
    limit = 1.0 / (4.0 * max(spacings))
    k = 0
    while k < k_max and 2.0 ** (k + 1) < limit:
        k += 1
    return k


def telescoping_increments(pair: DataPair, grid: RadialGrid, k_max: int) -> pd.DataFrame:
    """
    Increments ||grad(f_k - f_{k-1})|| + ||g_k - g_{k-1}|| of the mollified data.

    Args:
        pair: Data pair
        grid: RadialGrid
        k_max: Last dyadic level (f_k = rho_{2^k} * f)

    Returns:
        DataFrame with columns k, increment, partial_sum (k = 1..k_max)
    """
    previous = mollify_pair(pair, 1.0, grid)
    rows = []
    partial = 0.0
    for k in range(1, k_max + 1):
        current = mollify_pair(pair, 2.0**k, grid)
        f_prev, g_prev = previous.sample(grid)
        f_cur, g_cur = current.sample(grid)
        grad_diff, _ = radial_derivatives(f_cur - f_prev, grid, parity="even")
        increment = l2_norm(grad_diff, grid) + l2_norm(g_cur - g_prev, grid)
        partial += increment
        rows.append({"k": k, "increment": increment, "partial_sum": partial})
        previous = current
    return pd.DataFrame(rows, columns=["k", "increment", "partial_sum"])


def data_distance(pair: DataPair, other: DataPair | None, grid: RadialGrid) -> float:
    """||grad(f - f~)|| + ||g - g~||, the Hdot^1 x L^2 distance (other=None measures pair itself)."""
    f, g = pair.sample(grid)
    if other is not None:
        f_other, g_other = other.sample(grid)
        f, g = f - f_other, g - g_other
    f_r, _ = radial_derivatives(f, grid, parity="even")
    return l2_norm(f_r, grid) + l2_norm(g, grid)
