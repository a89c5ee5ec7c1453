"""
Radial Grid

Uniform radial mesh for the reduced problem in u = r*phi, with discrete calculus
and the radial quadrature used by every norm in the laboratory.

Input: domain radius, node count, CFL factor, coefficient bound
Output: RadialGrid, derivative arrays, FieldSnapshot views of one time level

Stencils are second order everywhere. Interior nodes use central differences,
the outer boundary uses one-sided stencils, and the origin uses the parity of the
field (u is odd in r, phi is even), which is what one-sided stencils on u reduce
to once the removable singularity at r = 0 is taken into account.
"""

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np

from common.config import (
    CFL_FACTOR,
    COEFF_BOUND,
    COEFF_BOUND_MAX,
    GRID_POLICY_DR,
    GRID_POLICY_MARGIN,
    MIN_NODES,
)
from common.errors import CoefficientBoundViolation, InvalidArgumentError
from common.logging_config import get_logger

logger = get_logger("radial_grid")

Parity = Literal["none", "even", "odd"]


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform mesh r_i = i*dr, i = 0..nr, with its CFL time step."""

    r_max: float
    nr: int
    dr: float
    dt: float
    cfl_factor: float
    coeff_bound: float

    @cached_property
    def r(self) -> np.ndarray:
        """Node radii."""
        r = np.arange(self.nr + 1, dtype=float) * self.dr
        r.setflags(write=False)
        return r

    @cached_property
    def bracket_r(self) -> np.ndarray:
        """Japanese bracket <r> = (1 + r^2)^(1/2)."""
        b = np.sqrt(1.0 + self.r**2)
        b.setflags(write=False)
        return b

    @property
    def size(self) -> int:
        return self.nr + 1

    def steps_for(self, T: float) -> tuple[int, float]:
        """
        Number of steps and effective step to land exactly on T.

        The effective step never exceeds dt, so the CFL margin is kept.

        Args:
            T: Final time (> 0)

        Returns:
            (n_steps, dt_eff) with n_steps * dt_eff == T
        """
        if not T > 0:
            raise InvalidArgumentError(f"T must be positive, got {T}")
        n_steps = max(1, math.ceil(T / self.dt - 1e-9))
        return n_steps, T / n_steps

    def refined(self, factor: int = 2) -> "RadialGrid":
        """Same domain and CFL policy with dr divided by factor."""
        return build_grid(self.r_max, self.nr * factor, self.cfl_factor, self.coeff_bound)

    def describe(self) -> dict:
        return {
            "r_max": self.r_max,
            "nr": self.nr,
            "dr": self.dr,
            "dt": self.dt,
            "cfl_factor": self.cfl_factor,
            "coeff_bound": self.coeff_bound,
        }


def build_grid(
    r_max: float,
    nr: int,
    cfl_factor: float = CFL_FACTOR,
    coeff_bound: float = COEFF_BOUND,
) -> RadialGrid:
    """
    Build a uniform radial grid with dt = cfl_factor * dr / sqrt(1 + coeff_bound).

    Args:
        r_max: Domain radius (> 0)
        nr: Number of cells (>= 16)
        cfl_factor: Fraction of the CFL limit, in (0, 1)
        coeff_bound: Bound on |h| used for the worst-case wave speed, in [0, 1/2]

    Returns:
        RadialGrid

    Raises:
        InvalidArgumentError: Degenerate mesh or CFL factor out of range
        CoefficientBoundViolation: coeff_bound > 1/2
    """
    if not r_max > 0:
        raise InvalidArgumentError(f"r_max must be positive, got {r_max}")
    if int(nr) != nr or nr < MIN_NODES:
        raise InvalidArgumentError(f"nr must be an integer >= {MIN_NODES}, got {nr}")
    if not 0 < cfl_factor < 1:
        raise InvalidArgumentError(f"cfl_factor must lie in (0, 1), got {cfl_factor}")
    if coeff_bound < 0:
        raise InvalidArgumentError(f"coeff_bound must be nonnegative, got {coeff_bound}")
    if coeff_bound > COEFF_BOUND_MAX:
        raise CoefficientBoundViolation(
            f"coeff_bound {coeff_bound} exceeds the admissible bound {COEFF_BOUND_MAX}"
        )

    nr = int(nr)
    dr = r_max / nr
    dt = cfl_factor * dr / math.sqrt(1.0 + coeff_bound)
    logger.debug(f"Grid built: r_max={r_max}, nr={nr}, dr={dr:.3g}, dt={dt:.3g}")
    return RadialGrid(
        r_max=float(r_max),
        nr=nr,
        dr=dr,
        dt=dt,
        cfl_factor=float(cfl_factor),
        coeff_bound=float(coeff_bound),
    )


def grid_policy(
    support: float,
    T: float,
    coeff_bound: float = COEFF_BOUND,
    margin: float = GRID_POLICY_MARGIN,
    dr: float = GRID_POLICY_DR,
    cfl_factor: float = CFL_FACTOR,
) -> RadialGrid:
    """
    Grid large enough to hold the light cone of the data over [0, T].

    r_max = support + sqrt(1 + coeff_bound) * T + margin, nr from the target dr.
    """
    if not T > 0:
        raise InvalidArgumentError(f"T must be positive, got {T}")
    if not dr > 0:
        raise InvalidArgumentError(f"dr must be positive, got {dr}")
    r_max = support + math.sqrt(1.0 + coeff_bound) * T + margin
    nr = max(MIN_NODES, math.ceil(r_max / dr))
    return build_grid(r_max, nr, cfl_factor, coeff_bound)


def _check_length(values: np.ndarray, grid: RadialGrid, name: str = "values") -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise InvalidArgumentError(
            f"{name} has shape {values.shape}, expected ({grid.size},) for nr={grid.nr}"
        )
    return values


def radial_derivatives(
    values: np.ndarray,
    grid: RadialGrid,
    parity: Parity = "none",
) -> tuple[np.ndarray, np.ndarray]:
    """
    First and second radial derivatives at the nodes.

    Central differences in the interior, second-order one-sided stencils at the
    boundaries. With parity "even" or "odd" the origin uses the reflected field
    instead of a one-sided stencil.

    Args:
        values: Node values, length nr + 1
        grid: RadialGrid
        parity: Symmetry of the field under r -> -r

    Returns:
        (first derivative, second derivative)
    """
    v = _check_length(values, grid)
    dr = grid.dr

    d1 = np.empty_like(v)
    d2 = np.empty_like(v)

    d1[1:-1] = (v[2:] - v[:-2]) / (2.0 * dr)
    d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dr**2

    # Outer boundary
    d1[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dr)
    d2[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / dr**2

    # Origin
    if parity == "even":
        d1[0] = 0.0
        d2[0] = 2.0 * (v[1] - v[0]) / dr**2
    elif parity == "odd":
        d1[0] = (8.0 * v[1] - v[2]) / (6.0 * dr)
        d2[0] = 0.0
    else:
        d1[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dr)
        d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / dr**2

    return d1, d2


def hessian_frobenius_sq(phi_r: np.ndarray, phi_rr: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """
    |D^2 phi|^2 = phi_rr^2 + 2 (phi_r / r)^2 for radial phi.

    The origin takes the limit 3 phi_rr(0)^2.
    """
    phi_r = _check_length(phi_r, grid, "phi_r")
    phi_rr = _check_length(phi_rr, grid, "phi_rr")

    out = np.empty_like(phi_rr)
    out[1:] = phi_rr[1:] ** 2 + 2.0 * (phi_r[1:] / grid.r[1:]) ** 2
    out[0] = 3.0 * phi_rr[0] ** 2
    return out


def divide_by_r(u: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """
    phi = u / r with the removable singularity filled by phi(0) = u_r(0).

    u is odd in r, so the fourth-order central stencil for u_r(0) only needs
    u_1 and u_2.
    """
    u = _check_length(u, grid, "u")
    phi = np.empty_like(u)
    phi[1:] = u[1:] / grid.r[1:]
    phi[0] = (8.0 * u[1] - u[2]) / (6.0 * grid.dr)
    return phi


@lru_cache(maxsize=64)
def _moment_weights(nr: int, dr: float, p: float) -> np.ndarray:
    """Weights w_i with sum w_i q_i = int_0^R r^p q(r) dr for piecewise-linear q."""
    edges = np.arange(nr + 1, dtype=float) * dr
    a, b = edges[:-1], edges[1:]
    m0 = (b ** (p + 1) - a ** (p + 1)) / (p + 1)
    m1 = (b ** (p + 2) - a ** (p + 2)) / (p + 2)

    # Linear hat functions on each cell: q = q_i (b - r)/dr + q_{i+1} (r - a)/dr
    left = (b * m0 - m1) / dr
    right = (m1 - a * m0) / dr

    w = np.zeros(nr + 1)
    w[:-1] += left
    w[1:] += right
    w.setflags(write=False)
    return w


def moment_weights(grid: RadialGrid, p: float) -> np.ndarray:
    """
    Exact cell-moment quadrature weights for int r^p q(r) dr.

    Integrable singularities r^p with p > -1 at the origin are integrated exactly
    against the piecewise-linear interpolant of q, so node 0 needs no special case.
    """
    if not p > -1:
        raise InvalidArgumentError(f"moment exponent must exceed -1, got {p}")
    return _moment_weights(grid.nr, grid.dr, float(p))


def radial_integral(q: np.ndarray, grid: RadialGrid, p: float = 2.0) -> float:
    """
    4*pi * int_0^{r_max} r^p q(r) dr.

    With the default p = 2 this is the integral of a radial q over the ball with
    measure dx = 4*pi r^2 dr.
    """
    q = _check_length(q, grid, "integrand")
    return float(4.0 * math.pi * np.dot(moment_weights(grid, p), q))


def l2_norm(values: np.ndarray, grid: RadialGrid) -> float:
    """L^2(R^3) norm of a radial function sampled on the grid."""
    return math.sqrt(max(radial_integral(np.asarray(values) ** 2, grid), 0.0))


@dataclass(frozen=True, eq=False)
class FieldSnapshot:
    """
    One time level of the reduced field u = r*phi.

    Derived quantities are computed lazily and cached. When the producing solver
    knows them, the coefficient h, the forcing F and the gradient of h at the level
    are attached so harness sinks can form interaction integrals.
    """

    t: float
    u: np.ndarray
    u_t: np.ndarray
    grid: RadialGrid
    # u_tt from the PDE; needed for phi_tt and the second-order norms
    u_tt: np.ndarray | None = None
    step: int = 0
    is_final: bool = False
    h: np.ndarray | None = None
    forcing: np.ndarray | None = None
    dh_t: np.ndarray | None = None
    dh_r: np.ndarray | None = None

    @classmethod
    def from_phi(
        cls,
        t: float,
        phi: np.ndarray,
        phi_t: np.ndarray,
        grid: RadialGrid,
        phi_tt: np.ndarray | None = None,
        **extra,
    ) -> "FieldSnapshot":
        """Build a snapshot from phi-level arrays (u = r*phi, u[0] = 0)."""
        r = grid.r
        u_tt = None if phi_tt is None else r * np.asarray(phi_tt, dtype=float)
        return cls(
            t=t,
            u=r * np.asarray(phi, dtype=float),
            u_t=r * np.asarray(phi_t, dtype=float),
            grid=grid,
            u_tt=u_tt,
            **extra,
        )

    @cached_property
    def phi(self) -> np.ndarray:
        return divide_by_r(self.u, self.grid)

    @cached_property
    def phi_t(self) -> np.ndarray:
        return divide_by_r(self.u_t, self.grid)

    @cached_property
    def phi_tt(self) -> np.ndarray | None:
        if self.u_tt is None:
            return None
        return divide_by_r(self.u_tt, self.grid)

    @cached_property
    def _phi_derivatives(self) -> tuple[np.ndarray, np.ndarray]:
        return radial_derivatives(self.phi, self.grid, parity="even")

    @property
    def phi_r(self) -> np.ndarray:
        return self._phi_derivatives[0]

    @property
    def phi_rr(self) -> np.ndarray:
        return self._phi_derivatives[1]

    @cached_property
    def phi_tr(self) -> np.ndarray:
        return radial_derivatives(self.phi_t, self.grid, parity="even")[0]

    @cached_property
    def hessian_sq(self) -> np.ndarray:
        return hessian_frobenius_sq(self.phi_r, self.phi_rr, self.grid)

    @cached_property
    def dphi_sq(self) -> np.ndarray:
        """|d phi|^2 = phi_t^2 + |grad phi|^2 (angular gradient vanishes)."""
        return self.phi_t**2 + self.phi_r**2

    @cached_property
    def d2phi_sq(self) -> np.ndarray | None:
        """|d d phi|^2 = phi_tt^2 + 2 |grad phi_t|^2 + |D^2 phi|^2."""
        if self.phi_tt is None:
            return None
        return self.phi_tt**2 + 2.0 * self.phi_tr**2 + self.hessian_sq

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.u_t)))
