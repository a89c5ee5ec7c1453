"""Type definitions for the multiplier laboratory."""

from collections.abc import Callable
from dataclasses import asdict, dataclass, field

import numpy as np

from common.config import SPACE_DIMENSION

ArrayFn = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MultiplierField:
    """
    Radial multiplier X = f(r) x/r * d_x.

    KSS: f = (r/(1+r))^kappa, 0 < kappa < 1
    MS:  f = r/(rho + r), rho > 0
    """

    variant: str
    parameter: float
    n: int = SPACE_DIMENSION

    def f(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.variant == "kss":
            return (r / (1.0 + r)) ** self.parameter
        return r / (self.parameter + r)

    def f_prime(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.variant == "kss":
            k = self.parameter
            return k * r ** (k - 1.0) * (1.0 + r) ** (-k - 1.0)
        return self.parameter / (self.parameter + r) ** 2

    def f_second(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.variant == "kss":
            k = self.parameter
            return k * (
                (k - 1.0) * r ** (k - 2.0) * (1.0 + r) ** (-k - 1.0)
                - (k + 1.0) * r ** (k - 1.0) * (1.0 + r) ** (-k - 2.0)
            )
        return -2.0 * self.parameter / (self.parameter + r) ** 3

    def f_over_r(self, r: np.ndarray) -> np.ndarray:
        return self.f(r) / np.asarray(r, dtype=float)

    def d_f_over_r(self, r: np.ndarray) -> np.ndarray:
        """d_r (f/r) = (f' - f/r) / r."""
        r = np.asarray(r, dtype=float)
        return (self.f_prime(r) - self.f_over_r(r)) / r

    def laplacian_f_over_r(self, r: np.ndarray) -> np.ndarray:
        """Delta (f/r) = r^{1-n} d_r (r^{n-2} (f' - f/r))."""
        r = np.asarray(r, dtype=float)
        g = self.f_prime(r) - self.f_over_r(r)
        g_prime = self.f_second(r) - self.f_prime(r) / r + self.f(r) / r**2
        return (self.n - 2) * g / r**2 + g_prime / r

    def trace_pi(self, r: np.ndarray) -> np.ndarray:
        """Trace of the deformation tensor, f' + (n-1) f/r."""
        return self.f_prime(r) + (self.n - 1) * self.f_over_r(r)

    def describe(self) -> dict:
        return {"variant": self.variant, "parameter": self.parameter, "n": self.n}


@dataclass
class MultiplierScalars:
    f: float
    f_prime: float
    f_over_r_minus_f_prime: float
    laplacian_f_over_r: float
    trace_pi: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class InequalityCheck:
    """One pointwise inequality lhs >= rhs over a sample set."""

    name: str
    samples: int
    # min over samples of (lhs - rhs) / max(|lhs|, |rhs|)
    min_margin: float
    location: float
    violations: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class InequalityReport:
    variant: str
    parameter: float
    samples: int
    checks: list[InequalityCheck] = field(default_factory=list)
    # 0 <= f <= 1 on every sample
    f_in_unit_interval: bool = True
    # max r^2 |d_r (f/r)|
    flux_constant: float = 0.0

    @property
    def min_margin(self) -> float:
        return min((c.min_margin for c in self.checks), default=float("inf"))

    @property
    def violation_count(self) -> int:
        return sum(len(c.violations) for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "parameter": self.parameter,
            "samples": self.samples,
            "min_margin": self.min_margin,
            "violations": self.violation_count,
            "f_in_unit_interval": self.f_in_unit_interval,
            "flux_constant": self.flux_constant,
            "checks": [c.to_dict() for c in self.checks],
        }


@dataclass
class CoefficientSample:
    """
    Radial coefficient h^{ab}: h00, h0r (h^{0a} = h0r x^a/r) and an isotropic
    spatial part hs delta^{ab}, with their t and r derivatives.

    Fields are scalars or arrays of a common shape.
    """

    h00: np.ndarray | float = 0.0
    h0r: np.ndarray | float = 0.0
    hs: np.ndarray | float = 0.0
    h00_t: np.ndarray | float = 0.0
    h00_r: np.ndarray | float = 0.0
    h0r_t: np.ndarray | float = 0.0
    h0r_r: np.ndarray | float = 0.0
    hs_t: np.ndarray | float = 0.0
    hs_r: np.ndarray | float = 0.0

    def sup_abs(self) -> float:
        """sup of |h00| + 2|h0r| + 3|hs|, the sum of |h^{ab}| over components."""
        total = np.abs(self.h00) + 2.0 * np.abs(self.h0r) + 3.0 * np.abs(self.hs)
        return float(np.max(total))


@dataclass
class TensorSample:
    """Energy-momentum components in the (t, r) reduction and the momentum densities."""

    Q00: np.ndarray | float
    Q0r: np.ndarray | float
    Qr0: np.ndarray | float
    Qrr: np.ndarray | float
    P0: np.ndarray | float
    Pr: np.ndarray | float
    P0_bar: np.ndarray | float
    Pr_bar: np.ndarray | float
    R_bar: np.ndarray | float

    def to_dict(self) -> dict:
        return {k: np.asarray(v).tolist() for k, v in asdict(self).items()}


@dataclass(frozen=True)
class Scenario:
    """Closed-form (phi, h, F) with the first derivatives of phi."""

    name: str
    phi: ArrayFn
    phi_t: ArrayFn
    phi_r: ArrayFn
    forcing: ArrayFn
    coefficients: Callable[[float, np.ndarray], CoefficientSample]
    expressions: dict = field(default_factory=dict)


@dataclass
class ResidualReport:
    variant: str
    parameter: float
    scenario: str
    samples: int
    collar: float
    max_residual: float
    l2_residual: float
    refinement_ratio: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)
