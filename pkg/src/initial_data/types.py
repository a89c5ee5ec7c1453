"""Type definitions for radial data pairs and their norms."""

from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Literal, Protocol

import numpy as np
from scipy.interpolate import CubicSpline

from radial_grid.core import RadialGrid

ProfileKind = Literal["gaussian", "bump", "ripple"]
PROFILE_KINDS: tuple[str, ...] = ("gaussian", "bump", "ripple")


class RadialFunction(Protocol):
    """A radial function r -> v(r), evaluated evenly for r < 0."""

    # Sampling spacing of the underlying data; None for closed forms
    spacing: float | None
    # Radius beyond which the function is negligible
    support: float

    def __call__(self, r: np.ndarray) -> np.ndarray: ...


def _shape(kind: str, s: np.ndarray, width: float) -> np.ndarray:
    x = s / width
    if kind == "gaussian":
        return np.exp(-(x**2))
    if kind == "ripple":
        return np.exp(-(x**2)) * np.cos(np.pi * x)
    # bump: exp(1 - 1/(1 - x^2)) inside the unit interval, peak value 1
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


@dataclass(frozen=True)
class AnalyticProfile:
    """Closed-form profile A * shape((r - c)/w), symmetrized in r so it is smooth at 0."""

    kind: str
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0
    spacing: float | None = None

    @property
    def support(self) -> float:
        reach = self.width if self.kind == "bump" else 6.0 * self.width
        return abs(self.center) + reach

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        if self.amplitude == 0.0:
            return np.zeros_like(r)
        if self.center == 0.0:
            return self.amplitude * _shape(self.kind, r, self.width)
        left = _shape(self.kind, r - self.center, self.width)
        right = _shape(self.kind, r + self.center, self.width)
        return self.amplitude * 0.5 * (left + right)


@dataclass(frozen=True, eq=False)
class SampledProfile:
    """Radial function known at nodes; cubic interpolation with zero slope at the origin."""

    nodes: np.ndarray
    values: np.ndarray

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def support(self) -> float:
        nonzero = np.nonzero(self.values)[0]
        return float(self.nodes[nonzero[-1]]) if nonzero.size else 0.0

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.nodes, self.values, bc_type=((1, 0.0), "not-a-knot"))

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        inside = r <= self.nodes[-1]
        out[inside] = self._spline(r[inside])
        return out


@dataclass(frozen=True)
class ScaledProfile:
    """Scalar multiple of another radial function."""

    base: RadialFunction
    factor: float

    @property
    def spacing(self) -> float | None:
        return self.base.spacing

    @property
    def support(self) -> float:
        return self.base.support

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.factor * self.base(r)


@dataclass(frozen=True)
class DataPair:
    """Initial data phi(0) = f, d_t phi(0) = g."""

    f: RadialFunction
    g: RadialFunction
    # Profile kind, parameters, overall scale and mollifier scale if any
    descriptor: dict = field(default_factory=dict)

    @property
    def support(self) -> float:
        return max(self.f.support, self.g.support)

    def sample(self, grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
        """Node values (f, g) on the grid."""
        return self.f(grid.r), self.g(grid.r)

    def scaled(self, factor: float) -> "DataPair":
        descriptor = {**self.descriptor, "scale": self.descriptor.get("scale", 1.0) * factor}
        return DataPair(ScaledProfile(self.f, factor), ScaledProfile(self.g, factor), descriptor)

    def plus(self, other: "DataPair", weight: float = 1.0) -> "DataPair":
        """Pointwise combination self + weight * other."""
        return DataPair(
            _SumProfile(self.f, other.f, weight),
            _SumProfile(self.g, other.g, weight),
            {**self.descriptor, "perturbation": other.descriptor, "weight": weight},
        )


@dataclass(frozen=True)
class _SumProfile:
    first: RadialFunction
    second: RadialFunction
    weight: float

    @property
    def spacing(self) -> float | None:
        spacings = [s for s in (self.first.spacing, self.second.spacing) if s is not None]
        return max(spacings) if spacings else None

    @property
    def support(self) -> float:
        return max(self.first.support, self.second.support)

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.first(r) + self.weight * self.second(r)


@dataclass
class NormRecord:
    """Sobolev norms of a data pair (L^2(R^3)-based, radial quadrature)."""

    l2_f: float
    # ||grad f||_{L^2}
    h1dot_f: float
    # ||grad f||_{H^1} = (||grad f||^2 + ||D^2 f||^2)^(1/2)
    h1_grad_f: float
    l2_g: float
    # ||g||_{H^1} = (||g||^2 + ||grad g||^2)^(1/2)
    h1_g: float
    # epsilon = ||grad f||_{H^1} + ||g||_{H^1}
    epsilon: float

    def to_dict(self) -> dict:
        return asdict(self)
