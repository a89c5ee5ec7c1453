"""Type definitions for the wave solver."""

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal, Protocol

import numpy as np

from common.errors import InvalidArgumentError
from radial_grid.core import FieldSnapshot, RadialGrid

# F(t, r) on an array of radii
ForcingFn = Callable[[float, np.ndarray], np.ndarray]

SolveStatus = Literal["completed", "blowup", "cfl_violation"]
HKind = Literal["linear", "quadratic"]

# Relative step for the time difference of coefficients without a gradient
_TIME_DIFF_STEP = 1e-6


class LevelSink(Protocol):
    """Anything that consumes solver levels in time order."""

    def accept(self, snap: FieldSnapshot) -> None: ...


@dataclass(frozen=True)
class CoefficientField:
    """
    Coefficient h(t, r) of the linear equation d_t^2 phi - (1 - h) Delta phi = F.

    When no gradient is supplied, d_t h comes from a central time difference and
    d_r h from second-order differences on the grid.
    """

    value: Callable[[float, np.ndarray], np.ndarray]
    gradient: Callable[[float, np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    # Known bounds, if any: sup |h| and sup r^{1/2} <r>^{1/2} |dh|
    sup_bound: float | None = None
    weighted_gradient_bound: float | None = None
    label: str = "custom"

    @classmethod
    def zero(cls) -> "CoefficientField":
        def value(t: float, r: np.ndarray) -> np.ndarray:
            return np.zeros_like(r)

        def gradient(t: float, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return np.zeros_like(r), np.zeros_like(r)

        return cls(value, gradient, sup_bound=0.0, weighted_gradient_bound=0.0, label="zero")

    @classmethod
    def gaussian(cls, amplitude: float, width: float = 1.0) -> "CoefficientField":
        """Static h = A exp(-r^2/w^2)."""
        if not width > 0:
            raise InvalidArgumentError(f"width must be positive, got {width}")

        def value(t: float, r: np.ndarray) -> np.ndarray:
            return amplitude * np.exp(-((r / width) ** 2))

        def gradient(t: float, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            h_r = -2.0 * r / width**2 * value(t, r)
            return np.zeros_like(r), h_r

        return cls(value, gradient, sup_bound=abs(amplitude), label=f"gaussian({amplitude}, {width})")

    def sample(self, t: float, grid: RadialGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(h, d_t h, d_r h) at the grid nodes."""
        r = grid.r
        h = np.asarray(self.value(t, r), dtype=float)
        if self.gradient is not None:
            h_t, h_r = self.gradient(t, r)
            return h, np.asarray(h_t, dtype=float), np.asarray(h_r, dtype=float)

        delta = _TIME_DIFF_STEP * max(1.0, abs(t))
        h_t = (np.asarray(self.value(t + delta, r)) - np.asarray(self.value(t - delta, r))) / (2.0 * delta)
        h_r = np.gradient(h, grid.dr, edge_order=2)
        h_r[0] = 0.0
        return h, h_t, h_r


@dataclass(frozen=True)
class Nonlinearity:
    """F(d phi) = a (d_t phi)^2 + b |grad phi|^2 and h(phi) = lam*phi or lam*phi^2."""

    a: float = 0.0
    b: float = 0.0
    h_kind: str = "linear"
    lam: float = 0.0

    def __post_init__(self):
        if self.h_kind not in ("linear", "quadratic"):
            raise InvalidArgumentError(f"h_kind must be 'linear' or 'quadratic', got {self.h_kind!r}")

    @property
    def is_free(self) -> bool:
        """True when the equation reduces to the free wave."""
        return self.a == 0.0 and self.b == 0.0 and self.lam == 0.0

    def h(self, phi: np.ndarray) -> np.ndarray:
        if self.h_kind == "linear":
            return self.lam * phi
        return self.lam * phi**2

    def h_prime(self, phi: np.ndarray) -> np.ndarray:
        if self.h_kind == "linear":
            return np.full_like(phi, self.lam)
        return 2.0 * self.lam * phi

    def forcing(self, phi_t: np.ndarray, phi_r: np.ndarray) -> np.ndarray:
        return self.a * phi_t**2 + self.b * phi_r**2

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "h_kind": self.h_kind, "lam": self.lam}


@dataclass
class SolveOutcome:
    """Result of one solve; blow-up and CFL trouble are statuses, not errors."""

    status: SolveStatus
    final: FieldSnapshot
    steps: int
    # Time of the failed validity check for blowup / cfl_violation
    t_event: float | None = None
    criterion: str | None = None
    max_abs_h: float = 0.0
    # sup r^{1/2} <r>^{1/2} |dh| over the run
    max_weighted_dh: float = 0.0
    sinks: tuple = field(default_factory=tuple)
    segment: int | None = None

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    @property
    def t_star(self) -> float | None:
        return self.t_event if self.status == "blowup" else None

    @property
    def trace(self):
        """The first TraceRecorder among the sinks, if any."""
        from wave_solver.sinks import TraceRecorder

        return next((s for s in self.sinks if isinstance(s, TraceRecorder)), None)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "t_event": self.t_event,
            "criterion": self.criterion,
            "t_final": self.final.t,
            "steps": self.steps,
            "max_abs_h": self.max_abs_h,
            "max_weighted_dh": self.max_weighted_dh,
            "segment": self.segment,
        }
