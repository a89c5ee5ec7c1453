"""Type definitions for streamed norm accumulation."""

from dataclasses import dataclass, field

import numpy as np

# Order of the running space-time integrals
#   I1 = int int r^{-5/2} phi^2,          I2 = int int r^{-1/2} |d phi|^2
#   J1, J2 = the same with an extra <r>^{-1/2}
#   I1d, I2d, J1d, J2d = the same with d phi in place of phi
DENSITY_KEYS: tuple[str, ...] = ("I1", "I2", "J1", "J2", "I1d", "I2d", "J1d", "J2d")

# Running sups of L^2 norms entering E1 / E2
SUP_KEYS: tuple[str, ...] = ("grad", "dt", "hess", "grad_t", "tt")


def _zero_integrals() -> np.ndarray:
    return np.zeros(len(DENSITY_KEYS))


def _zero_sups() -> dict[str, float]:
    return dict.fromkeys(SUP_KEYS, 0.0)


@dataclass
class NormAccumulator:
    """
    Streaming accumulator for the E/Y/Z norms of one trace.

    Acts as a solver sink: accept(snap) adds one time level. Time integrals use
    the trapezoid rule across consecutive levels, so two accumulators over
    abutting slabs merge exactly.
    """

    # 1: E1/Y1/Z1 only; 2: also the second-order copies for E2/Y2/Z2
    order: int = 2
    levels: int = 0
    t_first: float | None = None
    t_last: float | None = None
    integrals: np.ndarray = field(default_factory=_zero_integrals)
    sups: dict[str, float] = field(default_factory=_zero_sups)
    # Spatial densities of the most recent level, for the next trapezoid panel
    last_densities: np.ndarray | None = field(default=None, repr=False)

    def integral(self, key: str) -> float:
        return float(self.integrals[DENSITY_KEYS.index(key)])

    def accept(self, snap) -> None:
        from spacetime_norms.core import accumulate_level

        accumulate_level(self, snap, snap.grid)


@dataclass
class NormReport:
    """Finalized norms with their T-dependent prefactors applied."""

    E1: float
    Y1: float
    Z1: float
    I1: float
    I2: float
    J1: float
    J2: float
    T: float
    # Second-order norms; None when the trace carried no second derivatives
    E2: float | None = None
    Y2: float | None = None
    Z2: float | None = None

    def to_dict(self) -> dict:
        return {
            "E1": self.E1,
            "E2": self.E2,
            "Y1": self.Y1,
            "Y2": self.Y2,
            "Z1": self.Z1,
            "Z2": self.Z2,
            "I1": self.I1,
            "I2": self.I2,
            "J1": self.J1,
            "J2": self.J2,
            "T": self.T,
        }
