"""
Level sinks fed by the solvers.

A sink is any object with accept(snap). Solvers hand every time level to every
sink in time order, so a single pass computes norms, keeps decimated traces and
records the coefficient table of the next Picard stage.
"""

from pathlib import Path

import numpy as np
import pandas as pd

from common.config import H_ADMISSIBLE, PICARD_TABLE_STRIDE
from common.errors import InvalidArgumentError, SequencingError
from common.io import write_csv
from radial_grid.core import FieldSnapshot, RadialGrid
from spacetime_norms.core import accumulate_level, finalize
from spacetime_norms.types import NormAccumulator, NormReport
from wave_solver.types import Nonlinearity


class TraceRecorder:
    """Decimated solution trace with CSV export (columns t, r, phi, phi_t)."""

    def __init__(self, time_stride: int = 1, radius_stride: int = 1):
        if time_stride < 1 or radius_stride < 1:
            raise InvalidArgumentError("Trace strides must be >= 1")
        self.time_stride = time_stride
        self.radius_stride = radius_stride
        self._frames: list[pd.DataFrame] = []

    def accept(self, snap: FieldSnapshot) -> None:
        if snap.step % self.time_stride and not snap.is_final:
            return
        sel = slice(None, None, self.radius_stride)
        r = snap.grid.r[sel]
        self._frames.append(
            pd.DataFrame(
                {
                    "t": np.full(r.shape, snap.t),
                    "r": r,
                    "phi": snap.phi[sel],
                    "phi_t": snap.phi_t[sel],
                }
            )
        )

    def __len__(self) -> int:
        return len(self._frames)

    def to_frame(self) -> pd.DataFrame:
        if not self._frames:
            return pd.DataFrame(columns=["t", "r", "phi", "phi_t"])
        return pd.concat(self._frames, ignore_index=True)

    def write_csv(self, path: str | Path) -> Path:
        return write_csv(path, self.to_frame())


class LevelTable:
    """
    Time table of (u, u_t, u_tt) kept every `stride` steps plus the final level.

    Serves as the frozen coefficient of the next Picard stage (linear
    interpolation in t) and as the reference trace of difference norms.
    """

    def __init__(self, grid: RadialGrid, stride: int = PICARD_TABLE_STRIDE):
        if stride < 1:
            raise InvalidArgumentError("Table stride must be >= 1")
        self.grid = grid
        self.stride = stride
        self.steps: list[int] = []
        self.times: list[float] = []
        self._u: list[np.ndarray] = []
        self._u_t: list[np.ndarray] = []
        self._u_tt: list[np.ndarray | None] = []
        self._index: dict[int, int] = {}
        self._time_array: np.ndarray | None = None

    def accept(self, snap: FieldSnapshot) -> None:
        if snap.step % self.stride and not snap.is_final:
            return
        if snap.step in self._index:
            return
        if self.times and snap.t < self.times[-1]:
            raise SequencingError(f"Level at t={snap.t} arrived after t={self.times[-1]}")
        self._index[snap.step] = len(self.steps)
        self.steps.append(snap.step)
        self.times.append(snap.t)
        self._u.append(snap.u)
        self._u_t.append(snap.u_t)
        self._u_tt.append(snap.u_tt)
        self._time_array = None

    def __len__(self) -> int:
        return len(self.steps)

    def snapshot(self, index: int) -> FieldSnapshot:
        return FieldSnapshot(
            t=self.times[index],
            u=self._u[index],
            u_t=self._u_t[index],
            grid=self.grid,
            u_tt=self._u_tt[index],
            step=self.steps[index],
            is_final=index == len(self.steps) - 1,
        )

    def at_step(self, step: int) -> FieldSnapshot | None:
        index = self._index.get(step)
        return None if index is None else self.snapshot(index)

    @property
    def final(self) -> FieldSnapshot:
        if not self.steps:
            raise InvalidArgumentError("Level table is empty")
        return self.snapshot(len(self.steps) - 1)

    def interpolate(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """(u, u_t) at time t, linear in t between recorded levels, clamped at the ends."""
        if not self.steps:
            raise InvalidArgumentError("Level table is empty")
        if self._time_array is None:
            self._time_array = np.asarray(self.times)
        times = self._time_array
        if t <= times[0]:
            return self._u[0], self._u_t[0]
        if t >= times[-1]:
            return self._u[-1], self._u_t[-1]
        hi = int(np.searchsorted(times, t))
        lo = hi - 1
        w = (t - times[lo]) / (times[hi] - times[lo])
        u = (1.0 - w) * self._u[lo] + w * self._u[hi]
        u_t = (1.0 - w) * self._u_t[lo] + w * self._u_t[hi]
        return u, u_t

    def fields_at(self, t: float) -> FieldSnapshot:
        u, u_t = self.interpolate(t)
        return FieldSnapshot(t=t, u=u, u_t=u_t, grid=self.grid)


class DifferenceSink:
    """
    E1 / Y1 norms of phi - phi_ref, where phi_ref is a recorded LevelTable.

    Only levels the reference recorded are compared, so the difference carries no
    interpolation error. With reference=None the norms of phi itself are taken.
    """

    def __init__(self, reference: LevelTable | None):
        self.reference = reference
        self.accumulator = NormAccumulator(order=1)
        self.max_abs_diff = 0.0

    def accept(self, snap: FieldSnapshot) -> None:
        if self.reference is None:
            diff = FieldSnapshot(t=snap.t, u=snap.u, u_t=snap.u_t, grid=snap.grid, step=snap.step)
        else:
            ref = self.reference.at_step(snap.step)
            if ref is None:
                return
            if abs(ref.t - snap.t) > 1e-9 * max(1.0, abs(snap.t)):
                raise SequencingError(f"Reference level {snap.step} is at t={ref.t}, run is at t={snap.t}")
            diff = FieldSnapshot(
                t=snap.t,
                u=snap.u - ref.u,
                u_t=snap.u_t - ref.u_t,
                grid=snap.grid,
                step=snap.step,
            )
        self.max_abs_diff = max(self.max_abs_diff, float(np.max(np.abs(diff.phi))))
        accumulate_level(self.accumulator, diff, snap.grid)

    def report(self) -> NormReport:
        return finalize(self.accumulator)

    def e1_plus_y1(self) -> float:
        report = self.report()
        return report.E1 + report.Y1


class AdmissibilityMonitor:
    """Running sup |h(phi)| of a run."""

    def __init__(self, nl: Nonlinearity, bound: float = H_ADMISSIBLE):
        self.nl = nl
        self.bound = bound
        self.sup_h = 0.0

    def accept(self, snap: FieldSnapshot) -> None:
        self.sup_h = max(self.sup_h, float(np.max(np.abs(self.nl.h(snap.phi)))))

    @property
    def admissible(self) -> bool:
        return self.sup_h <= self.bound
