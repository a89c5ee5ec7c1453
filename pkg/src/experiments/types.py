"""Type definitions for the experiment drivers."""

from dataclasses import asdict, dataclass, field

import pandas as pd

from common.errors import InvalidArgumentError

LIFESPAN_COLUMNS: list[str] = ["epsilon", "t_star", "criterion", "h1_size"]
LIPSCHITZ_COLUMNS: list[str] = ["delta", "direction", "difference", "data_difference", "ratio", "flagged"]


@dataclass
class LifespanPoint:
    """Outcome of one lifespan run; exhausted points ran to the budget without blowing up."""

    epsilon: float
    t_star: float
    # Validity check that stopped the run, or "budget"
    criterion: str
    exhausted: bool
    # H^1 size of the data the run started from
    h1_size: float | None = None
    grid: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FitResult:
    """Least squares of log T_star against 1/eps over the blow-up points."""

    slope: float | None = None
    intercept: float | None = None
    r_squared: float | None = None
    points: int = 0
    # T_star nondecreasing as eps decreases over the whole sweep
    monotone: bool = True
    reason: str | None = None

    @property
    def defined(self) -> bool:
        return self.slope is not None

    def to_dict(self) -> dict:
        return {**asdict(self), "defined": self.defined}


def lifespan_frame(points: list[LifespanPoint]) -> pd.DataFrame:
    return pd.DataFrame([{k: p.to_dict()[k] for k in LIFESPAN_COLUMNS} for p in points], columns=LIFESPAN_COLUMNS)


@dataclass
class LedgerEntry:
    value: float | None
    experiment_id: str
    note: str = ""


@dataclass
class ConstantsLedger:
    """Empirical stand-ins for the existential constants, each tagged with its experiment."""

    entries: dict[str, LedgerEntry] = field(default_factory=dict)

    def record(self, name: str, value: float | None, experiment_id: str, note: str = "") -> None:
        if not experiment_id:
            raise InvalidArgumentError(f"Ledger entry '{name}' needs an experiment id")
        self.entries[name] = LedgerEntry(value=value, experiment_id=experiment_id, note=note)

    def value(self, name: str) -> float | None:
        entry = self.entries.get(name)
        return None if entry is None else entry.value

    def to_dict(self) -> dict:
        return {name: asdict(entry) for name, entry in self.entries.items()}


@dataclass
class LipschitzPoint:
    delta: float
    direction: int
    # E1 + Y1 norm of the solution difference
    difference: float
    # ||grad(f - f_delta)|| + ||g - g_delta||
    data_difference: float
    ratio: float | None
    # Perturbed run left the admissible ball or stopped early
    flagged: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class LipschitzReport:
    T: float
    nl: dict
    points: list[LipschitzPoint] = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        """Defined ratios of unflagged points."""
        return [p.ratio for p in self.points if p.ratio is not None and not p.flagged]

    @property
    def spread(self) -> float | None:
        """max / min of the defined ratios; None with fewer than two or a zero minimum."""
        ratios = self.ratios
        if len(ratios) < 2 or min(ratios) <= 0:
            return None
        return max(ratios) / min(ratios)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([p.to_dict() for p in self.points], columns=LIPSCHITZ_COLUMNS)

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "nl": self.nl,
            "spread": self.spread,
            "points": [p.to_dict() for p in self.points],
        }
