"""Type definitions for the Picard iteration."""

from dataclasses import asdict, dataclass, field


@dataclass
class IterationRecord:
    """One stage phi_k of the iteration."""

    k: int
    # ||phi_k - phi_{k-1}||_{E1(T)} and ||.||_{Y1(T)}, phi_{-1} = 0
    e1_diff: float
    y1_diff: float
    e2_k: float
    y2_k: float
    z2_k: float
    sup_h: float
    admissible: bool
    # ||grad(f_k - f_{k-1})|| + ||g_k - g_{k-1}|| of the mollified data
    data_increment: float

    @property
    def diff(self) -> float:
        return self.e1_diff + self.y1_diff

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class IterationReport:
    """Per-stage records of one Picard run, indexed contiguously from k = 0."""

    epsilon: float
    T: float
    nl: dict
    records: list[IterationRecord] = field(default_factory=list)
    converged: bool = False
    stop_reason: str = "k_max"
    # LevelTable of the last iterate; not serialized
    final_table: object | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "T": self.T,
            "nl": self.nl,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "records": [r.to_dict() for r in self.records],
        }
