"""Type definitions for the estimate harness."""

from dataclasses import asdict, dataclass, field

# Interaction terms of the space-time estimate, in order
INTERACTION_TERMS: tuple[str, ...] = (
    "dphi_F",
    "phi_F_weighted",
    "dh_dphi2",
    "dh_phi_dphi_weighted",
    "h_dphi2_weighted",
    "h_phi_dphi_weighted",
)

SWEEP_COLUMNS: list[str] = [
    "instance_id",
    "mu",
    "T",
    "eps",
    "h_amplitude",
    "lhs_y",
    "lhs_z",
    "rhs_data",
    "rhs_interaction",
    "ratio",
]


@dataclass
class EstimateReport:
    """Both sides of the weighted space-time estimate for one solved instance."""

    mu: float
    T: float
    # (1+T)^{-2mu} (||r^{-3/2+mu} phi||^2 + ||r^{-1/2+mu} d phi||^2)
    lhs_y: float
    # (log(2+T))^{-1} times the same with <r>^{-mu}
    lhs_z: float
    # ||grad f||^2 + ||g||^2
    rhs_data: float
    rhs_interaction: float
    terms: dict[str, float] = field(default_factory=dict)
    # Raw space-time integrals before the T prefactors
    raw: dict[str, float] = field(default_factory=dict)

    @property
    def ratio(self) -> float | None:
        """(lhs_y + lhs_z) / (rhs_data + rhs_interaction); None when the rhs vanishes."""
        rhs = self.rhs_data + self.rhs_interaction
        return (self.lhs_y + self.lhs_z) / rhs if rhs > 0 else None

    def to_dict(self) -> dict:
        return {**asdict(self), "ratio": self.ratio}


@dataclass
class EnergyInequalityRecord:
    lhs: float
    initial: float
    forcing: float
    coefficient: float

    @property
    def rhs(self) -> float:
        return self.initial + self.forcing + self.coefficient

    @property
    def implied_C(self) -> float | None:
        return self.lhs / self.rhs if self.rhs > 0 else None

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs_parts": {"initial": self.initial, "forcing": self.forcing, "coefficient": self.coefficient},
            "implied_C": self.implied_C,
        }


@dataclass
class SobolevRecord:
    """Empirical constants of the radial Sobolev-type inequalities (max over snapshots)."""

    # sup r^{1/2} |phi| / ||grad phi||
    radial_ratio: float | None = None
    # sup |phi| / E2-proxy
    sup_ratio: float | None = None
    # sup r^{1/2} <r>^{1/2} |d phi| / E2-proxy
    decay_ratio: float | None = None
    # ||phi / r|| / ||grad phi||, at most 2
    hardy_ratio: float | None = None
    snapshots: int = 0
    skipped: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ConvolutionReport:
    # {k, alpha, sup_ratio, location, far_field_ratio}
    kernel: list[dict] = field(default_factory=list)
    # {gamma, sup_ratio, samples}
    line: list[dict] = field(default_factory=list)

    def sup_constant(self, alpha: float) -> float:
        return max(e["sup_ratio"] for e in self.kernel if e["alpha"] == alpha)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EstimateInstance:
    """One point of an estimate sweep."""

    instance_id: str
    eps: float
    T: float
    mu: float
    # Amplitude of the static coefficient h = A exp(-r^2); 0 for the free wave
    h_amplitude: float = 0.0
    kind: str = "gaussian"
    width: float = 1.0
    dr: float = 0.05
