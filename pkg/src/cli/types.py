"""Type definitions for the command-line front end."""

from dataclasses import asdict, dataclass, field

from common.config import (
    CFL_FACTOR,
    COEFF_BOUND,
    CONTINUITY_DIRECTIONS,
    GRID_POLICY_DR,
    LIFESPAN_EPS_LIST,
    LIFESPAN_T_BUDGET,
    MU_DEFAULT,
    OUTPUT_DIR,
    PICARD_K_MAX,
    PICARD_TOL,
)

COMMANDS: tuple[str, ...] = (
    "solve",
    "iterate",
    "verify-identity",
    "check-inequalities",
    "verify-estimate",
    "norms",
    "lifespan",
    "continuity",
    "continue",
)


@dataclass
class RunConfig:
    """Flat run configuration; every field has a default."""

    command: str = "solve"

    # Grid: explicit (r_max, nr) or the light-cone policy with target spacing dr
    r_max: float | None = None
    nr: int | None = None
    dr: float = GRID_POLICY_DR
    cfl: float = CFL_FACTOR
    h_bound: float = COEFF_BOUND

    # Data profile; eps rescales it (None keeps the profile as given)
    profile: str = "gaussian"
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0
    velocity_amplitude: float = 0.0
    eps: float | None = None

    # Nonlinearity
    a: float = 0.0
    b: float = 0.0
    h_kind: str = "linear"
    lam: float = 0.0

    # Static coefficient h = A exp(-r^2) of linear runs
    h_amplitude: float = 0.0

    T: float = 10.0
    mu: float = MU_DEFAULT

    # Multiplier lab
    variant: str = "kss"
    parameter: float = 0.5
    phi_expr: str = "exp(-t)*exp(-r**2)"
    hs_expr: str = "0"
    samples: int = 10000
    bands: int = 8

    # Picard
    k_max: int = PICARD_K_MAX
    tol: float = PICARD_TOL

    # Sweeps
    eps_list: list[float] = field(default_factory=lambda: list(LIFESPAN_EPS_LIST))
    T_budget: float = LIFESPAN_T_BUDGET
    # "plateau" runs the wide velocity Gaussian, "profile" the configured data profile
    lifespan_shape: str = "plateau"
    lifespan_size: str = "amplitude"
    estimate_eps_list: list[float] = field(default_factory=lambda: [0.01, 0.05, 0.1])
    T_list: list[float] = field(default_factory=lambda: [1.0, 10.0, 100.0])
    h_list: list[float] = field(default_factory=lambda: [0.0, 0.1])
    k_list: list[float] = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
    alpha_list: list[float] = field(default_factory=lambda: [0.5, 1.5, 2.5])
    delta_list: list[float] = field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3])
    directions: int = CONTINUITY_DIRECTIONS

    # Continuation
    segments: int = 2
    mollify_k: int | None = None

    # Outputs
    trace_stride: int | None = None
    out_dir: str = OUTPUT_DIR
    seed: int = 0
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)
