"""
Centralized configuration for the radial wave laboratory.
All tunable constants and numerical defaults are defined here.
"""

# Grid / time stepping
# Fraction of the CFL limit used for dt
CFL_FACTOR: float = 0.9

# Default bound on |h| used to size dt (admissible runs stay below it)
COEFF_BOUND: float = 1 / 6

# Hard bound sum |h^{ab}| <= 1/2; beyond it the equation leaves the admissible class
COEFF_BOUND_MAX: float = 0.5

# Smallest mesh accepted by build_grid
MIN_NODES: int = 16

# Quasilinear runs
# Admissibility of an iterate: sup |h(phi)| <= 1/6
H_ADMISSIBLE: float = 1 / 6

# Blow-up criterion: sup |h(phi)| above this value
H_BLOWUP: float = 0.5

# Blow-up criterion: energy grows by this factor over its initial value
ENERGY_GROWTH_CAP: float = 1.0e3

# Weighted norms
# Default weight exponent for the space-time estimate (0 < mu < 1/2)
MU_DEFAULT: float = 0.25

# Relative tolerance when comparing level times (sequencing checks, slab merges)
TIME_TOLERANCE: float = 1.0e-12

# Mollifiers
# Gauss-Legendre nodes per half-interval of the shell convolution
SHELL_QUADRATURE_NODES: int = 48

# Tabulation points for the cumulative kernel moment on [0, 1]
KERNEL_TABLE_POINTS: int = 2049

# Picard iteration
PICARD_K_MAX: int = 12
PICARD_TOL: float = 1.0e-8

# Finest mollifier scale tabulated by the norms report
TELESCOPING_K_MAX: int = 8

# Time stride of the coefficient table kept between stages (<= 4)
PICARD_TABLE_STRIDE: int = 2

# Multiplier lab
# Origin collar excluded from divergence residuals, in units of dr
RESIDUAL_COLLAR_CELLS: int = 4

# Relative slack for equality cases of the pointwise inequalities
INEQUALITY_RTOL: float = 1.0e-12

# Spatial dimension of the multiplier identities
SPACE_DIMENSION: int = 3

# Free-wave oracle
# Gauss-Legendre nodes for the velocity integral of the d'Alembert formula
DALEMBERT_NODES: int = 128

# Experiments
LIFESPAN_T_BUDGET: float = 200.0
LIFESPAN_EPS_LIST: tuple[float, ...] = (0.4, 0.3, 0.2, 0.15, 0.1)
# Width of the default lifespan velocity plateau; eps is its peak value
LIFESPAN_PROFILE_WIDTH: float = 16.0
# "amplitude": eps scales a unit-peak shape; "h1": eps is the H^1 size of the data
LIFESPAN_SIZE_MODES: tuple[str, ...] = ("amplitude", "h1")

# Grid policy: extra radius beyond support + light cone, and target spacing
GRID_POLICY_MARGIN: float = 4.0
GRID_POLICY_DR: float = 0.05

# Radius beyond which profile data are treated as zero (support estimate)
PROFILE_SUPPORT_RADIUS: float = 6.0

# Number of randomized perturbation directions in continuity sweeps
CONTINUITY_DIRECTIONS: int = 10

# Output
# 17 significant digits round-trip every double
CSV_FLOAT_FORMAT: str = "%.17g"
OUTPUT_DIR: str = "out"
