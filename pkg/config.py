"""
Configuration file for the Bergman projection norm workbench
Defines run defaults, exit codes, method tags and numerical tolerances
"""

# Run defaults (overridable from the command line)
DEFAULTS = {
    "seed": 42,
    "samples": 10**6,
    "chunks": 64,
    "grid_points": 25,
    "format": "json",
    "workers": 1,
    "log_level": "WARNING",
}

# Environment variable overriding the default seed
SEED_ENV_VAR = "BERGMAN_NORM_SEED"

# Process exit codes
EXIT_CODES = {
    "OK": 0,
    "INVALID_INPUT": 2,
    "NUMERICAL_FAILURE": 3,
    "VERIFICATION_FAILURE": 4,
}

# Method tags carried by every numeric result
METHODS = {
    "MC": "mc",
    "MC_REDUCED": "mc-reduced",
    "MC_STRATIFIED": "mc-stratified",
    "RADIAL": "radial-quadrature",
    "CLOSED": "closed-form",
}

# Verification suites and what they cover
SUITES = {
    "identities": "Moebius identities, Jacobians, kernel and invariant gradients",
    "jct": "J_{c,t}: series, closed form, Monte Carlo and boundary value",
    "moments": "sphere and ball moments against Monte Carlo",
    "fzeta": "F_zeta upper bound, dual representation, boundary limit",
    "extremal": "extremal symbols g_k and the limit of G_k",
    "phi": "boundary integral Phi(zeta) = 0",
    "ell": "endpoint identities and bound chain of ell(t)",
}

OUTPUT_FORMATS = ("json", "csv", "table")
COMMANDS = ("constant", "verify", "scan", "appendix", "ell")

# Ball geometry
ZERO_BASE_RADIUS = 1e-14       # below this |a| the automorphism is -Id
BOUNDARY_GUARD = 1e-9          # |a| <= 1 - BOUNDARY_GUARD
SPHERE_TOLERANCE = 1e-12

# Sampling and integration
MIN_SAMPLES = 1000
STRATIFY_SHELLS = 16
SHELL_MARGIN = 6               # halvings below an interior pole distance
STRATIFY_ABOVE_RADIUS = 0.9
EXPONENT_GUARD = 0.5
RADIUS_FLOOR = 1e-15           # smallest 1 - r^2 produced by the v_alpha sampler

# Special functions
HYP_SERIES_CUTOFF = 0.5
HYP_AGREEMENT = 1e-10
HYP_SERIES_MAX_TERMS = 5000
AGM_MAX_ITERATIONS = 64
AGM_TOLERANCE = 9e-16          # |a - b| <= 4 ulp relative ends the AGM
ELL_SERIES_AGREEMENT = 1e-8

# Verification gates
SIGMA_GATE = 3.0
ROUNDING_GAP = 1e-12           # relative gaps below this count as exact agreement
LIMIT_SIGMA_GATE = 5.0
CONJECTURE_SIGMA_GATE = 2.0    # ell(pi/2) against the grid maximum
LIMIT_RELATIVE_GAP = 0.05
GRADIENT_FD_FLOOR = 1e-3
EXTREMAL_K_GRID = (1, 2, 5, 10, 50, 200)
EXTREMAL_LIMIT_K = 1000
SURROGATE_RADIUS = 0.99
SERIES_CLOSED_AGREEMENT = 1e-8
BOUNDARY_CONSISTENCY = 1e-10
IDENTITY_RESIDUAL = 1e-10
JACOBIAN_RELATIVE = 1e-4

# Appendix stationarity analysis
STATIONARITY_STEPS = (0.02, 0.04, 0.08)
SLOPE_TOLERANCE = 1e-3
H_GRID_POINTS = 20
H_GRID_MAX_RADIUS = 3.0
H_AGREEMENT = 1e-9
