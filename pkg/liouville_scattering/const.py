DOMAIN = "liouville_scattering"

CONF_METRIC = "metric"
CONF_FAMILY = "family"
CONF_A = "A"
CONF_B = "B"
CONF_EPS0 = "eps0"
CONF_EPS1 = "eps1"
CONF_DELTA = "delta"
CONF_PARAMS = "params"
CONF_VALIDATE = "validate"

CONF_RUN = "run"
CONF_LAMBDA = "lambda"
CONF_CHANNELS = "n_channels"
CONF_C10 = "C10"
CONF_C11 = "C11"
CONF_THREADS = "threads"

CONF_TOLERANCES = "tolerances"
CONF_TOL_PICARD = "picard"
CONF_TOL_ODE = "ode"
CONF_TOL_MATCH = "match"
CONF_TOL_UNITARITY = "unitarity"
CONF_TOL_IDENTITY = "identity"
CONF_TOL_ANGULAR = "angular"

CONF_OUTPUT = "output"
CONF_DIRECTORY = "directory"

CONF_POLES = "poles"
CONF_POLE_COUNT = "count"
CONF_STRIP_HEIGHT = "strip_height"

CONF_SCATTER = "scatter"
CONF_MU_PATH = "mu_path"

ENV_THREADS = "LIOUVILLE_SCATTERING_THREADS"

FAMILY_HYPERBOLIC_BUMP = "hyperbolic_bump"
FAMILY_ONE_ENDED = "one_ended"
FAMILY_TABULATED = "tabulated"
FAMILIES = (FAMILY_HYPERBOLIC_BUMP, FAMILY_ONE_ENDED, FAMILY_TABULATED)

DEFAULT_LAMBDA = 1.0
DEFAULT_CHANNELS = 30
DEFAULT_PICARD_TOL = 1e-11
DEFAULT_ODE_TOL = 1e-11
DEFAULT_MATCH_TOL = 1e-7
DEFAULT_UNITARITY_TOL = 1e-6
DEFAULT_IDENTITY_TOL = 1e-8
DEFAULT_ANGULAR_TOL = 1e-9

# 512 angular x 1024 radial validation grid
DEFAULT_ANGULAR_POINTS = 512
DEFAULT_RADIAL_POINTS = 1024

CSV_FLOAT_FORMAT = ".17g"
