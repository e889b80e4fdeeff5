from dotenv import load_dotenv
import logging
import os

# Load environment variables (logging settings only, solver numerics come from CLI flags)
load_dotenv()

# Solver defaults
DEFAULT_EPSILON = 0.01
DEFAULT_OMEGA = 1.0
CERTIFICATE_TOL = 1e-9
INVARIANT_TOL = 1e-9  # relative, used by the under-allocation instrumentation
SLOPE_FLOOR = 1e-12
ITERATION_SAFETY_FACTOR = 4
GUESS_CAP = 10.0

# Curvature search
CURVATURE_GRID = 512
ORACLE_GRID = 2048
SUPREMUM_NUDGE = 1e-9
REFINE_XATOL = 1e-12

# Instance generation / oracle
MAX_DENOMINATOR = 64
BRUTE_FORCE_LIMIT = 10**7
BENCH_ORACLE_LIMIT = 10**6
ENUMERATION_CHUNK = 1 << 16

# Families understood by gen_random and the bench harness
family_list = ['linear', 'budget', 'piecewise', 'power', 'smooth_log']

log_settings = {
    "level": os.getenv(key="LOG_LEVEL", default="WARNING"),
    "format": os.getenv(key="LOG_FORMAT", default="%(asctime)s - %(levelname)s - %(message)s"),
}


def configure_logging(level: str = None) -> None:
    """Configure the root logger once; diagnostics go to stderr."""
    logging.basicConfig(
        level=(level or log_settings["level"]).upper(),
        format=log_settings["format"],
    )
