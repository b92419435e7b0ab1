import os
from dotenv import load_dotenv

load_dotenv()

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Report versions
ARTIFACT_VERSION = "1.0.0"
SCHEMA_VERSION = "1"

# Sampling defaults (the seed fully determines every randomized check)
DEFAULT_SEED = 7
DEFAULT_MAX_N = 6
DEFAULT_RANDOM_SAMPLES = 20
DEFAULT_MEMBERSHIP_SAMPLES = 200
DEFAULT_BRACKET_SAMPLES = 100
DEFAULT_FLOW_PAIRS = 5
DEFAULT_NULL_RAYS = 10

RANDOM_NUMERATOR_BOUND = 5
RANDOM_DENOMINATOR_BOUND = 4

# Exact parameter grids, as "p/q" strings
FLOW_GRID = ("2", "1", "1/2", "1/3", "-1/3", "-1/2", "-1", "-2")
CLASSIFY_PARAMETERS = ("1", "-1", "1/2", "-1/2", "2", "-2")
TRAJECTORY_SAMPLES = ("0", "1", "2", "3", "4")

# Largest module dimension whose product eigenvectors are all checked against
# the module action; bigger modules check one vector per eigenvalue.
VERIFY_MODULE_ACTION_LIMIT = 256

# Jacobi sweep over graded basis triples; larger algebras check an evenly
# strided subset of this size.
JACOBI_TRIPLE_LIMIT = 2000

# Output paths
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
REPORTS_DIR = os.getenv("REPORTS_DIR", os.path.join(BASE_DIR, "reports"))
