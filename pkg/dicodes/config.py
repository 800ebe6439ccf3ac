import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Paths
RESULTS_PATH = os.getenv("RESULTS_PATH", "results")
LOGS_PATH = os.getenv("LOGS_PATH", "logs")

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_FILE_NAME = "dicodes.log"

# Channel validation tolerances
TOL_SYM = 1e-10
TOL_PD = 1e-12
TOL_RANK = 1e-10

# Experiment defaults
DEFAULT_SEED = int(os.getenv("DICODES_SEED", "20240601"))
DEFAULT_THREADS = int(os.getenv("DICODES_THREADS", "1"))
CI_LEVEL = 0.95
N_CAP_LOG2 = 20
MAX_CODEWORDS = 64
DEFAULT_TRIALS = 100000

# Codebook construction
BUDGET_FACTOR = 5000
GREEDY_BATCH = 1024
CONSTRUCT_RETRIES = 3
# truncated codes pack the ball of radius TRUNCATED_BALL_FACTOR * r
TRUNCATED_BALL_FACTOR = 2.0

# Monte Carlo
MC_CHUNK = 4096
PAIR_ALL_MAX = 256
NEAREST_K = 8

# Oracles
QUAD_BOX_SIGMAS = 12.0
QUAD_TOL = 1e-9
SERIES_TOL = 1e-10
SERIES_MAX_TERMS = 100000

# RNG stream ids (never shared between subsystems)
STREAM_CODEBOOK = 1
STREAM_LAMBDA1 = 2
STREAM_LAMBDA2 = 3
STREAM_VERIFY = 4
