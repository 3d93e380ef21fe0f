import os

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# --- Directories ---
RESULTS_DIR = os.getenv("DISTWIT_RESULTS_DIR", os.path.join(PROJECT_ROOT, "results"))
LEDGER_DIR = os.path.join(PROJECT_ROOT, "run_ledger")

# --- Run Ledger Paths ---
LEDGER_DB_PATH = os.getenv("DISTWIT_LEDGER", os.path.join(LEDGER_DIR, "runs.db"))
LEDGER_MD_PATH = os.path.join(LEDGER_DIR, "runs_log.md")

# --- Output file names (fixed inside the output directory) ---
COMPLEX_FILE = "complex.jsonl"
WEIGHTS_FILE = "weights.json"
REPORT_FILE = "report.json"
NET_FILE = "net.json"

# --- Logging ---
LOG_LEVEL = os.getenv("DISTWIT_LOG", "INFO").upper()

# --- Distance matrix ingestion ---
ASYMMETRY_TOL = 1e-9        # relative to the largest entry
TRIANGLE_SAMPLE_COUNT = 20000
TRIANGLE_TOL = 1e-9
STRICT_EXHAUSTIVE_MAX_N = 500
BINARY_MAGIC = b"DWIT"

# --- Simplex geometry tolerances ---
DEGENERACY_TOL = 1e-12      # |det Gram| < tol * (Delta^2)^k  =>  volume 0
EMBEDDING_TOL = 1e-8        # negative Gram curvature allowed, relative to Delta^2

# --- Practical parameter defaults ---
DEFAULT_ALPHA0 = 0.45
DEFAULT_DELTA0_RATIO = 0.1  # delta0 = ratio * alpha0
DEFAULT_ETA_STAR = 0.01
THEORETICAL_NEIGHBOR_BASE = 66
MAX_NEIGHBOR_CAP = 100_000  # saturation for 66^m
CANDIDATE_DIAMETER_FACTOR = 16.0
WEIGHT_STEP_FACTOR = 1e-12  # strict exclusion step, relative to the cap


def default_gamma0(m: int) -> float:
    return 0.1 / (m + 1)


def default_practical_cap(m: int) -> int:
    return 2 * (m + 2) ** 2


# --- Oracle settings ---
ORACLE_MAX_POINTS = 64
ORACLE_MAX_DIM = 3
ORACLE_TIE_TOL = 1e-9       # relative to diameter^2
ORACLE_BOX_FACTOR = 1e3     # search box half-width, relative to the diameter
ORACLE_BOUNDEDNESS_DIRECTIONS = 256

# --- Concurrency ---
DEFAULT_THREADS = int(os.getenv("DISTWIT_THREADS", "1"))
WITNESS_BLOCK_SIZE = 2048
