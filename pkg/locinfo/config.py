"""
Configuration file for locinfo
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Project paths
PROJECT_ROOT = Path(__file__).parent.parent
OUTPUT_DIR = PROJECT_ROOT / "output"
LOG_DIR = PROJECT_ROOT / "logs"

# Logging settings
LOG_LEVEL = os.getenv("LOCINFO_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
# Per-module log files are opt-in: export LOCINFO_LOG_TO_FILE=true
LOG_TO_FILE = os.getenv("LOCINFO_LOG_TO_FILE", "false").lower() == "true"

# Seed for every randomised routine (random bases, D-banks, test states)
RANDOM_SEED = int(os.getenv("LOCINFO_SEED", "20060101"))

# Sweep parallelism (None = all available CPUs)
_threads = os.getenv("BOUNDS_THREADS", "").strip()
BOUNDS_THREADS = int(_threads) if _threads else None

# Numerical tolerances
HERMITIAN_TOL = 1e-12
EIG_CUTOFF = 1e-10  # eigenvalues in (-EIG_CUTOFF, 0) are treated as 0
TRACE_TOL = 1e-9
PROBABILITY_TOL = 1e-9
MARGINAL_TOL = 1e-9
TWIRL_INVARIANCE_TOL = 1e-10
DEFICIT_NOISE_TOL = 1e-9

# State file validation
STATE_FILE_HERMITIAN_TOL = 1e-9
STATE_FILE_PSD_TOL = 1e-9
STATE_FILE_TRACE_TOL = 1e-8

# B2 minimisation over the symmetric sigma-families
B2_GRID_STEP = 1e-3
B2_PARAM_TOL = 1e-9

# Lower convex hull of g(gamma) for isotropic E_F
HULL_GRID_POINTS = 2001

# Measure-and-send protocol: computational basis + this many Haar-random bases
R_PROTOCOL_RANDOM_BASES = 50

# Random Hermitian D-bank size for weak-duality checks
DUAL_BANK_SIZE = 100

# Projected-ascent SDP solver defaults
SDP_MAX_DIM = 16
SDP_STEP_SCALE = 0.5  # initial step = SDP_STEP_SCALE / ||rho||_op
SDP_STEP_GROWTH = 2.0
SDP_MAX_STEP_FACTOR = 16.0  # step never exceeds SDP_MAX_STEP_FACTOR * initial step
SDP_MAX_ITERATIONS = 200_000
SDP_FEASIBILITY_TOL = 1e-7
SDP_STALL_TOL = 1e-9
SDP_STALL_WINDOW = 50
SDP_FIXED_POINT_TOL = 1e-9  # ||P(Π + ηρ) - Π||_F at an optimum
SDP_DYKSTRA_TOL = 1e-11
SDP_DYKSTRA_MAX_CYCLES = 5000

# Sweep output
FLOAT_FORMAT = "%.12g"
SWEEP_COLUMNS = ["family", "d", "param", "I", "B1", "B2", "rP",
                 "deltaB", "deltaP", "ER", "EF"]
FIGURE_IDS = (1, 2, 3, 4, 7, 8)
FIGURE_GRID_STEP = 0.01
