"""
Configuration and settings for the fiberlab spin-boson laboratory
"""
from pathlib import Path
from typing import List, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

# Base directories (created by the harness when it writes, not on import)
BASE_DIR = Path(__file__).parent.parent
DATA_DIR = BASE_DIR / "data"
RESULTS_DIR = DATA_DIR / "results"
LOGS_DIR = DATA_DIR / "logs"

# Tolerances
HERMITIAN_RTOL = 1e-13       # entrywise, relative to the largest entry
HYPOTHESIS_RTOL = 1e-12      # per-mode reality checks (Hyp 2, phase function)
DEGENERACY_RTOL = 1e-9       # |l_i - l_j| <= tol * (1 + |l_i|)
DECOMPOSITION_ATOL = 1e-12   # off-block entries after parity conjugation
BLOCK_MATCH_ATOL = 1e-13     # blocks versus directly built fibers
EIGEN_TOL = 1e-10            # residual ||Hv - lv|| <= tol * (1 + |l|)
CG_RTOL = 1e-10              # shifted conjugate gradient
LEAKAGE_TOL = 1e-10          # cross-block weight of the full ground state
STRICT_GAP_FACTOR = 10.0     # strict ordering asserted above this many solver tolerances
STRICT_GAP_MIN_MASS = 0.5
STRICT_GAP_MIN_ETA = 0.1
WINDOW_TOL = 1e-8            # excited-state window (E, E + m_ess]
HVZ_TOL = 1e-10
MOMENT_PLATEAU_RTOL = 1e-3
PULLTHROUGH_NOISE_FLOOR = 1e-9  # residuals below this count as converged along a cutoff schedule

# Capacities
MAX_BASIS_DIMENSION = 250_000
DENSE_DIMENSION_LIMIT = 2500
SHIFT_INVERT_DIMENSION_LIMIT = 20_000

# Lanczos
LANCZOS_KRYLOV_DIM = 80
LANCZOS_BUDGET_FACTOR = 50   # restart cycles allowed per requested eigenpair
DEFAULT_SEED = 1234

# CG
CG_MAX_ITERATIONS = 5000

# Output formatting
CSV_FLOAT_FORMAT = "%.16e"   # 17 significant digits
CSV_HEADER_PREFIX = "# fiberlab results; columns: "
RESULT_COLUMNS: List[str] = [
    "grid_index",
    "coordinates",
    "eta",
    "coupling_scale",
    "n_max",
    "E_full",
    "E_minus",
    "E_plus",
    "gap",
    "degeneracy",
    "excited_flag",
    "offblock_norm",
    "leakage",
    "pullthrough_residual",
    "status",
    "reason_codes",
]
FIGURE_COLUMNS: List[str] = ["eta", "E_minus", "E_plus", "threshold"]

# Logging settings
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVEL = "INFO"

# Checks the harness knows how to run
KNOWN_CHECKS = ["decompose", "ground", "excited", "hvz", "pullthrough", "convergence"]
SWEEP_AXES = ["eta", "coupling_scale", "n_max"]  # plus alpha.<i>


class RuntimeSettings(BaseSettings):
    """Environment-driven runtime settings (FIBERLAB_WORKERS, ...)"""

    model_config = SettingsConfigDict(
        env_prefix="FIBERLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    workers: Optional[int] = None
    log_level: str = LOG_LEVEL
    log_json: Optional[Path] = None


def get_runtime_settings() -> RuntimeSettings:
    """Read runtime settings from the environment (and .env if present)"""
    return RuntimeSettings()
