"""
Configuration module for the IFS engine.

This module loads environment variables and provides configuration
settings for parallelism, logging, artifact locations and numeric defaults.

Environment variables may be defined in a .env file (see .env.example).
Scene files carry per-run budgets; the values here are process-wide.
"""

import os
import warnings
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        warnings.warn(f"Ignoring non-integer {name}={raw!r}; using {default}")
        return default


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        warnings.warn(f"Ignoring non-numeric {name}={raw!r}; using {default}")
        return default


# Parallelism Configuration
IFS_THREADS = max(1, _int_env("IFS_THREADS", 1))

# Logging Configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", "")

# Artifact Configuration
IFS_OUT_DIR = os.getenv("IFS_OUT_DIR", "out")

# Algorithm Defaults
IFS_WINDOW = max(1, _int_env("IFS_WINDOW", 5))
IFS_INNER_CAP = max(1, _int_env("IFS_INNER_CAP", 4096))
IFS_ORACLE_CHUNK = max(1024, _int_env("IFS_ORACLE_CHUNK", 4_000_000))
IFS_PASS_THRESHOLD = _float_env("IFS_PASS_THRESHOLD", 0.95)

# Numeric tolerances shared by every module
CIRCLE_TOL = 1e-12
NONZERO_TOL = 1e-12
DET_TOL = 1e-12
ROW_SUM_TOL = 1e-12

# Scene format versions this build understands
SCENE_VERSIONS = (1,)
REPORT_FORMAT_VERSION = 1

if not 0.0 < IFS_PASS_THRESHOLD <= 1.0:
    warnings.warn(f"IFS_PASS_THRESHOLD={IFS_PASS_THRESHOLD} outside (0, 1]; using 0.95")
    IFS_PASS_THRESHOLD = 0.95
