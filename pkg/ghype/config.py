"""
GHypE Configuration
-------------------
Central configuration for the ensemble library and its command-line frontend.
Loads settings from environment variables (.env file).
"""

import os
from dotenv import load_dotenv

# Load .env file from project root
load_dotenv()

# --- Logging ---
LOG_LEVEL = os.getenv("GHYPE_LOG_LEVEL", "INFO")

# --- Oracle ---
MAX_SUPPORT = int(os.getenv("GHYPE_MAX_SUPPORT", "1000000"))

# --- Numerics ---
QUAD_REL_TOL = float(os.getenv("GHYPE_QUAD_REL_TOL", "1e-10"))
QUAD_MAX_SUBDIVISIONS = int(os.getenv("GHYPE_QUAD_MAX_SUBDIVISIONS", "2048"))
MEAN_REL_TOL = float(os.getenv("GHYPE_MEAN_REL_TOL", "1e-9"))

# Binomials up to this n are computed from exact integers
EXACT_BINOMIAL_MAX_N = 60

# --- Sampling ---
DEFAULT_SEED = int(os.getenv("GHYPE_DEFAULT_SEED", "12345"))

# --- Verification suite ---
VERIFY_MAX_N = int(os.getenv("GHYPE_VERIFY_MAX_N", "3"))
VERIFY_MAX_M = int(os.getenv("GHYPE_VERIFY_MAX_M", "5"))
VERIFY_INSTANCES = int(os.getenv("GHYPE_VERIFY_INSTANCES", "50"))
VERIFY_TRIALS = int(os.getenv("GHYPE_VERIFY_TRIALS", "100000"))
VERIFY_SIGNIFICANCE = float(os.getenv("GHYPE_VERIFY_SIGNIFICANCE", "0.001"))
VERIFY_MAX_SUPPORT = 500
