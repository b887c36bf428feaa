"""
Orchestration Configuration
----------------------------
Centralized settings for the Prefect verification flow and its tasks.
Keeps retry counts, timeouts, worker counts and tags
out of flow/task logic for easy tuning.
"""

import os

# ---------------------------------------------------------------------------
# Retry & timeout defaults (seconds)
# ---------------------------------------------------------------------------
# Checks are deterministic given their seed: a retry would only repeat the failure
CHECK_TASK_RETRIES = 0
CHECK_TASK_TIMEOUT = 600

# Sampler chi-square runs 10^5 draws per sampler and instance
SAMPLER_TASK_TIMEOUT = 1200

SUMMARY_TASK_TIMEOUT = 30

# Whole verification flow
VERIFY_FLOW_TIMEOUT = 3600

# ---------------------------------------------------------------------------
# Concurrency
# ---------------------------------------------------------------------------
VERIFY_MAX_WORKERS = int(os.getenv("GHYPE_VERIFY_WORKERS", "4"))

# ---------------------------------------------------------------------------
# Tags (for Prefect UI filtering)
# ---------------------------------------------------------------------------
TAGS_VERIFY = ["verification"]
TAGS_VERIFY_EXACT = ["verification", "exact"]
TAGS_VERIFY_STATISTICAL = ["verification", "statistical"]
