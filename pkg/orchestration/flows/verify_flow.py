"""
Verification Flow
-----------------
Prefect flow that runs the oracle verification suite:
  1. Checks     (parallel: one task per check, independent instances)
  2. Summary    (PASS/FAIL table, duration, overall status)

Concurrency: checks share no state, so they run in parallel via
ThreadPoolTaskRunner. A failing or crashing check is recorded as FAIL and
never blocks the others.

Usage:
    python -m orchestration.flows.verify_flow
    python -m ghype verify
"""

import time

from prefect import flow
from prefect.logging import get_run_logger
from prefect.task_runners import ThreadPoolTaskRunner

from ghype.config import (
    DEFAULT_SEED,
    VERIFY_INSTANCES,
    VERIFY_MAX_M,
    VERIFY_MAX_N,
    VERIFY_SIGNIFICANCE,
    VERIFY_TRIALS,
)
from orchestration.config import VERIFY_FLOW_TIMEOUT, VERIFY_MAX_WORKERS
from orchestration.tasks.verify_tasks import (
    constant_omega_task,
    equivalence_task,
    expected_degrees_task,
    fit_round_trip_task,
    log_verification_summary,
    marginal_task,
    normalization_task,
    sampler_task,
)


@flow(
    name="ghype-verify",
    task_runner=ThreadPoolTaskRunner(max_workers=VERIFY_MAX_WORKERS),
    timeout_seconds=VERIFY_FLOW_TIMEOUT,
    log_prints=True,
)
def verify_flow(
    max_n: int = VERIFY_MAX_N,
    max_m: int = VERIFY_MAX_M,
    seed: int = DEFAULT_SEED,
    instances: int = VERIFY_INSTANCES,
    trials: int = VERIFY_TRIALS,
    significance: float = VERIFY_SIGNIFICANCE,
) -> dict:
    """Run every check concurrently and return {"passed", "results", "elapsed_seconds"}."""
    logger = get_run_logger()
    start_time = time.time()

    logger.info("=" * 60)
    logger.info(f"STARTING VERIFICATION — n<={max_n}, m<={max_m}, seed={seed}")
    logger.info("=" * 60)

    futures = {
        "normalization": normalization_task.submit(instances, max_n, max_m, seed),
        "constant_omega_reduction": constant_omega_task.submit(instances, max_n, max_m, seed),
        "directed_undirected_equivalence": equivalence_task.submit(max_n, max_m, seed),
        "expected_degrees": expected_degrees_task.submit(instances, max_n, max_m, seed),
        "fit_round_trip": fit_round_trip_task.submit(max_n, seed),
        "marginal_consistency": marginal_task.submit(instances, max_n, max_m, seed),
        "sampler_chi_square": sampler_task.submit(trials, seed, significance),
    }

    results = []
    for name, future in futures.items():
        try:
            results.append(future.result())
        except Exception as e:
            logger.error(f"Check {name} crashed: {e}")
            results.append({"name": name, "passed": False, "detail": f"task failed: {e}"})

    return log_verification_summary(results, start_time)


if __name__ == "__main__":
    verify_flow()
