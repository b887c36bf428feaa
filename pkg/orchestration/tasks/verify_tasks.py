"""
Verification Tasks
------------------
@task-decorated wrappers around the checks in ghype.verification.
Each check is isolated as its own Prefect task so that one failure never
hides the others; tasks take only scalar parameters and rebuild their random
instances from the seed.

- Exact checks (enumeration, rational arithmetic): deterministic → no retries
- Statistical checks (sampler chi-square): pinned seed → no retries, longer timeout
"""

import time
from dataclasses import asdict

from prefect import task
from prefect.logging import get_run_logger

from ghype.verification import (
    check_constant_omega_reduction,
    check_directed_undirected_equivalence,
    check_expected_degrees,
    check_fit_round_trip,
    check_marginal_consistency,
    check_normalization,
    check_sampler_chi_square,
    random_instances,
)
from orchestration.config import (
    CHECK_TASK_RETRIES,
    CHECK_TASK_TIMEOUT,
    SAMPLER_TASK_TIMEOUT,
    SUMMARY_TASK_TIMEOUT,
    TAGS_VERIFY,
    TAGS_VERIFY_EXACT,
    TAGS_VERIFY_STATISTICAL,
)


@task(
    name="check-normalization",
    retries=CHECK_TASK_RETRIES,
    timeout_seconds=CHECK_TASK_TIMEOUT,
    tags=TAGS_VERIFY_EXACT,
)
def normalization_task(count: int, max_n: int, max_m: int, seed: int) -> dict:
    """PMFs of both ensembles sum to 1 over the enumerated support."""
    return asdict(check_normalization(random_instances(count, max_n, max_m, seed)))


@task(
    name="check-constant-omega-reduction",
    retries=CHECK_TASK_RETRIES,
    timeout_seconds=CHECK_TASK_TIMEOUT,
    tags=TAGS_VERIFY_EXACT,
)
def constant_omega_task(count: int, max_n: int, max_m: int, seed: int) -> dict:
    """Omega = 1 reduces the Wallenius PMF to the hypergeometric one."""
    return asdict(check_constant_omega_reduction(random_instances(count, max_n, max_m, seed)))


@task(
    name="check-directed-undirected-equivalence",
    retries=CHECK_TASK_RETRIES,
    timeout_seconds=CHECK_TASK_TIMEOUT,
    tags=TAGS_VERIFY_EXACT,
)
def equivalence_task(max_n: int, max_m: int, seed: int) -> dict:
    return asdict(check_directed_undirected_equivalence(max_n=max_n, max_m=min(max_m, 4), seed=seed))


@task(
    name="check-expected-degrees",
    retries=CHECK_TASK_RETRIES,
    timeout_seconds=CHECK_TASK_TIMEOUT,
    tags=TAGS_VERIFY_EXACT,
)
def expected_degrees_task(count: int, max_n: int, max_m: int, seed: int) -> dict:
    return asdict(check_expected_degrees(random_instances(count, max_n, max_m, seed)))


@task(
    name="check-fit-round-trip",
    retries=CHECK_TASK_RETRIES,
    timeout_seconds=CHECK_TASK_TIMEOUT,
    tags=TAGS_VERIFY_EXACT,
)
def fit_round_trip_task(max_n: int, seed: int) -> dict:
    return asdict(check_fit_round_trip(max_n=max_n, seed=seed))


@task(
    name="check-marginal-consistency",
    retries=CHECK_TASK_RETRIES,
    timeout_seconds=CHECK_TASK_TIMEOUT,
    tags=TAGS_VERIFY_EXACT,
)
def marginal_task(count: int, max_n: int, max_m: int, seed: int) -> dict:
    return asdict(check_marginal_consistency(random_instances(count, max_n, max_m, seed), seed=seed))


@task(
    name="check-sampler-chi-square",
    retries=CHECK_TASK_RETRIES,
    timeout_seconds=SAMPLER_TASK_TIMEOUT,
    tags=TAGS_VERIFY_STATISTICAL,
)
def sampler_task(trials: int, seed: int, significance: float) -> dict:
    """Tree sampler, soft-configuration sampler and naive urn against the exact law."""
    return asdict(check_sampler_chi_square(trials=trials, seed=seed, significance=significance))


@task(
    name="log-verification-summary",
    timeout_seconds=SUMMARY_TASK_TIMEOUT,
    tags=TAGS_VERIFY,
)
def log_verification_summary(results: list, start_time: float) -> dict:
    """Log a PASS/FAIL table with duration and overall status."""
    logger = get_run_logger()
    elapsed = time.time() - start_time
    minutes = int(elapsed // 60)
    seconds = int(elapsed % 60)
    passed = all(r["passed"] for r in results)

    logger.info("")
    logger.info("=" * 60)
    logger.info("VERIFICATION SUMMARY")
    logger.info("=" * 60)
    logger.info(f"  Duration:  {minutes}m {seconds}s")
    logger.info("")
    for r in results:
        status = "✅ PASS" if r["passed"] else "❌ FAIL"
        logger.info(f"  {status} | {r['name']:35} | {r['detail']}")
    logger.info("=" * 60)
    logger.info(f"  Verification status: {'ALL CHECKS PASSED' if passed else 'SOME CHECKS FAILED'}")
    logger.info("=" * 60)

    return {"passed": passed, "results": results, "elapsed_seconds": elapsed}
