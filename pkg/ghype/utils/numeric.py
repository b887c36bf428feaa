"""
Numerical Kernels
-----------------
Log-space binomial arithmetic and adaptive quadrature on (0, 1).

All probability math in the package goes through these helpers, so PMFs are
carried as logarithms and only exponentiated at the API boundary.

The integrator is built for the sharply peaked integrands of the Wallenius
distribution: it works on the logarithm of the integrand, moves the peak to
the middle of the interval with the substitution z = u**p, and refines
Gauss-Kronrod (7/15) panels until the error estimate meets the tolerance.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import betaln

from ghype.config import EXACT_BINOMIAL_MAX_N, QUAD_MAX_SUBDIVISIONS, QUAD_REL_TOL
from ghype.exceptions import InputError, QuadratureError
from ghype.utils.logging_config import setup_logger

log = setup_logger("numeric")

LN2 = math.log(2.0)

# --- Exact log-binomial table (n <= EXACT_BINOMIAL_MAX_N) ---
_LOG_COMB = np.full((EXACT_BINOMIAL_MAX_N + 1, EXACT_BINOMIAL_MAX_N + 1), -np.inf)
for _n in range(EXACT_BINOMIAL_MAX_N + 1):
    for _k in range(_n + 1):
        _LOG_COMB[_n, _k] = math.log(math.comb(_n, _k))

# --- Gauss-Kronrod 7/15 rule on [-1, 1] ---
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
])
_WGK_CENTER = 0.209482141084727828012999174891714
_WG = np.array([
    0.0, 0.129484966168869693270611432679082,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975,
    0.0,
])
_WG_CENTER = 0.417959183673469387755102040816327

NODES = np.concatenate([-_XGK, [0.0], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK, [_WGK_CENTER], _WGK[::-1]])
GAUSS_WEIGHTS = np.concatenate([_WG, [_WG_CENTER], _WG[::-1]])

INITIAL_PANELS = 16
_EPS = np.finfo(float).eps


def log_binomial(n: int, k: int) -> float:
    """
    Natural log of the binomial coefficient C(n, k).

    Exact (from integer arithmetic) for n <= 60, log-beta based above.
    Returns -inf when k < 0 or k > n.
    """
    if k < 0 or k > n:
        return -math.inf
    k = min(k, n - k)
    if n <= EXACT_BINOMIAL_MAX_N:
        return float(_LOG_COMB[n, k])
    if k == 0:
        return 0.0
    return float(-math.log1p(n) - betaln(n - k + 1, k + 1))


def log_binomial_array(n, k) -> np.ndarray:
    """Vectorised log_binomial over broadcastable integer arrays."""
    n, k = np.broadcast_arrays(np.asarray(n, dtype=np.int64), np.asarray(k, dtype=np.int64))
    out = np.full(n.shape, -np.inf)
    valid = (k >= 0) & (k <= n)
    kk = np.minimum(k, n - k)

    small = valid & (n <= EXACT_BINOMIAL_MAX_N)
    out[small] = _LOG_COMB[n[small], kk[small]]

    large = valid & (n > EXACT_BINOMIAL_MAX_N)
    if large.any():
        nl = n[large].astype(float)
        kl = kk[large].astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = -np.log1p(nl) - betaln(nl - kl + 1.0, kl + 1.0)
        out[large] = np.where(kl == 0, 0.0, values)
    return out


def log_hypergeom_pmf(a, balls: int, total: int, draws: int) -> np.ndarray:
    """Log PMF of the univariate hypergeometric law at a (vectorised)."""
    a = np.asarray(a, dtype=np.int64)
    return (
        log_binomial_array(balls, a)
        + log_binomial_array(total - balls, draws - a)
        - log_binomial(total, draws)
    )


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerance and refinement budget of integrate_unit_interval."""

    rel_tol: float = QUAD_REL_TOL
    max_subdivisions: int = QUAD_MAX_SUBDIVISIONS

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1e-2:
            raise InputError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol}")
        if self.max_subdivisions < 16:
            raise InputError(
                f"max_subdivisions must be at least 16, got {self.max_subdivisions}"
            )


def integrate_unit_interval(
    log_integrand: Callable[[np.ndarray], np.ndarray],
    peak_hint: Optional[float] = None,
    cfg: Optional[QuadratureConfig] = None,
) -> float:
    """
    Compute ln of the integral of exp(log_integrand(z)) over z in (0, 1).

    Args:
        log_integrand: Vectorised log of the integrand, called on arrays of z.
        peak_hint: Optional guess of where the integrand mass sits. Advisory only.
        cfg: Tolerance settings (defaults from config).

    Returns:
        The log of the integral; -inf for an identically zero integrand.

    Raises:
        QuadratureError: if the tolerance is not met within max_subdivisions.
    """
    log_hint = None
    if peak_hint is not None and 0.0 < peak_hint < 1.0:
        log_hint = math.log(peak_hint)

    def log_integrand_of_log(s: np.ndarray) -> np.ndarray:
        return log_integrand(np.exp(s))

    return integrate_log_scale(log_integrand_of_log, log_hint, cfg)


def integrate_log_scale(
    log_integrand: Callable[[np.ndarray], np.ndarray],
    log_peak_hint: Optional[float] = None,
    cfg: Optional[QuadratureConfig] = None,
) -> float:
    """
    Same as integrate_unit_interval, with the integrand given as a function of s = ln z.

    Working in s keeps integrands whose mass sits at z far below the smallest
    double (Wallenius integrals of large urns) representable.
    """
    cfg = cfg or QuadratureConfig()
    p = _substitution_power(log_integrand, log_peak_hint)
    log_p = math.log(p)

    def transformed(u: np.ndarray) -> np.ndarray:
        log_u = np.log(u)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return log_integrand(p * log_u) + log_p + (p - 1.0) * log_u

    return _adaptive_gauss_kronrod(transformed, cfg, p)


def _substitution_power(log_integrand, log_peak_hint: Optional[float]) -> float:
    """
    Pick p so that the integrand of u, with z = u**p, peaks near u = 0.5.

    The peak condition in s = ln z reads G'(s) = -(1 + ln2 / s); the left side
    falls and the right side rises on s < -ln 2, so the root is bracketed by
    doubling s until the sign flips and then refined.
    """
    def slope(s: float) -> float:
        h = 1e-6 * abs(s)
        probe = np.array([s + h, s - h])
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            values = np.broadcast_to(np.asarray(log_integrand(probe), dtype=float), probe.shape)
        return (values[0] - values[1]) / (2.0 * h)

    def balance(x: float) -> float:
        s = -math.exp(x)
        return slope(s) + 1.0 + LN2 / s

    top = math.log(LN2)
    at_top = balance(top)
    if not np.isfinite(at_top) or at_top >= 0.0:
        return 1.0

    lower = top + 1.0
    if log_peak_hint is not None and log_peak_hint < -LN2:
        hint = math.log(-log_peak_hint)
        at_hint = balance(hint)
        if np.isfinite(at_hint) and at_hint > 0.0:
            lower = hint
        elif np.isfinite(at_hint):
            top = hint
            lower = hint + 1.0
        else:
            log.debug(f"Peak hint s={log_peak_hint:.6g} inconsistent — re-bracketing")

    expansions = 0
    while True:
        value = balance(lower)
        if not np.isfinite(value):
            return 1.0
        if value > 0.0:
            break
        top = lower
        lower += math.log(2.0)
        expansions += 1
        if lower > 700.0:
            return 1.0

    x_star = brentq(balance, top, lower, xtol=1e-8)
    p = max(1.0, math.exp(x_star) / LN2)
    log.debug(f"Substitution power p={p:.6g} after {expansions} bracket expansions")
    return p


def _adaptive_gauss_kronrod(transformed, cfg: QuadratureConfig, p: float) -> float:
    """Adaptive 7/15 panel refinement on (0, 1) in log-space with a moving reference."""
    edges = np.linspace(0.0, 1.0, INITIAL_PANELS + 1)
    a, b = edges[:-1], edges[1:]
    logs = _panel_logs(transformed, a, b)

    ref = float(np.max(logs))
    if ref == -math.inf:
        return -math.inf
    if not np.isfinite(ref):
        raise QuadratureError(f"Integrand is not finite (max log value {ref})")

    val, err = _panel_estimates(logs, ref, a, b)

    while True:
        total = math.fsum(val)
        error = math.fsum(err)
        if error <= cfg.rel_tol * abs(total):
            break

        room = cfg.max_subdivisions - len(a)
        if room <= 0:
            raise QuadratureError(
                f"Quadrature did not converge: rel. error {error / total:.3e} "
                f"> {cfg.rel_tol:.1e} after {len(a)} panels (p={p:.4g})"
            )

        budget = cfg.rel_tol * abs(total) / len(a)
        order = np.argsort(err)[::-1]
        chosen = order[err[order] > budget][:room]
        if chosen.size == 0:
            chosen = order[:1]
        keep = np.ones(len(a), dtype=bool)
        keep[chosen] = False

        mid = 0.5 * (a[chosen] + b[chosen])
        new_a = np.concatenate([a[chosen], mid])
        new_b = np.concatenate([mid, b[chosen]])
        new_logs = _panel_logs(transformed, new_a, new_b)

        new_max = float(np.max(new_logs))
        if new_max > ref:
            if not np.isfinite(new_max):
                raise QuadratureError(f"Integrand is not finite (max log value {new_max})")
            factor = math.exp(ref - new_max)
            val, err = val * factor, err * factor
            ref = new_max

        new_val, new_err = _panel_estimates(new_logs, ref, new_a, new_b)
        a = np.concatenate([a[keep], new_a])
        b = np.concatenate([b[keep], new_b])
        val = np.concatenate([val[keep], new_val])
        err = np.concatenate([err[keep], new_err])

    log.debug(f"Quadrature converged — {len(a)} panels, p={p:.4g}")
    if total <= 0.0:
        return -math.inf
    return math.log(total) + ref


def _panel_logs(transformed, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Log integrand at the 15 Kronrod nodes of every panel, shape (panels, 15)."""
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    u = center[:, None] + half[:, None] * NODES[None, :]
    flat = u.ravel()
    logs = np.broadcast_to(np.asarray(transformed(flat), dtype=float), flat.shape).reshape(u.shape)
    if np.isnan(logs).any():
        raise QuadratureError("Integrand evaluated to NaN")
    return logs


def _panel_estimates(logs: np.ndarray, ref: float, a: np.ndarray, b: np.ndarray):
    """Kronrod value and QUADPACK-style error estimate per panel, scaled by exp(-ref)."""
    half = 0.5 * (b - a)
    f = np.exp(logs - ref)
    resk = f @ KRONROD_WEIGHTS
    resg = f @ GAUSS_WEIGHTS
    reskh = 0.5 * resk
    resasc = np.abs(f - reskh[:, None]) @ KRONROD_WEIGHTS
    resabs = np.abs(f) @ KRONROD_WEIGHTS

    abserr = np.abs(resk - resg)
    scaled = np.ones_like(abserr)
    positive = (resasc > 0.0) & (abserr > 0.0)
    scaled[positive] = np.minimum(1.0, (200.0 * abserr[positive] / resasc[positive]) ** 1.5)
    abserr = np.where(positive, resasc * scaled, abserr)
    abserr = np.maximum(abserr, 50.0 * _EPS * resabs)
    return resk * half, abserr * half
