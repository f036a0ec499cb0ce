"""
Euler-Kronecker constants from the growth of generalized factorials.

For a number field K of degree d,

    log N(n!_K) = n log n - n (1 + gamma_K - gamma_Q) + o(n),

so gamma_K can be read off (n log n - log N(n!_K)) / n - 1 + gamma_Q, where
gamma_Q is the Euler-Mascheroni constant. The o(n) term is not controlled, so
estimates for K != Q are only compared with themselves and with lower bounds.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional

import mpmath
import numpy as np
import pandas as pd

from ..exceptions import IntegrityError
from ..field.quadratic import FieldCtx
from ..ordering.factorials import factorial_ideal

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.05
_CROSS_CHECK_N = 10 ** 6


def harmonic_gap(n: int) -> float:
    """H_n - log n, which decreases to gamma_Q"""
    if n < 1:
        raise ValueError(f"harmonic numbers need n >= 1, got {n}")
    return float(mpmath.harmonic(n) - mpmath.log(n))


@lru_cache(maxsize=1)
def gamma_mascheroni() -> float:
    """
    The Euler-Mascheroni constant gamma_Q.

    Taken from mpmath and cross-checked against the accelerated harmonic sum
    H_n - log n - 1/(2n) + 1/(12n^2) at n = 10^6.

    Raises
    ------
    IntegrityError
        If the two values disagree beyond 1e-10
    """
    value = float(mpmath.euler)
    n = _CROSS_CHECK_N
    harmonic = np.sum(1.0 / np.arange(n, 0, -1, dtype=np.float64))
    accelerated = harmonic - math.log(n) - 1 / (2 * n) + 1 / (12 * n * n)
    if abs(accelerated - value) > 1e-10:
        raise IntegrityError(f"Euler-Mascheroni cross-check failed: {value} vs {accelerated}")
    return value


def log_norm_factorial(ctx: FieldCtx, n: int) -> float:
    """log N(n!_K), from the exact prime exponents"""
    return factorial_ideal(ctx, n).log_norm()


def _estimate_at(ctx: FieldCtx, n: int) -> float:
    return (n * math.log(n) - log_norm_factorial(ctx, n)) / n - 1 + gamma_mascheroni()


@dataclass
class GammaEstimate:
    """An estimate of the Euler-Kronecker constant gamma_K.

    Attributes
    ----------
    ctx : FieldCtx
        The field
    n : int
        The factorial index used
    estimate : float
        (n log n - log N(n!_K)) / n - 1 + gamma_Q
    gamma_q : float
        The Euler-Mascheroni constant
    c_dk : float
        -3/2 - gamma_K + gamma_Q - 1/2 log|Delta_K| with gamma_K = `estimate`
    trajectory : list of (int, float)
        Estimates at n // 4, n // 2 and n, for convergence diagnostics
    """
    ctx: FieldCtx
    n: int
    estimate: float
    gamma_q: float
    c_dk: float
    trajectory: list = field(default_factory=list)


def gamma_estimate(ctx: FieldCtx, n: int) -> GammaEstimate:
    """
    Estimate gamma_K from log N(n!_K).

    Parameters
    ----------
    ctx
        The field
    n
        The factorial index, n >= 2

    Returns
    -------
    The estimate with its trajectory and the derived constant c_{d,K}
    """
    if n < 2:
        raise ValueError(f"gamma estimates need n >= 2, got {n}")
    gamma_q = gamma_mascheroni()
    checkpoints = sorted({m for m in (n // 4, n // 2, n) if m >= 2})
    trajectory = [(m, _estimate_at(ctx, m)) for m in checkpoints]
    estimate = trajectory[-1][1]
    c_dk = -1.5 - estimate + gamma_q - 0.5 * math.log(abs(ctx.discriminant))
    logger.info("gamma estimate for %s at n = %d: %.8f (gamma_Q = %.8f)", ctx, n, estimate, gamma_q)
    return GammaEstimate(ctx, n, estimate, gamma_q, c_dk, trajectory)


def gamma_trajectory(ctx: FieldCtx, ns: Iterable[int]) -> pd.DataFrame:
    """Estimates at several n as a DataFrame (n, estimate, error_vs_gamma_q)"""
    gamma_q = gamma_mascheroni()
    rows = []
    for n in sorted(set(ns)):
        if n < 2:
            raise ValueError(f"gamma estimates need n >= 2, got {n}")
        estimate = _estimate_at(ctx, n)
        rows.append({"n": n, "estimate": estimate, "error_vs_gamma_q": estimate - gamma_q})
    return pd.DataFrame(rows, columns=["n", "estimate", "error_vs_gamma_q"])


def ihara_bound(ctx: FieldCtx) -> float:
    """-1/2 log|Delta_K| + (3/2) d - 3/2 + gamma_Q"""
    return -0.5 * math.log(abs(ctx.discriminant)) + 1.5 * ctx.degree - 1.5 + gamma_mascheroni()


def ihara_comparison_line(ctx: FieldCtx) -> float:
    """-1/2 log|Delta_K| + ((gamma_Q + log 4 pi) / 2) d - 1, reported for comparison only"""
    return (-0.5 * math.log(abs(ctx.discriminant))
            + (gamma_mascheroni() + math.log(4 * math.pi)) / 2 * ctx.degree - 1)


@dataclass
class BoundCheck:
    """Outcome of `ihara_bound_check`.

    Attributes
    ----------
    bound : float
        The lower bound for gamma_K
    estimate : float
        The estimate of gamma_K
    satisfied : bool
        estimate >= bound - tolerance
    tolerance : float
        The tolerance used
    in_hypothesis : bool
        False when the field is not totally real and the bound is not a theorem
    comparison_line : float
        `ihara_comparison_line` for the same field
    """
    bound: float
    estimate: float
    satisfied: bool
    tolerance: float
    in_hypothesis: bool
    comparison_line: float


def ihara_bound_check(ctx: FieldCtx, n: int, tolerance: float = DEFAULT_TOLERANCE) -> BoundCheck:
    """
    Compare the gamma_K estimate at `n` with the lower bound for totally real
    fields.

    Fields that are not totally real are accepted but logged as outside the
    bound's hypothesis.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be non-negative, got {tolerance}")
    if not ctx.is_totally_real:
        logger.warning("%s is not totally real; the gamma_K lower bound is not a theorem there", ctx)
    bound = ihara_bound(ctx)
    estimate = gamma_estimate(ctx, n).estimate
    satisfied = estimate >= bound - tolerance
    logger.info("Bound check for %s: estimate %.6f, bound %.6f, satisfied %s", ctx, estimate, bound, satisfied)
    return BoundCheck(bound, estimate, satisfied, tolerance, ctx.is_totally_real, ihara_comparison_line(ctx))


@dataclass
class VolumeCheck:
    """Exact and asymptotic log-norms of the optimal volume (prod_{k<=n} k!_K)^2.

    Attributes
    ----------
    exact : float
        2 sum_{k<=n} log N(k!_K)
    formula : float
        n^2 log n - n^2/2 - n^2 (1 + gamma_K - gamma_Q)
    gap : float
        exact - formula
    """
    exact: float
    formula: float
    gap: float

    def scaled_gap(self, n: int) -> float:
        """gap / n^2, which tends to 0"""
        return self.gap / (n * n)


def vol_asymptotic_check(ctx: FieldCtx, n: int, gamma_n: Optional[int] = None) -> VolumeCheck:
    """
    Compare log N((prod_{k<=n} k!_K)^2) with its asymptotic formula.

    Parameters
    ----------
    ctx
        The field
    n
        The degree, n >= 1
    gamma_n
        Index at which gamma_K is estimated for the formula, max(n, 1000) by
        default
    """
    if n < 1:
        raise ValueError(f"volume checks need n >= 1, got {n}")
    exact = 2 * math.fsum(log_norm_factorial(ctx, k) for k in range(2, n + 1))
    estimate = gamma_estimate(ctx, gamma_n or max(n, 1000)).estimate
    gamma_q = gamma_mascheroni()
    formula = n * n * math.log(n) - n * n / 2 - n * n * (1 + estimate - gamma_q)
    return VolumeCheck(exact, formula, exact - formula)
