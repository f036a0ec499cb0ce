"""
Monte Carlo evaluation of the logarithmic potential energy

    I(U) = integral over U x U of log ||x - y|| dx dy,

where U is a finite union of disjoint axis-aligned boxes in R^d and
||x|| = prod_i |x_i|, so log ||x - y|| = sum_i log |x_i - y_i|.

The integral is split over ordered pairs of boxes (A, B), each stratum
weighted by m(A) m(B) and sampled in proportion to its weight.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .euler_kronecker import DEFAULT_TOLERANCE, gamma_estimate
from ..field.quadratic import FieldCtx

logger = logging.getLogger(__name__)

BATCH_SIZE = 10 ** 6
DEFAULT_GAMMA_N = 10 ** 5


@dataclass(frozen=True)
class Box:
    """An axis-aligned box prod_i [lower_i, upper_i].

    Raises
    ------
    ValueError
        If the corners have different dimensions or the box has zero measure
    """
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        if len(lower) != len(upper) or not lower:
            raise ValueError(f"box corners {lower} and {upper} have different dimensions")
        if any(hi <= lo for lo, hi in zip(lower, upper)):
            raise ValueError(f"box {lower} - {upper} has zero measure")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def measure(self) -> float:
        return math.prod(hi - lo for lo, hi in zip(self.lower, self.upper))

    def overlaps(self, other: Box) -> bool:
        """True if the interiors intersect"""
        return all(lo < other_hi and other_lo < hi for lo, hi, other_lo, other_hi
                   in zip(self.lower, self.upper, other.lower, other.upper))

    def scaled(self, factor: float) -> Box:
        return Box(tuple(factor * x for x in self.lower), tuple(factor * x for x in self.upper))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(count, self.dimension))

    @classmethod
    def unit(cls, d: int) -> Box:
        return cls((0.0,) * d, (1.0,) * d)


def _validate(boxes: Sequence[Box], d: int):
    if d not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {d}")
    if not boxes:
        raise ValueError("the union of boxes has zero measure")
    for index, box in enumerate(boxes):
        if box.dimension != d:
            raise ValueError(f"box {index} has dimension {box.dimension}, expected {d}")
        for other in range(index):
            if box.overlaps(boxes[other]):
                raise ValueError(f"boxes {other} and {index} overlap")


def _stratum_moments(first: Box, second: Box, count: int, rng: np.random.Generator) -> tuple[float, float]:
    """Mean and variance of log ||X - Y|| over `count` samples"""
    total, total_sq, done = 0.0, 0.0, 0
    while done < count:
        size = min(BATCH_SIZE, count - done)
        x = first.sample(rng, size)
        y = second.sample(rng, size)
        gaps = np.abs(x - y)
        tied = np.any(gaps == 0, axis=1)
        while tied.any():
            x[tied] = first.sample(rng, int(tied.sum()))
            y[tied] = second.sample(rng, int(tied.sum()))
            gaps = np.abs(x - y)
            tied = np.any(gaps == 0, axis=1)
        values = np.log(gaps).sum(axis=1)
        total += values.sum()
        total_sq += np.square(values).sum()
        done += size
    mean = total / count
    variance = max(total_sq / count - mean * mean, 0.0) * count / max(count - 1, 1)
    return mean, variance


def log_potential_integral(boxes: Sequence[Box], d: int, samples: int, seed: int = 0) -> tuple[float, float]:
    """
    Stratified Monte Carlo estimate of the double integral of log ||x - y||.

    Parameters
    ----------
    boxes
        Disjoint boxes of positive measure whose union is U
    d
        The dimension, 1 or 2
    samples
        Total number of (x, y) pairs drawn over all strata
    seed
        Seed of the numpy generator

    Returns
    -------
    The estimate and its standard error

    Raises
    ------
    ValueError
        If the boxes overlap, have zero measure or the wrong dimension, or
        there are fewer than two samples per stratum
    """
    boxes = list(boxes)
    _validate(boxes, d)
    pairs = [(a, b) for a in boxes for b in boxes]
    weights = np.array([a.measure * b.measure for a, b in pairs])
    if samples < 2 * len(pairs):
        raise ValueError(f"{samples} samples cannot cover {len(pairs)} strata")
    counts = np.maximum(np.floor(samples * weights / weights.sum()).astype(int), 2)

    rng = np.random.default_rng(seed)
    value, variance = 0.0, 0.0
    for (first, second), weight, count in zip(pairs, weights, counts):
        mean, var = _stratum_moments(first, second, int(count), rng)
        value += weight * mean
        variance += weight * weight * var / count
    stderr = math.sqrt(variance)
    logger.info("Log potential over %d boxes (%d samples): %.6f +- %.6f", len(boxes), samples, value, stderr)
    return value, stderr


@dataclass
class InequalityCheck:
    """Outcome of `log_ineq_check`.

    Attributes
    ----------
    lhs : float
        The Monte Carlo value of the double integral
    stderr : float
        Its standard error
    rhs : float
        m(U)^2 (c_{d,K} + log m(U))
    c_dk : float
        The constant used
    satisfied : bool
        lhs >= rhs - tolerance
    """
    lhs: float
    stderr: float
    rhs: float
    c_dk: float
    satisfied: bool


def log_ineq_check(ctx: FieldCtx, boxes: Sequence[Box], samples: int, seed: int = 0,
                   gamma_n: int = DEFAULT_GAMMA_N, tolerance: float = DEFAULT_TOLERANCE) -> InequalityCheck:
    """
    Check the log-potential lower bound m(U)^2 (c_{2,K} + log m(U)) for a
    real quadratic field, with gamma_K estimated at `gamma_n`.

    Raises
    ------
    ValueError
        If the field is not real quadratic
    """
    if ctx.is_rational or not ctx.is_totally_real:
        raise ValueError(f"the log-potential bound needs a real quadratic field, got {ctx}")
    boxes = list(boxes)
    lhs, stderr = log_potential_integral(boxes, 2, samples, seed)
    c_dk = gamma_estimate(ctx, gamma_n).c_dk
    mass = math.fsum(box.measure for box in boxes)
    rhs = mass * mass * (c_dk + math.log(mass))
    return InequalityCheck(lhs, stderr, rhs, c_dk, bool(lhs >= rhs - tolerance))
