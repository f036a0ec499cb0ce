"""
Fourier diagnostics for the lattice walk.

A single step of the walk adds +-1 to every coordinate independently. Reduced
modulo an odd prime p, one coordinate of the walk is the M-fold convolution of
(delta_1 + delta_{-1}) / 2 on Z/p, whose Fourier coefficient at the character
a -> exp(2 pi i a t / p) is cos(2 pi t / p)^M. The quantity

    (1/|G|) sum over characters of |mu_hat|

bounds the probability that two independent walks collide modulo p, and
sums over set partitions of such quantities bound the probability that
n + m walks take at most n distinct values.
"""
from __future__ import annotations

import itertools
import logging
import math
from typing import Sequence

import numpy as np
from scipy.special import gammaln
from sympy import isprime
from sympy.functions.combinatorial.numbers import stirling
from sympy.utilities.iterables import multiset_partitions

from ..field.primes import PrimeIdeal, SplitKind, primes_up_to_norm
from ..field.quadratic import FieldCtx

logger = logging.getLogger(__name__)

DENSE_GUARD = 10 ** 7
ENUMERATION_GUARD = 10 ** 6


def _require_odd_prime(p: int):
    if p == 2 or not isprime(p):
        raise ValueError(f"{p} is not an odd prime")


def fourier_bound(p: int, M: int) -> float:
    """
    (1/p) sum_{a=0}^{p-1} |cos(2 pi a / p)|^M.

    Parameters
    ----------
    p
        An odd prime
    M
        Number of steps, M >= 1
    """
    _require_odd_prime(p)
    if M < 1:
        raise ValueError(f"number of steps must be >= 1, got {M}")
    angles = 2 * np.pi * np.arange(p) / p
    return float(np.mean(np.abs(np.cos(angles)) ** M))


def fourier_bound_analytic(p: int, M: int) -> float:
    """2/p + 2 Gamma((M+1)/2) / (sqrt(pi) M Gamma(M/2)), an upper bound for `fourier_bound`"""
    _require_odd_prime(p)
    if M < 1:
        raise ValueError(f"number of steps must be >= 1, got {M}")
    return 2 / p + 2 * math.exp(gammaln((M + 1) / 2) - gammaln(M / 2)) / (math.sqrt(math.pi) * M)


def step_distribution(p: int, M: int) -> np.ndarray:
    """Distribution on Z/p of the sum of M independent +-1 steps"""
    if p * max(M, 1) > DENSE_GUARD:
        raise ValueError(f"p * M = {p * M} exceeds the dense array guard {DENSE_GUARD}")
    mu = np.zeros(p)
    mu[0] = 1.0
    for _ in range(M):
        mu = 0.5 * (np.roll(mu, 1) + np.roll(mu, -1))
    return mu


def convolution_oracle(p: int, M: int) -> float:
    """
    (1/p) sum |mu_hat| for the M-step walk on Z/p, computed from the
    convolved distribution with an FFT.

    Raises
    ------
    ValueError
        If `p` is not an odd prime or the arrays would be too large
    """
    _require_odd_prime(p)
    mu = step_distribution(p, M)
    return float(np.abs(np.fft.fft(mu)).sum() / p)


def hausdorff_young_sides(mu: Sequence[float], q: float) -> tuple[float, float]:
    """
    Both sides of the Hausdorff-Young inequality for a function on Z/p.

    With q' = q / (q - 1),

        sum_g |mu(g)|^q <= ((1/p) sum_chi |mu_hat(chi)|^q')^(q - 1).

    Parameters
    ----------
    mu
        Values of the function on Z/p
    q
        Exponent, q >= 2; both sides agree at q = 2

    Returns
    -------
    (left side, right side)
    """
    if q < 2:
        raise ValueError(f"exponent must be >= 2, got {q}")
    values = np.asarray(mu, dtype=float)
    dual = q / (q - 1)
    lhs = float(np.sum(np.abs(values) ** q))
    rhs = float(np.mean(np.abs(np.fft.fft(values)) ** dual) ** (q - 1))
    return lhs, rhs


def prime_fourier_ratio(prime: PrimeIdeal, M: int) -> float:
    """
    (1/N(P)) sum |mu_hat| for the walk on O_K reduced modulo P.

    In O_K / P = Z/p the point a + b*w maps to a + b*r, so the coefficient at
    t is (cos(2 pi t / p) cos(2 pi t r / p))^M. For inert primes the residue
    ring is (Z/p)^2 in the coordinates and the ratio is `fourier_bound` squared.
    """
    if M < 1:
        raise ValueError(f"number of steps must be >= 1, got {M}")
    p = prime.p
    if prime.kind is SplitKind.RATIONAL:
        return fourier_bound(p, M)
    if prime.kind is SplitKind.INERT:
        return fourier_bound(p, M) ** 2
    t = np.arange(p)
    coefficients = np.cos(2 * np.pi * t / p) * np.cos(2 * np.pi * ((t * prime.local_root) % p) / p)
    return float(np.mean(np.abs(coefficients) ** M))


def count_m_partitions(n: int, m: int) -> int:
    """Number of partitions of {1, ..., n+m} into exactly n blocks, S(n+m, n)"""
    if n < 1 or m < 0:
        raise ValueError(f"need n >= 1 and m >= 0, got n = {n}, m = {m}")
    return int(stirling(n + m, n))


def _partitions(size: int, n: int):
    return multiset_partitions(list(range(size)), n)


def partition_collision_bound(measures: Sequence[Sequence[float]], n: int) -> float:
    """
    Upper bound for the probability that len(measures) independent samples
    take at most n distinct values.

    The sum over partitions into n blocks A_i of
    prod_i sum_x (1/|A_i|) sum_{j in A_i} mu_j(x)^|A_i|.
    """
    arrays = [np.asarray(mu, dtype=float) for mu in measures]
    if len(arrays) < n:
        raise ValueError(f"need at least n = {n} measures, got {len(arrays)}")
    total = 0.0
    for partition in _partitions(len(arrays), n):
        term = 1.0
        for block in partition:
            term *= sum(np.sum(arrays[j] ** len(block)) for j in block) / len(block)
        total += term
    return float(total)


def exact_collision_probability(measures: Sequence[Sequence[float]], n: int) -> float:
    """
    Probability that independent samples from `measures` take at most n
    distinct values, by enumerating every outcome.

    Raises
    ------
    ValueError
        If the number of outcomes exceeds the enumeration guard
    """
    arrays = [np.asarray(mu, dtype=float) for mu in measures]
    size = len(arrays[0])
    outcomes = size ** len(arrays)
    if outcomes > ENUMERATION_GUARD:
        raise ValueError(f"{outcomes} outcomes exceed the enumeration guard {ENUMERATION_GUARD}")
    probability = 0.0
    for outcome in itertools.product(range(size), repeat=len(arrays)):
        if len(set(outcome)) <= n:
            probability += math.prod(arrays[j][x] for j, x in enumerate(outcome))
    return probability


def failure_bound_shape(norm: int, M: int, m: int) -> float:
    """(1/N(P) + M^(-1/2))^m, the shape of the per-prime failure bound up to constants"""
    if M < 1:
        raise ValueError(f"number of steps must be >= 1, got {M}")
    return (1 / norm + M ** -0.5) ** m


def prime_sum_shape(ctx: FieldCtx, L: int, M: int, norm_limit: int) -> float:
    """sum over L < N(P) <= norm_limit of (1/N(P) + M^(-1/2))^d"""
    if norm_limit <= L:
        return 0.0
    return math.fsum(failure_bound_shape(prime.residue_norm, M, ctx.degree)
                     for prime in primes_up_to_norm(ctx, norm_limit) if prime.residue_norm > L)
