"""
Generalized factorials n!_K and P-orderings of finite sets.

The exponent of P in n!_K is w_P(n) = sum_i floor(n / N(P)^i). For a finite set
S the greedy P-ordering produces the sequence w_P(k, S), which never drops
below the ring's w_P(k); S contains an (n+1)-element subset that is almost
uniformly distributed modulo every power of P exactly when the two sequences
agree up to n.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from ..field.primes import FactoredIdeal, PrimeIdeal, primes_up_to_norm, valuation
from ..field.quadratic import FieldCtx, QuadInt

logger = logging.getLogger(__name__)


def w_ring(ctx: FieldCtx, prime: PrimeIdeal, n: int) -> int:
    """
    Exponent of `prime` in n!_K.

    Parameters
    ----------
    ctx
        The field, which must match the prime's
    prime
        The prime ideal
    n
        A non-negative integer

    Returns
    -------
    sum over i >= 1 of floor(n / N(P)^i)
    """
    if prime.ctx != ctx:
        raise ValueError(f"prime {prime.label} does not belong to {ctx}")
    if n < 0:
        raise ValueError(f"factorials are defined for n >= 0, got {n}")
    total = 0
    power = prime.residue_norm
    while power <= n:
        total += n // power
        power *= prime.residue_norm
    return total


def factorial_ideal(ctx: FieldCtx, n: int) -> FactoredIdeal:
    """
    The generalized factorial n!_K as a factored ideal.

    Parameters
    ----------
    ctx
        The field
    n
        A non-negative integer

    Returns
    -------
    The product of P^w_P(n) over the primes with N(P) <= n
    """
    if n < 0:
        raise ValueError(f"factorials are defined for n >= 0, got {n}")
    return FactoredIdeal({prime: w_ring(ctx, prime, n) for prime in primes_up_to_norm(ctx, n)})


def factorial_product(ctx: FieldCtx, n: int) -> FactoredIdeal:
    """prod_{i=1}^{n} i!_K, whose square is the volume of an n-optimal set"""
    result = FactoredIdeal.unit()
    for i in range(2, n + 1):
        result = result * factorial_ideal(ctx, i)
    return result


@dataclass(frozen=True)
class POrdering:
    """A greedy P-ordering of (a prefix of) a finite set.

    Attributes
    ----------
    sequence : tuple of QuadInt
        The elements in the order chosen
    prime : PrimeIdeal
        The prime the ordering is taken at
    w_sequence : tuple of int
        w_sequence[k] is the valuation of prod_{i<k}(s_i - s_k); it does not
        depend on how ties were broken
    """
    sequence: tuple
    prime: PrimeIdeal
    w_sequence: tuple


def _greedy(elements: list[QuadInt], prime: PrimeIdeal, length: int, reverse_tiebreak: bool,
            ceiling: Optional[list[int]] = None) -> tuple[list[QuadInt], list[int], Optional[int]]:
    """Greedy P-ordering; stops at the first step whose minimum exceeds `ceiling`"""
    order = sorted(elements, key=QuadInt.canonical_key, reverse=reverse_tiebreak)
    sums = [0] * len(order)
    remaining = list(range(len(order)))
    sequence, weights = [], []
    for step in range(length):
        best = min(remaining, key=lambda i: sums[i])
        if ceiling is not None and sums[best] > ceiling[step]:
            return sequence, weights, step
        chosen = order[best]
        sequence.append(chosen)
        weights.append(sums[best])
        remaining.remove(best)
        for i in remaining:
            sums[i] += valuation(order[i] - chosen, prime)
    return sequence, weights, None


def p_ordering_of_set(elements: Iterable[QuadInt], prime: PrimeIdeal, length: int,
                      reverse_tiebreak: bool = False) -> POrdering:
    """
    Greedy P-ordering of a finite set.

    Each step picks the element minimizing the valuation of the product of its
    differences with the elements already chosen. Ties go to the smallest
    element under (|a| + |b|, a, b), or the largest with `reverse_tiebreak`.

    Parameters
    ----------
    elements
        A finite set of distinct elements
    prime
        The prime ideal
    length
        Number of elements to order, at most the size of the set
    reverse_tiebreak
        Reverse the canonical order used to break ties

    Returns
    -------
    The ordering and its w_sequence

    Raises
    ------
    ValueError
        If `length` exceeds the size of the set
    """
    elements = list(elements)
    if length > len(elements):
        raise ValueError(f"cannot order {length} elements out of a set of {len(elements)}")
    sequence, weights, _ = _greedy(elements, prime, length, reverse_tiebreak)
    return POrdering(tuple(sequence), prime, tuple(weights))


def first_divergence(elements: Iterable[QuadInt], prime: PrimeIdeal, n: int) -> Optional[int]:
    """
    The first k <= n where w_P(k, S) exceeds w_P(k) of the ring, or None.

    Raises
    ------
    ValueError
        If the set has fewer than n + 1 elements
    """
    elements = list(elements)
    if len(elements) < n + 1:
        raise ValueError(f"set of {len(elements)} elements cannot carry n = {n}")
    ctx = prime.ctx
    ceiling = [w_ring(ctx, prime, k) for k in range(n + 1)]
    _, weights, stopped = _greedy(elements, prime, n + 1, False, ceiling)
    return stopped


def set_invariants_match_ring(elements: Iterable[QuadInt], prime: PrimeIdeal, n: int) -> bool:
    """
    Whether the set's P-ordering invariants agree with the ring's up to n.

    Equivalently, whether the set contains n + 1 elements that are almost
    uniformly distributed modulo every power of `prime`.

    Parameters
    ----------
    elements
        At least n + 1 distinct elements
    prime
        The prime ideal
    n
        The degree

    Returns
    -------
    True iff w_P(k, S) = w_P(k) for every k <= n
    """
    return first_divergence(elements, prime, n) is None


def stabilization_level(prime: PrimeIdeal, count: int) -> int:
    """Smallest m >= 1 with N(P)^m >= count"""
    level, power = 1, prime.residue_norm
    while power < count:
        level += 1
        power *= prime.residue_norm
    return level
