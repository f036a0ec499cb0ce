"""
Incremental construction of n-universal sets with n + 2 elements.

Starting from E_0 = {0, 1}, each step adds one element x to an n-universal
E_n so that E_n + {x} is (n+1)-universal. The new element is pinned by
congruences at the primes where E_n is not yet good enough for degree n + 1,
and then chosen from the resulting residue class so that it creates no
collision at any larger prime:

* a prime P with N(P) <= n + 1 gets a residue modulo P^m, m one more than
  the largest valuation of a difference of E_n + {x_P}, such that the set's
  P-ordering invariants match the ring's up to n + 1;
* a prime P with N(P) >= n + 2 only needs x to avoid the classes of E_n
  modulo P.

Primes up to the pin bound are found by trial division. The remaining part of
every difference norm is a product of primes above the bound; candidates whose
differences with E_n share a factor with any of them are rejected, so that
each such prime divides at most one difference of the new set.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..exceptions import BudgetExceededError, IntegrityError
from ..field.lattice import DEFAULT_RESIDUE_GUARD, crt_solve, residues
from ..field.primes import (DEFAULT_FACTOR_BOUND, PrimeIdeal, factor_rational_prime,
                            split_smooth, valuation)
from ..field.quadratic import FieldCtx, QuadInt
from ..ordering.factorials import factorial_ideal, set_invariants_match_ring, stabilization_level
from ..ordering.universality import PointSet, is_n_universal

logger = logging.getLogger(__name__)

DEFAULT_PIN_BOUND = 2000
DEFAULT_CANDIDATE_LIMIT = 100000


@dataclass(frozen=True)
class PinnedCongruence:
    """A congruence x = residue (mod prime^exponent) imposed on the new element.

    Attributes
    ----------
    prime : PrimeIdeal
        The prime
    exponent : int
        The power of the prime the congruence holds modulo
    residue : QuadInt
        The residue
    mode : str
        ``"extend"`` when the residue extends an almost uniformly distributed
        subset, ``"avoid"`` when it only avoids the classes already used
    """
    prime: PrimeIdeal
    exponent: int
    residue: QuadInt
    mode: str


@dataclass
class ConstructionStep:
    """Diagnostics for one extension E_n -> E_{n+1}.

    Attributes
    ----------
    n : int
        Degree of the set being extended
    divisor_primes : list of PrimeIdeal
        Primes up to the pin bound dividing Vol(E_n)
    bad_primes : list of PrimeIdeal
        The subset of `divisor_primes` where E_n fails for degree n + 1
    congruences : list of PinnedCongruence
        One congruence per bad prime
    element : QuadInt
        The element added
    candidates_rejected : int
        Candidates in the pinned class rejected before `element` was found
    coordinate_bits : int
        Bit length of the largest coordinate of `element`
    log_excess : float
        log N(Vol(E_{n+1}) / prod_{k<=n+2} k!_K)
    """
    n: int
    divisor_primes: list
    bad_primes: list
    congruences: list
    element: QuadInt
    candidates_rejected: int
    coordinate_bits: int
    log_excess: float


@dataclass
class ConstructionTrace:
    """A certified chain E_0 < E_1 < ... with |E_m| = m + 2.

    Attributes
    ----------
    ctx : FieldCtx
        The field
    chain : list of PointSet
        E_0, ..., E_n
    steps : list of ConstructionStep
        steps[m] records how E_{m+1} was obtained from E_m
    """
    ctx: FieldCtx
    chain: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    @property
    def final(self) -> PointSet:
        return self.chain[-1]

    @property
    def n(self) -> int:
        return len(self.chain) - 1


def _log_norm_volume(points: PointSet) -> float:
    return 2 * math.fsum(math.log(abs(d.norm())) for d in points.differences())


def log_excess(points: PointSet) -> float:
    """log N(Vol(E) / prod_{k=1}^{|E|-1} k!_K) for a set E"""
    ctx = points.ctx
    factorials = math.fsum(factorial_ideal(ctx, k).log_norm() for k in range(2, len(points)))
    return _log_norm_volume(points) - factorials


def _max_valuation(elements: list[QuadInt], prime: PrimeIdeal) -> int:
    return max((valuation(elements[i] - elements[j], prime)
                for i in range(len(elements)) for j in range(i + 1, len(elements))), default=0)


def _avoiding_residue(elements: list[QuadInt], prime: PrimeIdeal, n: int,
                      residue_guard: int) -> QuadInt:
    """Smallest residue outside every class of `elements` modulo P"""
    if prime.p >= n + 3:
        candidates = (prime.ctx.element(c) for c in range(prime.p))
    else:
        candidates = iter(residues(prime, 1, residue_guard))
    for c in candidates:
        if all(c != e and valuation(c - e, prime) == 0 for e in elements):
            return c
    raise IntegrityError(f"every class modulo {prime.label} is occupied by {len(elements)} elements")


def _extending_residue(points: PointSet, prime: PrimeIdeal, n: int,
                       residue_guard: int) -> tuple[QuadInt, int]:
    """A residue x_P making E + {x_P} match the ring's invariants up to n + 1"""
    elements = list(points)
    top = max(stabilization_level(prime, n + 2), _max_valuation(elements, prime) + 1)
    modulus = prime.p ** top
    representatives = residues(prime, top, residue_guard)

    def fresh(c: QuadInt) -> bool:
        return all(c == e or valuation(c - e, prime) < top for e in elements)

    ordered = [c for c in representatives if fresh(c)] + [c for c in representatives if not fresh(c)]
    for c in ordered:
        candidate = c + modulus if c in points else c
        if set_invariants_match_ring(elements + [candidate], prime, n + 1):
            exponent = _max_valuation(elements + [candidate], prime) + 1
            return candidate, exponent
    raise IntegrityError(f"no residue modulo {prime.label}^{top} extends the set for degree {n + 1}")


def _offsets(ctx: FieldCtx) -> Iterator[QuadInt]:
    """Every element of O_K once, by increasing |a| + |b| then (a, b)"""
    yield ctx.zero()
    radius = 1
    while True:
        if ctx.is_rational:
            ring = [(-radius, 0), (radius, 0)]
        else:
            ring = sorted((a, b) for a in range(-radius, radius + 1)
                          for b in (radius - abs(a), abs(a) - radius)
                          if abs(a) + abs(b) == radius)
            ring = sorted(set(ring))
        for a, b in ring:
            yield ctx.element(a, b)
        radius += 1


def extend_universal(points: PointSet, n: int, pin_bound: int = DEFAULT_PIN_BOUND,
                     residue_guard: int = DEFAULT_RESIDUE_GUARD,
                     candidate_limit: int = DEFAULT_CANDIDATE_LIMIT,
                     factor_bound: int = DEFAULT_FACTOR_BOUND) -> tuple[QuadInt, ConstructionStep]:
    """
    Extend an n-universal set of n + 2 elements to an (n+1)-universal one.

    Parameters
    ----------
    points
        An n-universal set with n + 2 elements
    n
        Its degree
    pin_bound
        Rational primes up to this bound are pinned by congruences
    residue_guard
        Largest residue system enumerated while extending at a small prime
    candidate_limit
        Number of candidates from the pinned class tried before giving up
    factor_bound
        Trial division bound passed to the certification

    Returns
    -------
    The new element and the diagnostics of this step

    Raises
    ------
    ValueError
        If the set does not have n + 2 elements
    BudgetExceededError
        If a guard is exceeded
    IntegrityError
        If the extended set fails certification
    """
    if len(points) != n + 2:
        raise ValueError(f"expected {n + 2} elements to extend degree {n}, got {len(points)}")
    ctx = points.ctx
    elements = list(points)
    bound = max(pin_bound, n + 2)
    norms = [abs(d.norm()) for d in points.differences()]

    identified = set()
    cofactors = []
    for norm in norms:
        found, cofactor = split_smooth(norm, bound)
        identified.update(found)
        if cofactor > 1:
            cofactors.append(cofactor)

    divisor_primes, bad_primes, congruences = [], [], []
    for q in sorted(identified):
        for prime, _ in factor_rational_prime(ctx, q):
            if _max_valuation(elements, prime) == 0:
                continue
            divisor_primes.append(prime)
            if set_invariants_match_ring(elements, prime, n + 1):
                continue
            bad_primes.append(prime)
            if prime.residue_norm >= n + 2:
                residue = _avoiding_residue(elements, prime, n, residue_guard)
                congruences.append(PinnedCongruence(prime, 1, residue, "avoid"))
            else:
                residue, exponent = _extending_residue(points, prime, n, residue_guard)
                congruences.append(PinnedCongruence(prime, exponent, residue, "extend"))
            logger.debug("Pinned %s: %s mod exponent %d (%s)", prime.label, congruences[-1].residue,
                         congruences[-1].exponent, congruences[-1].mode)

    if congruences:
        base = crt_solve([(c.residue, c.prime, c.exponent) for c in congruences])
    else:
        base = ctx.zero()
    step_size = 1
    exponents = {}
    for c in congruences:
        exponents[c.prime.p] = max(exponents.get(c.prime.p, 0), c.exponent)
    for p, exponent in exponents.items():
        step_size *= p ** exponent
    cofactor_product = math.prod(cofactors)

    rejected = 0
    chosen: Optional[QuadInt] = None
    for offset in _offsets(ctx):
        if rejected >= candidate_limit:
            raise BudgetExceededError("candidate_limit", rejected, f"extending degree {n} in {ctx}")
        candidate = base + step_size * offset
        if candidate in points:
            continue
        if cofactor_product > 1 and any(math.gcd(abs((candidate - e).norm()), cofactor_product) > 1
                                        for e in elements):
            rejected += 1
            continue
        chosen = candidate
        break

    extended = points.with_element(chosen)
    report = is_n_universal(extended, n + 1, factor_bound=factor_bound)
    if not report.verdict:
        raise IntegrityError(f"extension of degree {n} failed certification at "
                             f"{[f.prime.label if f.prime else f.cofactor for f in report.failures]}")

    step = ConstructionStep(n, divisor_primes, bad_primes, congruences, chosen, rejected,
                            chosen.bit_length(), log_excess(extended))
    logger.info("Extended degree %d in %s: %d bad primes, %d candidates rejected, %d-bit element",
                n, ctx, len(bad_primes), rejected, step.coordinate_bits)
    return chosen, step


def build_universal(ctx: FieldCtx, n: int, **kwargs) -> ConstructionTrace:
    """
    Build a chain E_0 < ... < E_n of certified universal sets.

    Parameters
    ----------
    ctx
        The field
    n
        The final degree, n >= 0
    **kwargs
        Guards forwarded to `extend_universal`

    Returns
    -------
    The trace holding every E_m and the diagnostics of every step
    """
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    current = PointSet(ctx, (ctx.zero(), ctx.one()))
    if not is_n_universal(current, 0).verdict:
        raise IntegrityError("{0, 1} is not 0-universal")
    trace = ConstructionTrace(ctx, [current], [])
    logger.info("Building a %d-universal set with %d elements in %s", n, n + 2, ctx)
    for m in range(n):
        element, step = extend_universal(current, m, **kwargs)
        current = current.with_element(element)
        trace.chain.append(current)
        trace.steps.append(step)
    return trace
