"""
Volumes, almost uniform distribution, n-universality, n-optimality and Newton
sequences.

S is n-universal iff for every prime P it contains n + 1 elements almost
uniformly distributed modulo all powers of P. Only primes dividing some
difference of S matter: modulo any other prime all elements are distinct. The
differences are trial divided up to a scan bound; the primes above the bound
are handled without full factorization:

* if |S| = n + 1, any such prime dividing a difference is a failure, since
  its residue field has more than n + 1 classes and two elements collide;
* if |S| >= n + 2, a prime dividing a single difference merges one pair of
  classes and still leaves n + 1 of them. Only primes shared by two
  differences can break universality, and those divide the gcd of a
  difference's cofactor with the product of the others.
"""
from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

from .factorials import factorial_product, first_divergence, stabilization_level
from ..exceptions import FactorBoundError, IntegrityError
from ..field.lattice import ideal_power_lattice
from ..field.primes import (DEFAULT_FACTOR_BOUND, FactoredIdeal, PrimeIdeal, batch_gcd,
                            factor_element, factor_integer, factor_rational_prime,
                            split_smooth, valuation)
from ..field.quadratic import FieldCtx, QuadInt

logger = logging.getLogger(__name__)

DEFAULT_SCAN_BOUND = 1000


@dataclass(frozen=True, eq=False)
class PointSet:
    """A finite set of distinct elements of O_K, kept in insertion order.

    Equality and hashing ignore the order.

    Attributes
    ----------
    ctx : FieldCtx
        The field
    elements : tuple of QuadInt
        The distinct elements

    Raises
    ------
    ValueError
        On duplicate elements or elements of another field
    """
    ctx: FieldCtx
    elements: tuple = ()

    def __post_init__(self):
        elements = tuple(self.elements)
        seen = set()
        for index, x in enumerate(elements):
            if not isinstance(x, QuadInt) or x.ctx != self.ctx:
                raise ValueError(f"element {index} ({x!r}) is not an element of {self.ctx}")
            if x in seen:
                raise ValueError(f"duplicate element {x} at index {index}")
            seen.add(x)
        object.__setattr__(self, "elements", elements)

    @classmethod
    def of(cls, elements: Iterable[QuadInt], ctx: Optional[FieldCtx] = None) -> PointSet:
        """Build a set, taking the field from the first element when not given"""
        elements = tuple(elements)
        if ctx is None:
            if not elements:
                raise ValueError("the field of an empty set must be given")
            ctx = elements[0].ctx
        return cls(ctx, elements)

    @classmethod
    def from_coordinates(cls, ctx: FieldCtx, pairs: Iterable[Sequence[int]]) -> PointSet:
        return cls(ctx, tuple(ctx.element(*pair) for pair in pairs))

    def __iter__(self) -> Iterator[QuadInt]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self.elements

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.ctx == other.ctx and frozenset(self.elements) == frozenset(other.elements)

    def __hash__(self) -> int:
        return hash((self.ctx, frozenset(self.elements)))

    def with_element(self, x: QuadInt) -> PointSet:
        return PointSet(self.ctx, self.elements + (x,))

    def translate(self, shift: QuadInt) -> PointSet:
        return PointSet(self.ctx, tuple(x + shift for x in self.elements))

    def scale(self, factor: QuadInt) -> PointSet:
        return PointSet(self.ctx, tuple(x * factor for x in self.elements))

    def canonical(self) -> PointSet:
        """The same set sorted by (a, b)"""
        return PointSet(self.ctx, tuple(sorted(self.elements, key=QuadInt.coordinates)))

    def coordinates(self) -> list[tuple[int, int]]:
        return [x.coordinates() for x in self.elements]

    def differences(self) -> list[QuadInt]:
        """s_i - s_j for every i < j"""
        elements = self.elements
        return [elements[i] - elements[j]
                for i in range(len(elements)) for j in range(i + 1, len(elements))]

    def __repr__(self) -> str:
        return f"PointSet({self.ctx.label!r}, [{', '.join(str(x) for x in self.elements)}])"


@dataclass(frozen=True)
class UniversalityFailure:
    """One reason a set is not n-universal.

    Attributes
    ----------
    prime : PrimeIdeal or None
        The prime at which the set fails, None if it could not be named
    level : int or None
        The first k where the set's P-ordering invariants exceed the ring's
    cofactor : int or None
        An unfactored rational cofactor divisible by the unnamed prime
    reason : str
        Human readable explanation
    """
    prime: Optional[PrimeIdeal]
    level: Optional[int]
    cofactor: Optional[int] = None
    reason: str = ""


@dataclass
class UniversalityReport:
    """The outcome of an n-universality check.

    Attributes
    ----------
    verdict : bool
        True iff `failures` is empty
    size : int
        Number of elements of the set
    degree : int
        The n that was checked
    relevant_primes : list of PrimeIdeal
        The primes dividing Vol(S) that were examined, sorted by norm
    failures : list of UniversalityFailure
        Every prime at which the set fails
    skipped : str
        The reduction that justified not examining the other primes
    """
    verdict: bool
    size: int
    degree: int
    relevant_primes: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    skipped: str = ""


def _as_point_set(elements: Iterable[QuadInt]) -> PointSet:
    if isinstance(elements, PointSet):
        return elements
    return PointSet.of(elements)


def volume(elements: Iterable[QuadInt], bound: int = DEFAULT_FACTOR_BOUND) -> tuple[QuadInt, FactoredIdeal]:
    """
    The volume prod_{s != s'} (s - s') of a set, with its factorization.

    Parameters
    ----------
    elements
        The set
    bound
        Trial division bound used to factor the differences

    Returns
    -------
    The volume as an element and as a factored ideal. Sets with fewer than
    two elements have volume 1 and the unit ideal.
    """
    points = _as_point_set(elements)
    ctx = points.ctx
    if len(points) < 2:
        return ctx.one(), FactoredIdeal.unit()
    differences = points.differences()
    product = ctx.one()
    factored = FactoredIdeal.unit()
    for difference in differences:
        product = product * difference
        factored = factored * factor_element(difference, bound)
    sign = -1 if len(differences) % 2 else 1
    return sign * product * product, factored ** 2


def is_aud(elements: Iterable[QuadInt], prime: PrimeIdeal, k: int) -> bool:
    """
    Whether a set is almost uniformly distributed modulo P^k.

    Class counts are taken over all N(P)^k classes, empty ones included, so a
    set smaller than N(P)^k is almost uniformly distributed iff its elements
    are pairwise incongruent.

    Parameters
    ----------
    elements
        The set
    prime
        The prime ideal
    k
        A positive exponent
    """
    lattice = ideal_power_lattice(prime, k)
    counts = Counter(lattice.reduce(x) for x in elements)
    if not counts:
        return True
    largest = max(counts.values())
    if len(counts) < lattice.determinant:
        return largest <= 1
    return largest - min(counts.values()) <= 1


def aud_subset_exists(elements: Iterable[QuadInt], prime: PrimeIdeal, n: int, max_size: int = 10) -> bool:
    """
    Brute-force search for n + 1 elements almost uniformly distributed
    modulo every power of P.

    Exponential; used to cross-check `set_invariants_match_ring`.

    Raises
    ------
    ValueError
        If the set has more than `max_size` elements
    """
    points = list(elements)
    if len(points) > max_size:
        raise ValueError(f"subset search is limited to {max_size} elements, got {len(points)}")
    if len(points) < n + 1:
        return False
    top = stabilization_level(prime, n + 1)
    return any(all(is_aud(subset, prime, level) for level in range(1, top + 1))
               for subset in itertools.combinations(points, n + 1))


def _count_classes(size: int, pairs: Iterable[tuple[int, int]]) -> int:
    parent = list(range(size))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    classes = size
    for i, j in pairs:
        root_i, root_j = find(i), find(j)
        if root_i != root_j:
            parent[root_i] = root_j
            classes -= 1
    return classes


def is_n_universal(elements: Iterable[QuadInt], n: int, scan_bound: int = DEFAULT_SCAN_BOUND,
                   factor_bound: int = DEFAULT_FACTOR_BOUND) -> UniversalityReport:
    """
    Decide whether a finite set is n-universal.

    Parameters
    ----------
    elements
        The set
    n
        The degree, n >= 0
    scan_bound
        Rational primes up to this bound (and up to n + 1) are found by trial
        division of the difference norms
    factor_bound
        Trial division bound for the cofactors that have to be factored

    Returns
    -------
    The verdict with the examined primes and every failure found

    Raises
    ------
    ValueError
        If `n` is negative
    FactorBoundError
        If a cofactor that must be factored has no prime factor below
        `factor_bound` and is not prime
    """
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    points = _as_point_set(elements)
    size = len(points)
    if size < n + 1:
        failure = UniversalityFailure(None, size, reason=f"only {size} elements, at least {n + 1} needed")
        return UniversalityReport(False, size, n, failures=[failure])
    if n == 0:
        return UniversalityReport(True, size, n, skipped="every nonempty set is 0-universal")

    bound = max(scan_bound, n + 1)
    members = points.elements
    index_pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    differences = [members[i] - members[j] for i, j in index_pairs]
    norms = [abs(d.norm()) for d in differences]

    dividing: dict[int, list[int]] = {}
    cofactors = []
    for index, norm in enumerate(norms):
        found, cofactor = split_smooth(norm, bound)
        for q in found:
            dividing.setdefault(q, []).append(index)
        cofactors.append(cofactor)

    skipped = [f"primes not dividing Vol(S) skipped; rational primes up to {bound} found by trial division"]
    failures = []
    large = [(index, c) for index, c in enumerate(cofactors) if c > 1]
    extra_primes = set()
    if large and size == n + 1:
        for index, cofactor in large:
            try:
                extra_primes.update(factor_integer(cofactor, factor_bound))
            except FactorBoundError:
                i, j = index_pairs[index]
                failures.append(UniversalityFailure(
                    None, None, cofactor,
                    f"s{i} - s{j} is divisible by a prime above {bound} that could not be named"))
    elif large:
        for (index, cofactor), shared in zip(large, batch_gcd([c for _, c in large])):
            if shared > 1:
                extra_primes.update(factor_integer(shared, factor_bound))
        skipped.append(f"{len(large)} differences carry primes above {bound}; "
                       f"those dividing a single difference cannot break universality with "
                       f"{size} >= n + 2 elements")
    for q in extra_primes:
        if q not in dividing:
            dividing[q] = [index for index, norm in enumerate(norms) if norm % q == 0]

    relevant = []
    for q in sorted(dividing):
        for prime, _ in factor_rational_prime(points.ctx, q):
            hits = [index_pairs[index] for index in dividing[q]
                    if valuation(differences[index], prime) > 0]
            if not hits:
                continue
            relevant.append(prime)
            if prime.residue_norm >= n + 1:
                classes = _count_classes(size, hits)
                if classes < n + 1:
                    failures.append(UniversalityFailure(
                        prime, classes, reason=f"only {classes} classes modulo {prime.label}"))
            else:
                level = first_divergence(members, prime, n)
                if level is not None:
                    failures.append(UniversalityFailure(
                        prime, level, reason=f"P-ordering invariants exceed the ring's at k = {level}"))

    relevant.sort(key=PrimeIdeal.sort_key)
    failures.sort(key=lambda f: (f.prime is None, f.prime.sort_key() if f.prime else ()))
    logger.debug("Checked %d-universality of %d elements: %d relevant primes, %d failures",
                 n, size, len(relevant), len(failures))
    return UniversalityReport(not failures, size, n, relevant, failures, "; ".join(skipped))


def is_n_optimal(elements: Iterable[QuadInt], factor_bound: int = DEFAULT_FACTOR_BOUND) -> bool:
    """
    Whether an (n+1)-element set is n-optimal.

    Both characterizations are computed: n-universality of the set itself, and
    Vol(S) = (prod_{i<=n} i!_K)^2 as factored ideals.

    Raises
    ------
    IntegrityError
        If the two characterizations disagree
    """
    points = _as_point_set(elements)
    if not len(points):
        return False
    n = len(points) - 1
    universal = is_n_universal(points, n, factor_bound=factor_bound).verdict
    _, factored = volume(points, factor_bound)
    matches = factored == factorial_product(points.ctx, n) ** 2
    if universal != matches:
        raise IntegrityError(f"universality ({universal}) and volume ({matches}) disagree on {points}")
    return universal


@lru_cache(maxsize=8192)
def _prefix_universal(ctx: FieldCtx, prefix: frozenset, m: int) -> bool:
    return is_n_universal(PointSet(ctx, tuple(prefix)), m).verdict


def newton_prefix_length(sequence: Sequence[QuadInt]) -> int:
    """
    Length (in the sense s_0, ..., s_m has length m) of the longest Newton
    prefix, -1 for an empty sequence or when no prefix qualifies.

    Raises
    ------
    ValueError
        On duplicate entries
    """
    points = PointSet.of(sequence) if sequence else None
    if points is None:
        return -1
    length = -1
    for m in range(len(points)):
        if not _prefix_universal(points.ctx, frozenset(points.elements[:m + 1]), m):
            break
        length = m
    return length


def is_newton_sequence(sequence: Sequence[QuadInt]) -> bool:
    """
    Whether every prefix s_0, ..., s_m is m-universal.

    Raises
    ------
    ValueError
        On duplicate entries
    """
    return newton_prefix_length(sequence) == len(sequence) - 1
