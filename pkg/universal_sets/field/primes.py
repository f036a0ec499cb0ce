"""
Prime ideals of O_K, valuations and factorization of principal ideals.

A prime ideal above a split or ramified p is stored as (p, w - r) where r is a
root of the minimal polynomial of w modulo p. Valuations at such primes are read
off from a + b*R where R is the Hensel lift of r, so no ideal membership tests
are needed. Rational integers are factored by trial division against a bound;
anything left that is not provably prime raises `FactorBoundError`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Optional

from sympy import isprime, legendre_symbol, perfect_power, primerange
from sympy.ntheory import multiplicity, sqrt_mod

from .quadratic import FieldCtx, QuadInt
from ..exceptions import FactorBoundError, IntegrityError

logger = logging.getLogger(__name__)

DEFAULT_FACTOR_BOUND = 10 ** 6


class SplitKind(Enum):
    """How a rational prime decomposes in O_K"""
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"
    RATIONAL = "rational"


_KIND_ORDER = {SplitKind.RATIONAL: 0, SplitKind.RAMIFIED: 1, SplitKind.SPLIT: 2, SplitKind.INERT: 3}


@dataclass(frozen=True)
class PrimeIdeal:
    """A nonzero prime ideal of O_K.

    Attributes
    ----------
    ctx : FieldCtx
        The field the ideal lives in
    p : int
        The rational prime below the ideal
    kind : SplitKind
        Decomposition type of `p`
    conjugate_index : int
        0 or 1; distinguishes the two primes above a split `p`, ordered by
        their local roots
    residue_norm : int
        N(P), the size of O_K / P
    local_root : int or None
        Root r of the minimal polynomial of w modulo p with P = (p, w - r);
        None for inert and rational primes
    """
    ctx: FieldCtx
    p: int
    kind: SplitKind
    conjugate_index: int
    residue_norm: int
    local_root: Optional[int]

    @property
    def ramification(self) -> int:
        return 2 if self.kind is SplitKind.RAMIFIED else 1

    @property
    def inertia(self) -> int:
        return 2 if self.kind is SplitKind.INERT else 1

    @property
    def label(self) -> str:
        if self.local_root is None:
            return f"({self.p})"
        if self.local_root == 0:
            return f"({self.p}, w)"
        return f"({self.p}, w-{self.local_root})"

    def sort_key(self) -> tuple[int, int, int, int]:
        return self.residue_norm, self.p, _KIND_ORDER[self.kind], self.conjugate_index

    def __lt__(self, other: PrimeIdeal) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return self.label


def _min_poly_mod(ctx: FieldCtx, x: int, modulus: int) -> int:
    return (x * x - ctx.omega_trace * x + ctx.omega_norm) % modulus


@lru_cache(maxsize=None)
def factor_rational_prime(ctx: FieldCtx, p: int) -> tuple[tuple[PrimeIdeal, int], ...]:
    """
    Decompose the rational prime `p` in O_K.

    Parameters
    ----------
    ctx
        The field
    p
        A rational prime

    Returns
    -------
    Pairs (prime ideal, ramification index): two split primes, one inert
    prime of norm p^2, or one ramified prime with index 2

    Raises
    ------
    ValueError
        If `p` is not prime
    """
    if not isinstance(p, int) or not isprime(p):
        raise ValueError(f"{p} is not a rational prime")

    if ctx.is_rational:
        return (PrimeIdeal(ctx, p, SplitKind.RATIONAL, 0, p, None), 1),

    disc = ctx.discriminant
    t = ctx.omega_trace
    if disc % p == 0:
        if p == 2:
            root = next(r for r in (0, 1) if _min_poly_mod(ctx, r, 2) == 0)
        else:
            root = t * pow(2, -1, p) % p
        if _min_poly_mod(ctx, root, p) != 0:
            raise IntegrityError(f"no double root of the minimal polynomial modulo {p}")
        return (PrimeIdeal(ctx, p, SplitKind.RAMIFIED, 0, p, root), 2),

    if p == 2:
        split = disc % 8 == 1
    else:
        split = legendre_symbol(disc % p, p) == 1

    if not split:
        return (PrimeIdeal(ctx, p, SplitKind.INERT, 0, p * p, None), 1),

    if p == 2:
        roots = [r for r in (0, 1) if _min_poly_mod(ctx, r, 2) == 0]
    else:
        half = pow(2, -1, p)
        roots = sorted({(t + s) * half % p for s in sqrt_mod(disc % p, p, all_roots=True)})
    if len(roots) != 2:
        raise IntegrityError(f"expected two roots modulo split prime {p}, found {roots}")
    return tuple((PrimeIdeal(ctx, p, SplitKind.SPLIT, i, p, r), 1) for i, r in enumerate(roots))


def conjugate_prime(prime: PrimeIdeal) -> PrimeIdeal:
    """The other prime above a split p; the prime itself otherwise"""
    if prime.kind is not SplitKind.SPLIT:
        return prime
    first, second = (q for q, _ in factor_rational_prime(prime.ctx, prime.p))
    return second if first == prime else first


@lru_cache(maxsize=4096)
def _hensel_root(ctx: FieldCtx, p: int, root: int, precision: int) -> int:
    """Lift a simple root of the minimal polynomial of w to p**precision"""
    lifted, reached = root, 1
    while reached < precision:
        reached = min(2 * reached, precision)
        modulus = p ** reached
        derivative = (2 * lifted - ctx.omega_trace) % modulus
        lifted = (lifted - _min_poly_mod(ctx, lifted, modulus) * pow(derivative, -1, modulus)) % modulus
    return lifted


def _split_valuation(x: QuadInt, p: int, root: int, cap: int) -> int:
    if cap == 0:
        return 0
    lifted = _hensel_root(x.ctx, p, root, cap)
    residue = (x.a + x.b * lifted) % p ** cap
    if residue == 0:
        return cap
    return multiplicity(p, residue)


def valuation(x: QuadInt, prime: PrimeIdeal) -> int:
    """
    The P-adic valuation of a nonzero element.

    Parameters
    ----------
    x
        A nonzero element of O_K
    prime
        The prime ideal

    Returns
    -------
    The exponent of `prime` in the factorization of (x)

    Raises
    ------
    ValueError
        If `x` is zero or belongs to another field
    IntegrityError
        If the inert norm valuation is odd or the valuations at two conjugate
        split primes do not add up to v_p(N(x))
    """
    if x.ctx != prime.ctx:
        raise ValueError(f"element of {x.ctx} cannot be valued at a prime of {prime.ctx}")
    if not x:
        raise ValueError("infinite valuation: the element is zero")

    p = prime.p
    if prime.kind is SplitKind.RATIONAL:
        return multiplicity(p, abs(x.a))

    norm_valuation = multiplicity(p, abs(x.norm()))
    if prime.kind is SplitKind.RAMIFIED:
        return norm_valuation
    if prime.kind is SplitKind.INERT:
        if norm_valuation % 2:
            raise IntegrityError(f"odd valuation {norm_valuation} of N({x}) at inert prime {p}")
        return norm_valuation // 2

    value = _split_valuation(x, p, prime.local_root, norm_valuation)
    other = conjugate_prime(prime)
    other_value = _split_valuation(x, p, other.local_root, norm_valuation)
    if value + other_value != norm_valuation:
        raise IntegrityError(f"split valuations {value} + {other_value} of {x} above {p} "
                             f"do not add up to {norm_valuation}")
    return value


@lru_cache(maxsize=64)
def _small_primes(bound: int) -> tuple[int, ...]:
    return tuple(primerange(2, bound + 1))


def split_smooth(n: int, bound: int) -> tuple[dict[int, int], int]:
    """
    Split a positive integer into identified prime factors and a cofactor.

    Trial division runs over the primes up to `bound`, stopping early once the
    remaining part is provably 1 or prime.

    Parameters
    ----------
    n
        A positive integer
    bound
        The trial division bound

    Returns
    -------
    The identified primes with their exponents, and the cofactor left over.
    Every prime factor of the cofactor exceeds `bound`.
    """
    if n < 1:
        raise ValueError(f"can only split positive integers, got {n}")
    factors = {}
    remaining = n
    for q in _small_primes(bound):
        if q * q > remaining:
            if remaining > 1:
                factors[remaining] = factors.get(remaining, 0) + 1
                remaining = 1
            break
        if remaining % q == 0:
            exponent = multiplicity(q, remaining)
            factors[q] = exponent
            remaining //= q ** exponent
    return factors, remaining


def factor_integer(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> dict[int, int]:
    """
    Fully factor a positive integer by trial division.

    Parameters
    ----------
    n
        A positive integer
    bound
        Trial division bound

    Returns
    -------
    Map of prime to exponent

    Raises
    ------
    FactorBoundError
        If a cofactor above the bound is neither a prime nor a prime power
    """
    factors, cofactor = split_smooth(n, bound)
    if cofactor > 1:
        if isprime(cofactor):
            factors[cofactor] = 1
        else:
            power = perfect_power(cofactor)
            if power and isprime(power[0]):
                factors[power[0]] = power[1]
            else:
                raise FactorBoundError(cofactor, bound)
    return dict(sorted(factors.items()))


def batch_gcd(values: list[int]) -> list[int]:
    """
    For each value, its gcd with the product of all the other values.

    Uses a product tree and a remainder tree so the cost is quasi-linear in the
    total size of the inputs.

    Parameters
    ----------
    values
        Positive integers

    Returns
    -------
    gcd(values[i], prod_{j != i} values[j]) for every i
    """
    if not values:
        return []
    tree = [list(values)]
    while len(tree[-1]) > 1:
        level = tree[-1]
        tree.append([level[i] * level[i + 1] if i + 1 < len(level) else level[i]
                     for i in range(0, len(level), 2)])
    remainders = tree.pop()
    while tree:
        level = tree.pop()
        remainders = [remainders[i // 2] % (level[i] * level[i]) for i in range(len(level))]
    return [math.gcd(r // v, v) for r, v in zip(remainders, values)]


@dataclass(frozen=True, eq=False)
class FactoredIdeal:
    """An ideal of O_K as a finite product of prime ideal powers.

    Zero exponents are dropped on construction; the factors are kept sorted by
    norm then kind.

    Attributes
    ----------
    factors : Mapping[PrimeIdeal, int]
        Positive exponent of every prime dividing the ideal
    """
    factors: Mapping[PrimeIdeal, int] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for prime, exponent in self.factors.items():
            if exponent < 0:
                raise ValueError(f"negative exponent {exponent} at {prime}")
            if exponent:
                cleaned[prime] = exponent
        object.__setattr__(self, "factors", dict(sorted(cleaned.items(), key=lambda kv: kv[0].sort_key())))

    @classmethod
    def unit(cls) -> FactoredIdeal:
        return cls({})

    def exponent(self, prime: PrimeIdeal) -> int:
        return self.factors.get(prime, 0)

    def norm(self) -> int:
        result = 1
        for prime, exponent in self.factors.items():
            result *= prime.residue_norm ** exponent
        return result

    def log_norm(self) -> float:
        return math.fsum(exponent * math.log(prime.residue_norm)
                         for prime, exponent in self.factors.items())

    def primes(self) -> list[PrimeIdeal]:
        return list(self.factors)

    def __mul__(self, other: FactoredIdeal) -> FactoredIdeal:
        merged = dict(self.factors)
        for prime, exponent in other.factors.items():
            merged[prime] = merged.get(prime, 0) + exponent
        return FactoredIdeal(merged)

    def __pow__(self, k: int) -> FactoredIdeal:
        if k < 0:
            raise ValueError("only non-negative powers of ideals are supported")
        return FactoredIdeal({prime: exponent * k for prime, exponent in self.factors.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FactoredIdeal):
            return NotImplemented
        return self.factors == other.factors

    def __hash__(self) -> int:
        return hash(frozenset(self.factors.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{prime.label}^{exponent}" for prime, exponent in self.factors.items())
        return f"FactoredIdeal({body})"


def factor_element(x: QuadInt, bound: int = DEFAULT_FACTOR_BOUND) -> FactoredIdeal:
    """
    Factor the principal ideal (x).

    N(x) is factored over Z and each rational prime's exponent is distributed
    over the primes above it with `valuation`.

    Parameters
    ----------
    x
        A nonzero element
    bound
        Trial division bound for N(x)

    Returns
    -------
    The factorization of (x)

    Raises
    ------
    ValueError
        If `x` is zero
    FactorBoundError
        If N(x) cannot be fully factored below the bound
    IntegrityError
        If the distributed exponents do not account for the norm
    """
    if not x:
        raise ValueError("cannot factor the zero ideal")
    factors = {}
    for q, exponent in factor_integer(abs(x.norm()), bound).items():
        accounted = 0
        for prime, _ in factor_rational_prime(x.ctx, q):
            v = valuation(x, prime)
            if v:
                factors[prime] = v
                accounted += v * prime.inertia
        if accounted != exponent:
            raise IntegrityError(f"exponents above {q} account for {accounted} of {exponent} in N({x})")
    return FactoredIdeal(factors)


def primes_up_to_norm(ctx: FieldCtx, bound: int) -> Iterator[PrimeIdeal]:
    """
    Every prime ideal with N(P) <= `bound`, sorted by (norm, p, kind, index).

    Parameters
    ----------
    ctx
        The field
    bound
        Largest residue norm to include
    """
    found = []
    for p in _small_primes(bound) if bound >= 2 else ():
        for prime, _ in factor_rational_prime(ctx, p):
            if prime.residue_norm <= bound:
                found.append(prime)
    yield from sorted(found, key=PrimeIdeal.sort_key)


def primes_above(ctx: FieldCtx, rational_primes: Iterable[int]) -> list[PrimeIdeal]:
    """All prime ideals above the given rational primes, sorted"""
    found = [prime for p in rational_primes for prime, _ in factor_rational_prime(ctx, p)]
    return sorted(found, key=PrimeIdeal.sort_key)
