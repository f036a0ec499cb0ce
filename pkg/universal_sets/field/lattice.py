"""
Ideals of O_K as sublattices of Z^2, and Chinese remaindering across them.

An element a + b*w is the integer column (a, b). A lattice is kept in column
Hermite normal form [[h11, h12], [0, h22]] with 0 <= h12 < h11, which makes
the box 0 <= a < h11, 0 <= b < h22 a fundamental domain. The rational field
uses the 1x1 form [[h]].
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

from .primes import PrimeIdeal, SplitKind, valuation
from .quadratic import FieldCtx, QuadInt
from ..exceptions import BudgetExceededError, IntegrityError

logger = logging.getLogger(__name__)

DEFAULT_RESIDUE_GUARD = 10 ** 6

Column = Tuple[int, int]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """
    Extended Euclid.

    Returns
    -------
    (g, x, y) with g = gcd(a, b) >= 0 and a*x + b*y = g
    """
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


@dataclass
class _TrackedColumn:
    """A lattice vector together with its coefficients over the input columns"""
    vector: Column
    coefficients: list[int]

    def combine(self, x: int, other: _TrackedColumn, y: int) -> _TrackedColumn:
        return _TrackedColumn((x * self.vector[0] + y * other.vector[0],
                               x * self.vector[1] + y * other.vector[1]),
                              [x * c + y * d for c, d in zip(self.coefficients, other.coefficients)])

    def negate(self) -> _TrackedColumn:
        return self.combine(-1, self, 0)


def _hnf_tracked(columns: Sequence[Column]) -> tuple[_TrackedColumn, _TrackedColumn]:
    """Column HNF of a full-rank set of integer 2-vectors.

    Returns the two HNF columns (h11, 0) and (h12, h22), each with the integer
    combination of the inputs that produces it.
    """
    pivot = None
    horizontal = None
    size = len(columns)
    for index, vector in enumerate(columns):
        column = _TrackedColumn(tuple(vector), [int(i == index) for i in range(size)])
        if column.vector[1] != 0:
            if pivot is None:
                pivot = column
                continue
            g, x, y = xgcd(pivot.vector[1], column.vector[1])
            merged = pivot.combine(x, column, y)
            column = pivot.combine(column.vector[1] // g, column, -(pivot.vector[1] // g))
            pivot = merged
        if column.vector[0] == 0:
            continue
        if horizontal is None:
            horizontal = column
            continue
        g, x, y = xgcd(horizontal.vector[0], column.vector[0])
        horizontal = horizontal.combine(x, column, y)

    if pivot is None or horizontal is None:
        raise ValueError("columns do not span a full-rank lattice")
    if pivot.vector[1] < 0:
        pivot = pivot.negate()
    if horizontal.vector[0] < 0:
        horizontal = horizontal.negate()
    shift = pivot.vector[0] // horizontal.vector[0]
    pivot = pivot.combine(1, horizontal, -shift)
    return horizontal, pivot


def hnf(columns: Sequence[Column]) -> tuple[Column, Column]:
    """
    Column Hermite normal form of the lattice spanned by `columns`.

    Returns
    -------
    The rows ((h11, h12), (0, h22)) with h11, h22 > 0 and 0 <= h12 < h11

    Raises
    ------
    ValueError
        If the columns do not span a rank 2 lattice
    """
    first, second = _hnf_tracked(columns)
    return (first.vector[0], second.vector[0]), (0, second.vector[1])


@dataclass(frozen=True)
class IdealLattice:
    """An ideal of O_K in Hermite normal form.

    Attributes
    ----------
    ctx : FieldCtx
        The field
    basis : tuple
        ((h11, h12), (0, h22)) for quadratic fields, ((h,),) for Q
    source : tuple
        The (prime, exponent) pairs whose product is this ideal
    """
    ctx: FieldCtx
    basis: tuple
    source: tuple

    @property
    def determinant(self) -> int:
        if self.ctx.is_rational:
            return self.basis[0][0]
        return self.basis[0][0] * self.basis[1][1]

    def columns(self) -> list[QuadInt]:
        """The basis columns read as elements"""
        if self.ctx.is_rational:
            return [QuadInt(self.basis[0][0], 0, self.ctx)]
        (h11, h12), (_, h22) = self.basis
        return [QuadInt(h11, 0, self.ctx), QuadInt(h12, h22, self.ctx)]

    def reduce(self, x: QuadInt) -> QuadInt:
        """The representative of x + I in the fundamental domain"""
        if x.ctx != self.ctx:
            raise ValueError(f"cannot reduce an element of {x.ctx} modulo an ideal of {self.ctx}")
        if self.ctx.is_rational:
            return QuadInt(x.a % self.basis[0][0], 0, self.ctx)
        (h11, h12), (_, h22) = self.basis
        y, b = divmod(x.b, h22)
        return QuadInt((x.a - y * h12) % h11, b, self.ctx)

    def contains(self, x: QuadInt) -> bool:
        return not self.reduce(x)

    def to_json(self) -> list[list[int]]:
        return [list(row) for row in self.basis]


def _from_generators(ctx: FieldCtx, generators: Sequence[QuadInt], source: tuple) -> IdealLattice:
    """HNF of the ideal generated by `generators` (as an ideal, not a Z-module)"""
    if ctx.is_rational:
        h = 0
        for g in generators:
            h = xgcd(h, g.a)[0]
        return IdealLattice(ctx, ((h,),), source)
    w = ctx.omega()
    columns = []
    for g in generators:
        columns.append(g.coordinates())
        columns.append((g * w).coordinates())
    return IdealLattice(ctx, hnf(columns), source)


@lru_cache(maxsize=4096)
def ideal_power_lattice(prime: PrimeIdeal, k: int) -> IdealLattice:
    """
    The lattice of P^k.

    Parameters
    ----------
    prime
        The prime ideal
    k
        A positive exponent

    Returns
    -------
    P^k in Hermite normal form

    Raises
    ------
    ValueError
        If `k` < 1
    IntegrityError
        If the determinant does not equal N(P)^k
    """
    if k < 1:
        raise ValueError(f"exponent must be >= 1, got {k}")
    ctx = prime.ctx
    if prime.kind in (SplitKind.RATIONAL, SplitKind.INERT):
        generators = [ctx.element(prime.p ** k)]
    else:
        uniformizer = ctx.element(-prime.local_root, 1)
        generators = [prime.p ** i * uniformizer ** (k - i) for i in range(k + 1)]

    lattice = _from_generators(ctx, generators, ((prime, k),))
    if lattice.determinant != prime.residue_norm ** k:
        raise IntegrityError(f"lattice of {prime.label}^{k} has determinant {lattice.determinant}")
    return lattice


def product_lattice(lattices: Sequence[IdealLattice]) -> IdealLattice:
    """
    The product of ideals given as lattices.

    Parameters
    ----------
    lattices
        At least one lattice, all in the same field

    Returns
    -------
    The lattice of the product ideal, its source the concatenated sources
    """
    if not lattices:
        raise ValueError("product of an empty list of ideals")
    result = lattices[0]
    for other in lattices[1:]:
        if other.ctx != result.ctx:
            raise ValueError(f"mixed fields: {result.ctx} and {other.ctx}")
        products = [x * y for x in result.columns() for y in other.columns()]
        result = _from_generators(result.ctx, products, result.source + other.source)
    return result


def _split_one(first: IdealLattice, second: IdealLattice) -> QuadInt:
    """An element e of `first` with 1 - e in `second`, for coprime ideals"""
    ctx = first.ctx
    if ctx.is_rational:
        h1, h2 = first.basis[0][0], second.basis[0][0]
        g, x, _ = xgcd(h1, h2)
        if g != 1:
            raise ValueError(f"ideals ({h1}) and ({h2}) are not coprime")
        return ctx.element(x * h1)

    first_columns = first.columns()
    stacked = [c.coordinates() for c in first_columns] + [c.coordinates() for c in second.columns()]
    horizontal, pivot = _hnf_tracked(stacked)
    if horizontal.vector[0] != 1 or pivot.vector[1] != 1:
        raise ValueError(f"ideals with sources {first.source} and {second.source} are not coprime")
    # the sum lattice is Z^2, so (1, 0) is the first HNF column
    coefficients = horizontal.coefficients
    element = ctx.zero()
    for c, column in zip(coefficients[:2], first_columns):
        element = element + c * column
    return element


def crt_solve(congruences: Sequence[tuple[QuadInt, PrimeIdeal, int]]) -> QuadInt:
    """
    Solve x = target_i (mod P_i^k_i) simultaneously.

    Parameters
    ----------
    congruences
        (target, prime, exponent) triples with pairwise distinct primes

    Returns
    -------
    A solution reduced into the fundamental domain of the product lattice

    Raises
    ------
    ValueError
        If the list is empty, mixes fields, or repeats a prime
    IntegrityError
        If the returned value fails one of the congruences
    """
    if not congruences:
        raise ValueError("no congruences to solve")
    seen = set()
    for target, prime, _ in congruences:
        if prime in seen:
            raise ValueError(f"moduli are not coprime: {prime.label} appears twice")
        if target.ctx != prime.ctx:
            raise ValueError(f"target {target} is not in the field of {prime.label}")
        seen.add(prime)

    target, prime, k = congruences[0]
    modulus = ideal_power_lattice(prime, k)
    solution = modulus.reduce(target)
    for target, prime, k in congruences[1:]:
        lattice = ideal_power_lattice(prime, k)
        idempotent = _split_one(modulus, lattice)
        # e vanishes mod the old modulus and is 1 mod the new one
        solution = solution + (target - solution) * idempotent
        modulus = product_lattice([modulus, lattice])
        solution = modulus.reduce(solution)

    for target, prime, k in congruences:
        difference = solution - target
        if difference and valuation(difference, prime) < k:
            raise IntegrityError(f"CRT solution {solution} misses {target} mod {prime.label}^{k}")
    logger.debug("Solved %d congruences, modulus determinant has %d bits",
                 len(congruences), modulus.determinant.bit_length())
    return solution


def residues(prime: PrimeIdeal, k: int, guard: int = DEFAULT_RESIDUE_GUARD) -> list[QuadInt]:
    """
    A complete residue system of O_K / P^k, in canonical order.

    Parameters
    ----------
    prime
        The prime ideal
    k
        A positive exponent
    guard
        Largest number of residues allowed

    Returns
    -------
    N(P)^k pairwise incongruent representatives from the fundamental domain

    Raises
    ------
    BudgetExceededError
        If N(P)^k exceeds `guard`
    """
    count = prime.residue_norm ** k
    if count > guard:
        raise BudgetExceededError("residue_guard", count, f"O_K / {prime.label}^{k}")
    lattice = ideal_power_lattice(prime, k)
    ctx = prime.ctx
    if ctx.is_rational:
        reps = [ctx.element(a) for a in range(lattice.basis[0][0])]
    else:
        (h11, _), (_, h22) = lattice.basis
        reps = [ctx.element(a, b) for a in range(h11) for b in range(h22)]
    return sorted(reps, key=QuadInt.canonical_key)
