"""
Exhaustive search for n-optimal sets inside a box of the lattice O_K.

Candidate points are a + b*w with 0 <= a < width and 0 <= b < height. Every
set is only enumerated in the translate that touches the left and bottom edges
of the box, so the search covers each translation class of sets fitting the
box exactly once. A complete candidate is certified by comparing its volume
with (prod_{i<=n} i!_K)^2: first by norm, then as factored ideals.

Finding no set shows only that no n-optimal set fits the box; the result is
flagged as box-relative in that case.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Sequence

from .pruners import AbstractPruner, CollapsePruner, NormDivisibilityPruner, ValuationPruner
from ..exceptions import BudgetExceededError
from ..field.primes import DEFAULT_FACTOR_BOUND
from ..field.quadratic import FieldCtx, QuadInt
from ..ordering.factorials import factorial_product
from ..ordering.universality import PointSet, is_n_optimal

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 5 * 10 ** 7

DEFAULT_JUSTIFICATION = ("an optimal set with at most 9 elements in Z[i] is pairwise incongruent "
                         "modulo the inert prime 3, and collapsing onto a row and a column keeps it "
                         "optimal, so at most 3 points share a row or column and a 3x3 translate "
                         "holds a representative; 7x7 covers it with margin")

_BOX_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


@dataclass(frozen=True)
class SearchBox:
    """The window of lattice points a + b*w searched.

    Attributes
    ----------
    width : int
        Number of columns, 0 <= a < width
    height : int
        Number of rows, 0 <= b < height
    justification : str
        Why the box is large enough for the question asked
    """
    width: int
    height: int
    justification: str = ""

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"box dimensions must be positive, got {self.width}x{self.height}")

    @classmethod
    def parse(cls, text: str, justification: str = "") -> SearchBox:
        """Parse ``"WxH"``"""
        match = _BOX_PATTERN.match(text)
        if not match:
            raise ValueError(f"cannot parse box {text!r}; expected WxH such as 7x7")
        return cls(int(match.group(1)), int(match.group(2)), justification)

    @property
    def label(self) -> str:
        return f"{self.width}x{self.height}"

    def points(self, ctx: FieldCtx) -> list[QuadInt]:
        """Every candidate point, sorted by (a, b)"""
        return [ctx.element(a, b) for a in range(self.width) for b in range(self.height)]


@dataclass
class SearchResult:
    """Outcome of `search_optimal`.

    Attributes
    ----------
    sets : list of PointSet
        The optimal sets found, each translated so its smallest element under
        (a, b) is 0, sorted and free of duplicates
    nodes : int
        Search nodes visited
    box : SearchBox
        The box searched
    n : int
        The degree
    box_relative : bool
        True when the verdict only holds for sets fitting the box, which is
        the case for an empty result
    collapsed_only : bool
        True when only sets collapsed along both axes were kept, one
        representative per collapsing class
    symmetry : list of str
        The symmetries quotiented out of `sets`: "translation", and
        "units" or "conjugation" when requested
    """
    sets: list
    nodes: int
    box: SearchBox
    n: int
    box_relative: bool = False
    collapsed_only: bool = False
    symmetry: list = field(default_factory=lambda: ["translation"])


def canonical_form(points: PointSet, units: bool = False, conj: bool = False) -> PointSet:
    """
    The representative of a set under translation, optionally also under
    multiplication by roots of unity and conjugation.

    The representative is the image, translated so that its smallest element
    under (a, b) is 0, with the smallest sorted coordinate list.
    """
    ctx = points.ctx
    images = [points]
    if units:
        images = [image.scale(u) for image in images for u in ctx.roots_of_unity()]
    if conj:
        images = images + [PointSet(ctx, tuple(x.conj() for x in image)) for image in images]

    def normalized(image: PointSet) -> tuple:
        low = min(image, key=QuadInt.coordinates)
        return tuple(sorted((x - low).coordinates() for x in image))

    best = min(normalized(image) for image in images)
    return PointSet.from_coordinates(ctx, best)


class _Search:
    """Depth-first enumeration of the normalized subsets of a box"""
    def __init__(self, ctx: FieldCtx, n: int, points: list[QuadInt], pruners: Sequence[AbstractPruner],
                 target_norm: int, budget: int, factor_bound: int):
        self.ctx = ctx
        self.n = n
        self.points = points
        self.pruners = list(pruners)
        self.target_norm = target_norm
        self.budget = budget
        self.factor_bound = factor_bound
        self.nodes = 0
        self.found: list[PointSet] = []

    def run_stratum(self, first: int):
        states = [pruner.initial() for pruner in self.pruners]
        self._visit(first, [], states)

    def _visit(self, index: int, chosen: list[QuadInt], states: list):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceededError("budget", self.nodes, f"searching {self.n}-optimal sets in {self.ctx}")
        point = self.points[index]
        differences = [point - x for x in chosen]
        extended = []
        for pruner, state in zip(self.pruners, states):
            state = pruner.extend(state, differences)
            if state is None:
                return
            extended.append(state)
        chosen = chosen + [point]

        if len(chosen) == self.n + 1:
            self._leaf(chosen)
            return
        remaining = self.n + 1 - len(chosen)
        for following in range(index + 1, len(self.points) - remaining + 1):
            self._visit(following, chosen, extended)

    def _leaf(self, chosen: list[QuadInt]):
        if min(x.b for x in chosen) != 0:
            return
        candidate = PointSet(self.ctx, tuple(chosen))
        norm = 1
        for d in candidate.differences():
            norm *= d.norm() ** 2
        if abs(norm) != self.target_norm:
            return
        if not all(pruner.accepts_complete(candidate) for pruner in self.pruners):
            return
        if is_n_optimal(candidate, self.factor_bound):
            self.found.append(candidate)


def search_optimal(ctx: FieldCtx, n: int, box: SearchBox, prune: bool = True,
                   budget: int = DEFAULT_BUDGET, collapsed_only: bool = False,
                   units: bool = False, conj: bool = False,
                   factor_bound: int = DEFAULT_FACTOR_BOUND) -> SearchResult:
    """
    Find every n-optimal set fitting a box, up to translation.

    Parameters
    ----------
    ctx
        An imaginary quadratic field
    n
        The degree; sets have n + 1 elements
    box
        The window searched
    prune
        Cut partial sets by valuation and norm divisibility. The result is
        the same as without pruning.
    budget
        Largest number of search nodes visited. Without pruning the number of
        (n+1)-subsets of the box must not exceed it either.
    collapsed_only
        Keep only sets collapsed along both axes (rectangular lattices only).
        An optimal set fits the box iff a collapsed one does, so this settles
        existence with fewer results.
    units, conj
        Also identify sets related by roots of unity or by conjugation

    Returns
    -------
    The sets found and the search statistics

    Raises
    ------
    ValueError
        If the field is not imaginary quadratic, `n` is negative, or
        `collapsed_only` is requested on a non-rectangular lattice
    BudgetExceededError
        If the work budget is exceeded
    """
    if ctx.is_rational or ctx.is_totally_real:
        raise ValueError(f"optimal set search needs an imaginary quadratic field, got {ctx}")
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    if collapsed_only and not ctx.is_rectangular:
        raise ValueError(f"collapsed-only search needs a rectangular lattice; {ctx} is not one")
    points = box.points(ctx)
    size = n + 1
    if size > len(points):
        return _finish(ctx, n, box, [], 0, collapsed_only, units, conj)
    if not prune:
        subsets = math.comb(len(points), size)
        if subsets > budget:
            raise BudgetExceededError("budget", subsets,
                                      f"{size}-subsets of a {box.label} box without pruning")

    target = factorial_product(ctx, n) ** 2
    pruners: list[AbstractPruner] = []
    if prune:
        pruners = [NormDivisibilityPruner(target.norm()), ValuationPruner.for_degree(ctx, n, target)]
    if collapsed_only:
        pruners.append(CollapsePruner())

    search = _Search(ctx, n, points, pruners, target.norm(), budget, factor_bound)
    for first, point in enumerate(points):
        if point.a != 0:
            break
        before = search.nodes
        search.run_stratum(first)
        logger.info("Stratum starting at %s: %d nodes, %d sets so far",
                    point, search.nodes - before, len(search.found))
    return _finish(ctx, n, box, search.found, search.nodes, collapsed_only, units, conj)


def _finish(ctx: FieldCtx, n: int, box: SearchBox, found: list[PointSet], nodes: int,
            collapsed_only: bool, units: bool, conj: bool) -> SearchResult:
    unique = {}
    for candidate in found:
        representative = canonical_form(candidate, units, conj)
        unique.setdefault(tuple(representative.coordinates()), representative)
    sets = [unique[key] for key in sorted(unique)]
    symmetry = ["translation"] + (["units"] if units else []) + (["conjugation"] if conj else [])
    if not sets:
        logger.warning("No %d-optimal set in %s fits the %s box under %s", n, ctx, box.label,
                       ", ".join(symmetry))
    logger.info("Search for %d-optimal sets in %s (%s): %d nodes, %d sets",
                n, ctx, box.label, nodes, len(sets))
    return SearchResult(sets, nodes, box, n, not sets, collapsed_only, symmetry)
