"""
Branch pruning rules for the optimal-set search.

Each pruner threads its own state down a branch of the search tree and cuts
the branch as soon as no completion of the partial set can reach the optimal
volume.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Any, Optional, Sequence

from sympy import primerange

from ..field.primes import FactoredIdeal, PrimeIdeal, primes_above, valuation
from ..field.quadratic import FieldCtx, QuadInt
from ..ordering.universality import PointSet
from .collapse import Axis, is_collapsed

logger = logging.getLogger(__name__)


class AbstractPruner(ABC):
    """Abstract class that decides which branches of the optimal-set search
    can be cut.

    A pruner carries its own state along each branch. The search starts from
    `initial()` and calls `extend` every time a point is appended; returning
    None cuts the branch.
    """
    def initial(self) -> Any:
        """State of the empty partial set"""
        return ()

    @abstractmethod
    def extend(self, state: Any, differences: Sequence[QuadInt]) -> Optional[Any]:
        """Account for a new point of the partial set

        Parameters
        ----------
        state
            The state of the partial set before the point was added
        differences
            The differences between the new point and every point already
            in the partial set

        Returns
        -------
        The new state, or None if no completion of the partial set can be
        optimal.
        """
        pass

    def accepts_complete(self, points: PointSet) -> bool:
        """Final filter applied to complete candidate sets"""
        return True


class ValuationPruner(AbstractPruner):
    """Cuts partial sets whose volume valuation at a small prime already
    exceeds the valuation of the optimal volume.

    Parameters
    ----------
    target
        The factored optimal volume (prod_{i<=n} i!_K)^2
    primes
        The primes to track

    Attributes
    ----------
    primes
        The primes tracked, in a fixed order
    ceilings
        Exponent of each tracked prime in `target`
    """
    def __init__(self, target: FactoredIdeal, primes: Sequence[PrimeIdeal]):
        self.primes = list(primes)
        self.ceilings = [target.exponent(prime) for prime in self.primes]
        logger.debug("Tracking valuations at %s with ceilings %s",
                     [prime.label for prime in self.primes], self.ceilings)

    @classmethod
    def for_degree(cls, ctx: FieldCtx, n: int, target: FactoredIdeal) -> ValuationPruner:
        """Track every prime above a rational prime up to n + 1"""
        return cls(target, primes_above(ctx, primerange(2, n + 2)))

    def initial(self) -> tuple[int, ...]:
        return (0,) * len(self.primes)

    def extend(self, state: tuple[int, ...], differences: Sequence[QuadInt]) -> Optional[tuple[int, ...]]:
        updated = []
        for prime, ceiling, current in zip(self.primes, self.ceilings, state):
            # ordered pairs: both s - s' and s' - s divide Vol(S)
            current += 2 * sum(valuation(d, prime) for d in differences)
            if current > ceiling:
                return None
            updated.append(current)
        return tuple(updated)


class NormDivisibilityPruner(AbstractPruner):
    """Cuts partial sets whose volume norm does not divide the optimal one.

    Parameters
    ----------
    target_norm
        |N((prod_{i<=n} i!_K)^2)|
    """
    def __init__(self, target_norm: int):
        if target_norm < 1:
            raise ValueError(f"target norm must be positive, got {target_norm}")
        self.target_norm = target_norm

    def initial(self) -> int:
        return 1

    def extend(self, state: int, differences: Sequence[QuadInt]) -> Optional[int]:
        for d in differences:
            state *= d.norm() ** 2
        state = abs(state)
        if self.target_norm % state:
            return None
        return state


class CollapsePruner(AbstractPruner):
    """Keeps only complete sets collapsed along both axes.

    Collapsing never increases the volume norm and optimal volumes are the
    smallest possible, so collapsing an optimal set first onto a row and then
    onto a column yields another optimal set that fits the same box. Searches
    with this pruner return one collapsed representative per such class
    rather than every optimal set.
    """
    def extend(self, state: Any, differences: Sequence[QuadInt]) -> Any:
        return state

    def accepts_complete(self, points: PointSet) -> bool:
        return is_collapsed(points, Axis.HORIZONTAL) and is_collapsed(points, Axis.VERTICAL)
