"""
Collapsing of planar lattice sets toward an axis line.

In a rectangular lattice (imaginary quadratic fields with d = 2, 3 mod 4, where
1 and w are orthogonal) a point a + b*w sits in column a and row b. Collapsing
along a horizontal line moves the points of every column onto consecutive rows
packed around that line, alternating above and below it; collapsing along a
vertical line does the same within every row. Line counts are preserved and
the norm of the volume never increases.
"""
from __future__ import annotations

import logging
from collections import Counter, defaultdict
from enum import Enum
from typing import Iterable, Optional

from ..field.quadratic import QuadInt
from ..ordering.universality import PointSet

logger = logging.getLogger(__name__)


class Axis(Enum):
    """Direction of the axis line a set is collapsed onto.

    HORIZONTAL collapses onto a row, moving points vertically within their
    columns. VERTICAL collapses onto a column, moving points within rows.
    """
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


def _packed_offsets(count: int, upward: bool) -> list[int]:
    """0, +1, -1, +2, -2, ... (signs flipped when not `upward`)"""
    sign = 1 if upward else -1
    offsets = []
    for i in range(count):
        step = (i + 1) // 2
        offsets.append(sign * step if i % 2 else -sign * step)
    return offsets


def _split(point: QuadInt, axis: Axis) -> tuple[int, int]:
    """(line coordinate, position along the line) for the given axis"""
    a, b = point.coordinates()
    return (b, a) if axis is Axis.HORIZONTAL else (a, b)


def densest_line(points: Iterable[QuadInt], axis: Axis) -> int:
    """The most populated row (or column), smallest coordinate on ties"""
    counts = Counter(_split(x, axis)[0] for x in points)
    if not counts:
        raise ValueError("cannot collapse an empty set")
    most = max(counts.values())
    return min(line for line, count in counts.items() if count == most)


def _require_rectangular(points: PointSet):
    if not points.ctx.is_rectangular:
        raise ValueError(f"collapsing needs a rectangular lattice; {points.ctx} is not one")


def collapse_axis(points: PointSet, axis: Axis, line: Optional[int] = None,
                  upward: bool = True) -> PointSet:
    """
    Collapse a set onto an axis line.

    Parameters
    ----------
    points
        A finite set in a rectangular imaginary quadratic field
    axis
        Whether the axis line is a row or a column
    line
        Coordinate of the axis line; the densest row or column by default
    upward
        Fill the side of larger coordinates first

    Returns
    -------
    The collapsed set, ordered by (a, b)

    Raises
    ------
    ValueError
        If the field's lattice is not rectangular or the set is empty
    """
    _require_rectangular(points)
    if line is None:
        line = densest_line(points, axis)
    ctx = points.ctx
    per_line = defaultdict(int)
    for x in points:
        _, position = _split(x, axis)
        per_line[position] += 1

    collapsed = []
    for position, count in per_line.items():
        for offset in _packed_offsets(count, upward):
            if axis is Axis.HORIZONTAL:
                collapsed.append(ctx.element(position, line + offset))
            else:
                collapsed.append(ctx.element(line + offset, position))
    return PointSet(ctx, tuple(sorted(collapsed, key=QuadInt.coordinates)))


def is_collapsed(points: PointSet, axis: Axis) -> bool:
    """Whether collapsing about one of the densest lines leaves the set unchanged"""
    _require_rectangular(points)
    if not len(points):
        return True
    counts = Counter(_split(x, axis)[0] for x in points)
    most = max(counts.values())
    return any(collapse_axis(points, axis, line, upward) == points
               for line, count in counts.items() if count == most
               for upward in (True, False))


def collapse_both(points: PointSet) -> PointSet:
    """Collapse onto a row and then onto a column"""
    return collapse_axis(collapse_axis(points, Axis.HORIZONTAL), Axis.VERTICAL)
