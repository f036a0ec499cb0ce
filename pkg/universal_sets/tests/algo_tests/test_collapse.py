import unittest

import numpy as np

from universal_sets.algo import Axis, collapse_axis, collapse_both, densest_line, is_collapsed
from universal_sets.field import make_field
from universal_sets.ordering import PointSet, is_n_optimal, volume

FIVE_OPTIMAL = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)]


def _volume_norm(points):
    return abs(volume(points)[0].norm())


def _random_sets(ctx, rng, count, size, span):
    for _ in range(count):
        picks = rng.choice(span * span, size=size, replace=False)
        yield PointSet.from_coordinates(ctx, [(int(k) // span, int(k) % span) for k in picks])


class TestCollapseGaussian(unittest.TestCase):

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.ctx = make_field(-1)

    def test_column_pair(self):
        """Test {0, 3i} collapsing to {0, i}"""
        points = PointSet.from_coordinates(self.ctx, [(0, 0), (0, 3)])
        collapsed = collapse_axis(points, Axis.HORIZONTAL)
        self.assertEqual(collapsed, PointSet.from_coordinates(self.ctx, [(0, 0), (0, 1)]))
        self.assertEqual(collapse_axis(points, Axis.HORIZONTAL, line=3, upward=False),
                         PointSet.from_coordinates(self.ctx, [(0, 3), (0, 2)]))

    def test_densest_line(self):
        """Test the densest row and column, smallest on ties"""
        points = PointSet.from_coordinates(self.ctx, [(0, 2), (1, 2), (5, 0), (5, 7)])
        self.assertEqual(densest_line(points, Axis.HORIZONTAL), 2)
        self.assertEqual(densest_line(points, Axis.VERTICAL), 5)
        self.assertEqual(densest_line(PointSet.from_coordinates(self.ctx, [(3, 4), (1, 9)]), Axis.VERTICAL), 1)
        with self.assertRaises(ValueError):
            densest_line([], Axis.VERTICAL)

    def test_line_counts_preserved(self):
        """Test that every column keeps its number of points"""
        rng = np.random.default_rng(5)
        for points in _random_sets(self.ctx, rng, 20, 7, 6):
            collapsed = collapse_axis(points, Axis.HORIZONTAL)
            self.assertEqual(len(collapsed), len(points))
            for column in range(6):
                self.assertEqual(sum(1 for x in points if x.a == column),
                                 sum(1 for x in collapsed if x.a == column))

    def test_collapsed_after_collapsing(self):
        """Test that a collapsed set is recognized as collapsed"""
        rng = np.random.default_rng(8)
        for points in _random_sets(self.ctx, rng, 20, 6, 5):
            for axis in Axis:
                self.assertTrue(is_collapsed(collapse_axis(points, axis), axis))
            both = collapse_both(points)
            self.assertTrue(is_collapsed(both, Axis.HORIZONTAL),
                            msg=f"collapsing {points} onto a column broke the row collapse")
            self.assertTrue(is_collapsed(both, Axis.VERTICAL))

    def test_volume_monotone(self):
        """Test that collapsing never increases the volume norm"""
        rng = np.random.default_rng(13)
        for points in _random_sets(self.ctx, rng, 30, 6, 6):
            before = _volume_norm(points)
            for axis in Axis:
                self.assertLessEqual(_volume_norm(collapse_axis(points, axis)), before,
                                     msg=f"collapsing {points} along {axis} increased the volume")
            self.assertLessEqual(_volume_norm(collapse_both(points)), before)

    def test_optimal_stays_optimal(self):
        """Test that the collapsed 5-optimal set is still optimal"""
        points = PointSet.from_coordinates(self.ctx, FIVE_OPTIMAL)
        self.assertTrue(is_n_optimal(collapse_both(points)))
        self.assertTrue(is_collapsed(points, Axis.HORIZONTAL))


class TestCollapseSqrtMinusTwo(TestCollapseGaussian):

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.ctx = make_field(-2)

    def test_optimal_stays_optimal(self):
        """Test that {0, 3} collapses onto the 1-optimal {0, 1}"""
        points = PointSet.from_coordinates(self.ctx, [(0, 0), (3, 0)])
        self.assertFalse(is_n_optimal(points))
        collapsed = collapse_both(points)
        self.assertEqual(collapsed, PointSet.from_coordinates(self.ctx, [(0, 0), (1, 0)]))
        self.assertTrue(is_n_optimal(collapsed))


class TestCollapseRequirements(unittest.TestCase):

    def test_not_rectangular(self):
        """Test that skew and real lattices are refused"""
        for d in (-3, 2):
            ctx = make_field(d)
            points = PointSet.from_coordinates(ctx, [(0, 0), (0, 2)])
            with self.assertRaises(ValueError, msg=f"{ctx} should be refused"):
                collapse_axis(points, Axis.HORIZONTAL)
            with self.assertRaises(ValueError):
                is_collapsed(points, Axis.VERTICAL)
