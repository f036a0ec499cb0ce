import math
import unittest
from dataclasses import replace

import numpy as np

from universal_sets.exceptions import BudgetExceededError
from universal_sets.field import make_field, primes_up_to_norm, valuation
from universal_sets.ordering import is_aud
from universal_sets.walk import (ScalingMode, WalkConfig, default_threshold, find_base_points,
                                 scaling_modulus, simulate, sweep_M, tail_fraction, walk_endpoints,
                                 walk_marginals, wilson_interval)


class TestScalingModulus(unittest.TestCase):

    def test_conductor(self):
        """Test that the modulus is divisible by every required prime power"""
        ctx = make_field(-1)
        self.assertEqual(scaling_modulus(ctx, 1, 5), 10)
        modulus = scaling_modulus(ctx, 4, 11)
        for prime in primes_up_to_norm(ctx, 11):
            self.assertGreaterEqual(valuation(ctx.element(modulus), prime), 1)
        self.assertEqual(modulus % 8, 0, msg="five points need level 3 at the prime above 2")

    def test_factorial(self):
        """Test the L! mode and its limit"""
        ctx = make_field(-1)
        self.assertEqual(scaling_modulus(ctx, 1, 5, ScalingMode.EXACT_L_FACTORIAL), 120)
        with self.assertRaises(ValueError):
            scaling_modulus(ctx, 1, 13, ScalingMode.EXACT_L_FACTORIAL)


class TestBasePoints(unittest.TestCase):

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.ctx = make_field(-1)

    def test_distribution(self):
        """Test the prefix distribution and distinctness of the base points"""
        n, L = 2, 7
        points = find_base_points(self.ctx, n, L)
        self.assertEqual(len(points), n + 2)
        self.assertEqual(points[0], self.ctx.zero())
        modulus = scaling_modulus(self.ctx, n, L)
        self.assertEqual(len({(x.a % modulus, x.b % modulus) for x in points}), len(points))
        for prime in primes_up_to_norm(self.ctx, L):
            self.assertTrue(is_aud(points[:n + 1], prime, 1), msg=f"prefix crowds {prime.label}")
        self.assertEqual(points, find_base_points(self.ctx, n, L))

    def test_refused(self):
        """Test the cutoff and the candidate guard"""
        with self.assertRaises(ValueError):
            find_base_points(self.ctx, 1, 4)
        with self.assertRaises(BudgetExceededError) as context:
            find_base_points(self.ctx, 1, 5, box_guard=2)
        self.assertEqual(context.exception.guard, "box_guard")

    def test_rational(self):
        """Test that Q needs n + 1 base points"""
        points = find_base_points(make_field("Q"), 3, 9)
        self.assertEqual(len(points), 4)


class TestWalkConfig(unittest.TestCase):

    def test_validation(self):
        """Test refused parameters and base points"""
        ctx = make_field(-1)
        for kwargs in [{"n": -1}, {"L": 4}, {"M": -1}, {"trials": 0}, {"threads": 0}]:
            arguments = {"ctx": ctx, "n": 1, "L": 5, "M": 4, "trials": 2, **kwargs}
            with self.assertRaises(ValueError, msg=f"{kwargs} should be refused"):
                WalkConfig(**arguments)
        crowded = tuple(ctx.element(a, b) for a, b in [(0, 0), (2, 0), (0, 1)])
        with self.assertRaises(ValueError):
            WalkConfig(ctx, 1, 5, 4, 2, base_points=crowded)
        with self.assertRaises(ValueError):
            WalkConfig(ctx, 1, 5, 4, 2, base_points=crowded[:2])

    def test_derived(self):
        """Test the walk count and the modulus"""
        config = WalkConfig(make_field(-1), 1, 5, 4, 2)
        self.assertEqual(config.walks, 3)
        self.assertEqual(config.modulus, 10)
        self.assertEqual(len(config.base_points), 3)


class TestWalks(unittest.TestCase):

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.config = WalkConfig(make_field(-1), 1, 5, 9, 30, seed=7)

    def test_endpoints(self):
        """Test the shape, parity and reproducibility of walk endpoints"""
        endpoints = walk_endpoints(self.config, 3)
        self.assertEqual(endpoints.shape, (3, 2))
        self.assertTrue(np.all(np.abs(endpoints) <= 9))
        self.assertTrue(np.all(endpoints % 2 == 1), msg="nine steps end at an odd coordinate")
        np.testing.assert_array_equal(endpoints, walk_endpoints(self.config, 3))

    def test_simulate(self):
        """Test that the estimate is a proportion with a consistent interval"""
        result = simulate(self.config)
        self.assertEqual(result.trials, 30)
        self.assertEqual(result.modulus, 10)
        self.assertLessEqual(result.ci_low, result.p_hat)
        self.assertLessEqual(result.p_hat, result.ci_high)
        self.assertEqual(sum(result.failures_by_prime.values()), round(result.p_hat * 30))
        self.assertTrue(all(norm > 5 for norm in result.witness_norms),
                        msg="failures can only come from primes of norm above L")

    def test_threads_do_not_change_result(self):
        """Test that sharding leaves every trial's stream unchanged"""
        single = simulate(self.config)
        sharded = simulate(replace(self.config, threads=4))
        self.assertEqual(single.p_hat, sharded.p_hat)
        self.assertEqual(single.failures_by_prime, sharded.failures_by_prime)

    def test_sweep(self):
        """Test the sweep over walk lengths"""
        frame = sweep_M(replace(self.config, trials=5), [1, 4])
        self.assertEqual(list(frame.columns), ["M", "p_hat", "ci_low", "ci_high", "stderr"])
        self.assertEqual(list(frame["M"]), [1, 4])


class TestScalingModes(unittest.TestCase):

    def test_modes_agree(self):
        """Test that the conductor and L! moduli give overlapping failure estimates"""
        ctx = make_field(-1)
        conductor = simulate(WalkConfig(ctx, 2, 7, 4, 40, seed=13))
        factorial = simulate(WalkConfig(ctx, 2, 7, 4, 40, seed=13, mode=ScalingMode.EXACT_L_FACTORIAL))
        self.assertEqual(factorial.modulus, math.factorial(7))
        self.assertEqual(conductor.modulus % 2, 0)
        self.assertLessEqual(max(conductor.ci_low, factorial.ci_low), min(conductor.ci_high, factorial.ci_high),
                             msg=f"intervals [{conductor.ci_low}, {conductor.ci_high}] and "
                                 f"[{factorial.ci_low}, {factorial.ci_high}] do not overlap")
        for result in (conductor, factorial):
            self.assertTrue(all(norm > 7 for norm in result.witness_norms))


class TestTails(unittest.TestCase):

    def test_threshold(self):
        """Test sqrt(M) max(log M, 1)^(1/2d)"""
        self.assertEqual(default_threshold(0, 2), 0.0)
        self.assertAlmostEqual(default_threshold(100, 1), 10 * math.sqrt(math.log(100)))
        self.assertAlmostEqual(default_threshold(2, 2), math.sqrt(2))

    def test_single_step(self):
        """Test that one step never leaves the threshold"""
        config = WalkConfig(make_field(-1), 1, 5, 1, 50)
        self.assertEqual(tail_fraction(config), 0.0)
        self.assertEqual(tail_fraction(config, lambda M, d: 0.5), 1.0)

    def test_gaussian_tail_value(self):
        """Test the tail fraction at M = 10^4 in Z[i] against the binomial tail"""
        # |psi| >= 176 is 1.75 standard deviations per coordinate; the larger of two is outside
        # with probability 1 - (1 - 0.0801)^2 ~ 0.154
        config = WalkConfig(make_field(-1), 1, 5, 10 ** 4, 500, seed=9)
        self.assertAlmostEqual(tail_fraction(config), 0.154, delta=0.04)

    def test_marginals(self):
        """Test that coordinates have mean 0 and variance M"""
        config = WalkConfig(make_field(-1), 1, 5, 100, 200, seed=11)
        frame = walk_marginals(config)
        self.assertEqual(list(frame["coordinate"]), [0, 1])
        self.assertTrue((frame["count"] == 600).all())
        for _, row in frame.iterrows():
            self.assertAlmostEqual(row["mean"], 0.0, delta=2.0)
            self.assertAlmostEqual(row["variance"], 100.0, delta=30.0)


class TestWilsonInterval(unittest.TestCase):

    def test_interval(self):
        """Test boundary and symmetric cases"""
        low, high = wilson_interval(0, 10)
        self.assertAlmostEqual(low, 0.0)
        self.assertAlmostEqual(high, 0.2775, places=3)
        low, high = wilson_interval(5, 10)
        self.assertAlmostEqual(low + high, 1.0)
        with self.assertRaises(ValueError):
            wilson_interval(0, 0)
