import math
import unittest

from sympy import primerange

from universal_sets.field import make_field
from universal_sets.walk import WalkConfig, convolution_oracle, fourier_bound, simulate, tail_fraction


class TestFourierGrid(unittest.TestCase):

    def test_oracle(self):
        """Test the FFT oracle for every odd p <= 31 and M <= 64"""
        for p in primerange(3, 32):
            for M in range(1, 65):
                self.assertAlmostEqual(convolution_oracle(p, M), fourier_bound(p, M), delta=1e-12,
                                       msg=f"p = {p}, M = {M}")


class TestSimulationTrend(unittest.TestCase):

    def test_longer_walks_fail_less(self):
        """Test that p_hat does not grow from M = 25 to M = 400"""
        ctx = make_field(-1)
        short = simulate(WalkConfig(ctx, 2, 8, 25, 2000, seed=1, threads=4))
        long = simulate(WalkConfig(ctx, 2, 8, 400, 2000, seed=1, threads=4))
        combined = math.sqrt(short.stderr ** 2 + long.stderr ** 2)
        self.assertLessEqual(long.p_hat, short.p_hat + 2 * combined)
        for result in (short, long):
            self.assertTrue(all(norm > 8 for norm in result.witness_norms))


class TestTails(unittest.TestCase):

    def test_tail_decreases(self):
        """Test that the tail fraction falls from M = 10^3 to M = 10^5"""
        ctx = make_field(-1)
        fractions = [tail_fraction(WalkConfig(ctx, 1, 5, M, 2000, seed=3)) for M in (10 ** 3, 10 ** 5)]
        self.assertLess(fractions[1], fractions[0])

    def test_gaussian_tail_at_ten_thousand(self):
        """Test the tail fraction of Z[i] walks at M = 10^4 against the binomial value"""
        # kappa = 100 (log 10^4)^(1/4) ~ 174.2, so a coordinate is outside when |psi| >= 176,
        # i.e. about 1.75 standard deviations: 0.0801 per coordinate and
        # 1 - (1 - 0.0801)^2 ~ 0.154 for the larger of the two, not below 0.05
        ctx = make_field(-1)
        fraction = tail_fraction(WalkConfig(ctx, 1, 5, 10 ** 4, 4000, seed=5))
        self.assertAlmostEqual(fraction, 0.154, delta=0.012)
        self.assertGreater(fraction, 0.05)
