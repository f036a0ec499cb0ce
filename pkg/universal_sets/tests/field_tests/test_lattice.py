import itertools
import unittest

from universal_sets.exceptions import BudgetExceededError
from universal_sets.field import (crt_solve, factor_rational_prime, hnf, ideal_power_lattice,
                                  make_field, product_lattice, residues, valuation, xgcd)


def _primes(ctx, p):
    return [prime for prime, _ in factor_rational_prime(ctx, p)]


class TestHermiteForm(unittest.TestCase):

    def test_xgcd(self):
        """Test the Bezout identity and the sign of the gcd"""
        for a, b in [(240, 46), (-12, 18), (0, -7), (5, 0)]:
            g, x, y = xgcd(a, b)
            self.assertGreaterEqual(g, 0)
            self.assertEqual(a * x + b * y, g, msg=f"Bezout identity fails for ({a}, {b})")

    def test_hnf(self):
        """Test reduced forms of small lattices"""
        self.assertEqual(hnf([(2, 0), (0, 2), (-2, 2)]), ((2, 0), (0, 2)))
        self.assertEqual(hnf([(4, 0), (5, 1)]), ((4, 1), (0, 1)))
        self.assertEqual(hnf([(3, 0), (5, 1), (0, 2)]), ((1, 0), (0, 1)))
        with self.assertRaises(ValueError):
            hnf([(1, 1), (2, 2)])


class TestIdealLattice(unittest.TestCase):

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.ctx = make_field(-1)
        self.two, = _primes(self.ctx, 2)
        self.three, = _primes(self.ctx, 3)
        self.five_low, self.five_high = _primes(self.ctx, 5)

    def test_square_of_ramified_two(self):
        """Test that P2^2 is the ideal (2)"""
        lattice = ideal_power_lattice(self.two, 2)
        self.assertEqual(lattice.determinant, 4)
        self.assertEqual(lattice.basis, ((2, 0), (0, 2)))
        for column in lattice.columns():
            self.assertGreaterEqual(valuation(column, self.two), 2)
        self.assertTrue(lattice.contains(self.ctx.element(6)))
        self.assertFalse(lattice.contains(self.ctx.element(1, 1)))

    def test_determinants(self):
        """Test N(P^k) = N(P)^k for every kind of prime"""
        for prime, k in [(self.two, 5), (self.three, 2), (self.five_low, 3), (self.five_high, 1)]:
            self.assertEqual(ideal_power_lattice(prime, k).determinant, prime.residue_norm ** k)
        with self.assertRaises(ValueError):
            ideal_power_lattice(self.two, 0)

    def test_rational(self):
        """Test the 1x1 forms of Q"""
        ctx = make_field("Q")
        three, = _primes(ctx, 3)
        lattice = ideal_power_lattice(three, 2)
        self.assertEqual(lattice.determinant, 9)
        self.assertEqual(lattice.reduce(ctx.element(-1)), ctx.element(8))

    def test_reduce(self):
        """Test that reduction lands in the fundamental domain and stays in the class"""
        lattice = ideal_power_lattice(self.five_high, 2)
        (h11, _), (_, h22) = lattice.basis
        for a, b in itertools.product(range(-7, 8), repeat=2):
            x = self.ctx.element(a, b)
            r = lattice.reduce(x)
            self.assertTrue(0 <= r.a < h11 and 0 <= r.b < h22)
            self.assertTrue(lattice.contains(x - r))

    def test_product(self):
        """Test the product of coprime prime powers"""
        product = product_lattice([ideal_power_lattice(self.two, 2), ideal_power_lattice(self.five_low, 1)])
        self.assertEqual(product.determinant, 20)
        self.assertEqual(len(product.source), 2)


class TestChineseRemainder(unittest.TestCase):

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.ctx = make_field(-1)
        self.two, = _primes(self.ctx, 2)
        self.three, = _primes(self.ctx, 3)
        self.five_low, self.five_high = _primes(self.ctx, 5)

    def test_two_moduli(self):
        """Test x = 0 mod P2^2 and x = 1 mod (2 + i)"""
        x = crt_solve([(self.ctx.zero(), self.two, 2), (self.ctx.one(), self.five_high, 1)])
        self.assertTrue(ideal_power_lattice(self.two, 2).contains(x))
        self.assertTrue(ideal_power_lattice(self.five_high, 1).contains(x - 1))

    def test_conjugate_primes(self):
        """Test moduli at both primes above 5 together with the inert 3"""
        targets = [(self.ctx.element(1, 1), self.five_low, 2),
                   (self.ctx.element(2), self.five_high, 1),
                   (self.ctx.element(4, 5), self.three, 1)]
        x = crt_solve(targets)
        for target, prime, k in targets:
            self.assertTrue(ideal_power_lattice(prime, k).contains(x - target),
                            msg=f"{x} should be {target} mod {prime.label}^{k}")

    def test_order_independent(self):
        """Test that reordering the congruences gives the same class mod the product"""
        targets = [(self.ctx.element(1, 1), self.five_low, 2),
                   (self.ctx.element(2), self.five_high, 1),
                   (self.ctx.element(4, 5), self.three, 1),
                   (self.ctx.element(0, 1), self.two, 3)]
        modulus = product_lattice([ideal_power_lattice(prime, k) for _, prime, k in targets])
        first = crt_solve(targets)
        for order in itertools.permutations(targets):
            x = crt_solve(list(order))
            self.assertTrue(modulus.contains(x - first),
                            msg=f"{x} and {first} differ mod the product for order {[p.label for _, p, _ in order]}")

    def test_invalid(self):
        """Test repeated primes and empty systems"""
        with self.assertRaises(ValueError):
            crt_solve([])
        with self.assertRaises(ValueError):
            crt_solve([(self.ctx.zero(), self.two, 1), (self.ctx.one(), self.two, 2)])


class TestResidues(unittest.TestCase):

    def test_complete_system(self):
        """Test that residues are pairwise incongruent and complete"""
        ctx = make_field(-1)
        _, five = _primes(ctx, 5)
        reps = residues(five, 1)
        self.assertEqual(len(reps), 5)
        for x, y in itertools.combinations(reps, 2):
            self.assertEqual(valuation(x - y, five), 0)

        three, = _primes(ctx, 3)
        self.assertEqual(len(residues(three, 1)), 9)

    def test_guard(self):
        """Test the residue guard"""
        ctx = make_field(-1)
        five, _ = _primes(ctx, 5)
        with self.assertRaises(BudgetExceededError) as context:
            residues(five, 3, guard=100)
        self.assertEqual(context.exception.guard, "residue_guard")
        self.assertEqual(context.exception.count, 125)
