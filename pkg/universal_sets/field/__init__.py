from .quadratic import RATIONAL, FieldCtx, QuadInt, make_field, parse_field
from .primes import (DEFAULT_FACTOR_BOUND, FactoredIdeal, PrimeIdeal, SplitKind, batch_gcd,
                     conjugate_prime, factor_element, factor_integer, factor_rational_prime,
                     primes_above, primes_up_to_norm, split_smooth, valuation)
from .lattice import (DEFAULT_RESIDUE_GUARD, IdealLattice, crt_solve, hnf, ideal_power_lattice,
                      product_lattice, residues, xgcd)
