from .factorials import (POrdering, factorial_ideal, factorial_product, first_divergence,
                         p_ordering_of_set, set_invariants_match_ring, stabilization_level, w_ring)
from .universality import (PointSet, UniversalityFailure, UniversalityReport, aud_subset_exists,
                           is_aud, is_n_optimal, is_n_universal, is_newton_sequence,
                           newton_prefix_length, volume)
