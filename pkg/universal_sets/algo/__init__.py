from .collapse import Axis, collapse_axis, collapse_both, densest_line, is_collapsed
from .constructor import (DEFAULT_PIN_BOUND, ConstructionStep, ConstructionTrace, PinnedCongruence,
                          build_universal, extend_universal, log_excess)
from .optimal_search import (DEFAULT_BUDGET, DEFAULT_JUSTIFICATION, SearchBox, SearchResult,
                             canonical_form, search_optimal)
from .pruners import AbstractPruner, CollapsePruner, NormDivisibilityPruner, ValuationPruner
