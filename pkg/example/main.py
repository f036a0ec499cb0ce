"""
Example of using universal_sets as a library: build a chain of universal
sets, certify the 5-optimal subset of Z[i] and look for a 4-optimal one.
"""
import logging

from universal_sets.algo import SearchBox, build_universal, search_optimal
from universal_sets.field import make_field
from universal_sets.ordering import is_n_optimal, volume
from universal_sets.util import read_set, trace_to_json, write_json

logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s %(message)s")

FIVE_OPTIMAL = "./input_files/five_optimal.json"
TRACE_OUTPUT = "./result_files/gaussian_trace.json"

# Degree of the chain to build
N = 12


def main():
    gauss = make_field(-1)

    # E_0 = {0, 1} grows by one element per degree; each E_n is certified
    # n-universal before the next element is chosen
    trace = build_universal(gauss, N)
    write_json(TRACE_OUTPUT, trace_to_json(trace), {"field": gauss.label, "n": N})
    for step in trace.steps:
        print(f"n = {step.n + 1}: added {step.element} ({step.coordinate_bits} bits), "
              f"excess {step.log_excess:.3f}")

    # {0, 1, 2, i, 1 + i, 2 + i} has the smallest possible volume
    points = read_set(FIVE_OPTIMAL, gauss)
    _, factored = volume(points)
    print(f"5-optimal: {is_n_optimal(points)}, N(Vol) = {factored.norm()}")

    # No 4-optimal set fits in a 7x7 box
    result = search_optimal(gauss, 4, SearchBox(7, 7))
    print(f"4-optimal sets in 7x7: {len(result.sets)} after {result.nodes} nodes")


if __name__ == "__main__":
    main()
