from .serialization import (factored_to_json, point_set_from_json, point_set_to_json, prime_to_json,
                            quadint_from_json, quadint_to_json, read_csv, read_set, read_trace,
                            trace_to_json, write_csv, write_json, write_set)
