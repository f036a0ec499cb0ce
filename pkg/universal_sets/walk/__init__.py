from .fourier import (convolution_oracle, count_m_partitions, exact_collision_probability,
                      failure_bound_shape, fourier_bound, fourier_bound_analytic,
                      hausdorff_young_sides, partition_collision_bound, prime_fourier_ratio,
                      prime_sum_shape, step_distribution)
from .simulation import (ScalingMode, SimulationResult, WalkConfig, default_threshold,
                         find_base_points, run_trial, scaling_modulus, simulate, sweep_M,
                         tail_fraction, walk_endpoints, walk_marginals, wilson_interval)
