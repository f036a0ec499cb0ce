from .euler_kronecker import (DEFAULT_TOLERANCE, BoundCheck, GammaEstimate, VolumeCheck,
                              gamma_estimate, gamma_mascheroni, gamma_trajectory, harmonic_gap,
                              ihara_bound, ihara_bound_check, ihara_comparison_line,
                              log_norm_factorial, vol_asymptotic_check)
from .potential import Box, InequalityCheck, log_ineq_check, log_potential_integral
