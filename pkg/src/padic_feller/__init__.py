"""Radial p-adic pseudodifferential operators, their heat semigroups and
Levy processes, computed with certified remainders."""

__version__ = "0.1.0"

from .padic import (PAdicScalar, PAdicVector, ball_volume, character, fractional_part,
                    padic_norm, padic_ord, shell_of, sphere_volume)
from .radial import (Multiplier, NonIntegrableError, OuterDecay, RadialFunction,
                     WindowOverflowError, direct_convolve, inverse_radial_fourier, l2_norm,
                     radial_convolve, radial_fourier, radial_integral, shell_kernel)
from .symbols import (Const, ExpTower, OneMinusJHat, PowerNorm, PowerSeriesNorm, Sum, Symbol,
                      classify_type, negative_definite_test, normalize_condition_psi,
                      positive_definite_test, taibleson)
from .operators import (PseudoDiffOperator, apply_P, dissipativity_check, jkernel_operator,
                        mixed_operator, pmp_check, resolvent_solve, taibleson_operator)
from .semigroup import (cauchy_solve, chapman_kolmogorov_check, heat_kernel, semigroup_apply,
                        verify_feller)
from .levy import sample_increments, shell_masses, simulate_paths
from .spaces import SobolevWeight, besov_norm, embedding_bound_check, psi_metric
