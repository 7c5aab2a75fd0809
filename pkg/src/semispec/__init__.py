"""Semiclassical eigenvalues of ``eps^2 x'' = (V(t) - E) x`` for single-well potentials.

Asymptotic solvers (Bohr-Sommerfeld, Weber/Hermite), Evans-function shooting,
a finite-difference reference solver and scaling studies that compare them.
"""

__version__ = "0.1.0"

from .action import action_derivative, action_J, invert_J
from .evans import PruferTrace, evans_delta, evans_mismatch, evans_spectrum, prufer_shoot
from .expr import differentiate, evaluate, parse_expression, to_source
from .harness import (ScalingReport, bs_remainder_study, gap_study, intermediate_study,
                      low_lying_study)
from .potential import (PotentialModel, ValidationReport, make_potential, parse_potential,
                        validate_single_well)
from .quantize import (bohr_sommerfeld_spectrum, intermediate_residual, low_lying_spectrum,
                       melnikov_first_order)
from .refsolver import (Tridiagonal, discretize, reference_eigenvector, reference_spectrum,
                        sturm_count, truncation_domain)
from .specfun import airy_ai, airy_ai_prime, hermite, hermite_norm_sq
from .spectrum import EigenRecord, Spectrum
from .turning import TurningData, midpoint_t0, turning_data, turning_points
from .wkbfun import (Eigenfunction, build_eigenfunction, count_zeros, quasi_coefficients,
                     sign_changes, wkb_phase)

__all__ = [
    "__version__",
    "action_J", "action_derivative", "invert_J",
    "PruferTrace", "prufer_shoot", "evans_mismatch", "evans_delta", "evans_spectrum",
    "parse_expression", "differentiate", "evaluate", "to_source",
    "ScalingReport", "bs_remainder_study", "low_lying_study", "gap_study", "intermediate_study",
    "PotentialModel", "ValidationReport", "make_potential", "parse_potential", "validate_single_well",
    "bohr_sommerfeld_spectrum", "low_lying_spectrum", "melnikov_first_order", "intermediate_residual",
    "Tridiagonal", "truncation_domain", "discretize", "sturm_count", "reference_spectrum",
    "reference_eigenvector",
    "airy_ai", "airy_ai_prime", "hermite", "hermite_norm_sq",
    "EigenRecord", "Spectrum",
    "TurningData", "turning_points", "midpoint_t0", "turning_data",
    "Eigenfunction", "build_eigenfunction", "count_zeros", "sign_changes", "quasi_coefficients",
    "wkb_phase",
]
