"""Linear dynamics of weighted backward shifts and dissipative composition operators.

The composition operator ``T_f`` on a measure tower and the weighted backward
shift ``B_w`` are represented exactly on finitely supported elements.  The
package links them through the factor map, decides recurrence-type
properties up to an explicit horizon, and measures return-time densities of
concrete orbits.
"""

from .conjugacy import check_semiconjugacy, derive_weights, factor_map, factor_norm_ratio, lift
from .core_types import (BilateralSequence, MeasureTower, Status, TowerFunction, Verdict,
                         WeightSequence, p_norm, validate)
from .criteria import (Classification, CriteriaConfig, build_periodic_point, chaos_criterion,
                       classify, hypercyclicity_criterion, recurrence_criterion)
from .densities import HitSet, lower_density, upper_banach_density
from .errors import InvariantViolation, ValidationError, WindowError
from .generators import (random_sequence, random_tower_function, tower_from_profile,
                         tower_from_weights)
from .operators import apply_composition, apply_shift, operator_norm_bound
from .orbits import (Evidence, frequent_recurrence_evidence, orbit_distances,
                     recurrence_hits)
from .profiles import Constant, Geometric, Harmonic, Step, Table

__version__ = "0.1.0"

__all__ = [
    "BilateralSequence", "WeightSequence", "MeasureTower", "TowerFunction", "Status",
    "Verdict", "p_norm", "validate",
    "apply_shift", "apply_composition", "operator_norm_bound",
    "derive_weights", "factor_map", "lift", "check_semiconjugacy", "factor_norm_ratio",
    "HitSet", "lower_density", "upper_banach_density",
    "CriteriaConfig", "Classification", "hypercyclicity_criterion", "recurrence_criterion",
    "chaos_criterion", "build_periodic_point", "classify",
    "orbit_distances", "recurrence_hits", "frequent_recurrence_evidence", "Evidence",
    "tower_from_profile", "tower_from_weights", "random_tower_function", "random_sequence",
    "Constant", "Geometric", "Harmonic", "Step", "Table",
    "ValidationError", "WindowError", "InvariantViolation",
]
