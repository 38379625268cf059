"""Decoding and failure-rate statistics for toric surface codes.

The package covers two lattice orientations of the toric code (square and
rotated), a minimum-weight perfect-matching decoder, and five routes to
the logical failure rate: exhaustive enumeration at small size,
closed-form minimal-failure counting, direct Monte Carlo with a threshold
fit, rare-event splitting down to very low error rates, and an entropic
model built on sampled counts of non-contractible self-avoiding cycles.
"""

from .geometry import CodeGeometry, Orientation, build_geometry
from .noise import ErrorConfig, NoiseParams, sample_error
from .matching import DecodeOutcome, Syndrome, decode, extract_syndrome
from .enumeration import coset_report, enumerate_failures
from .pathcount import (rotated_lower_bound, rotated_upper_bound,
                        square_min_weight)
from .montecarlo import FailureEstimate, estimate_failure_rate, fit_threshold
from .splitting import SplitSchedule, geometric_schedule, split_failure_rate
from .walks import count_unconstrained, extrapolate_ncon, sample_constrained
from .model import (critical_p, fit_xi, free_energy_profile,
                    model_failure_rate, rigorous_upper_bound,
                    threshold_lower_bound)

__version__ = "0.1.0"

__all__ = [
    "CodeGeometry", "Orientation", "build_geometry",
    "ErrorConfig", "NoiseParams", "sample_error",
    "DecodeOutcome", "Syndrome", "decode", "extract_syndrome",
    "coset_report", "enumerate_failures",
    "rotated_lower_bound", "rotated_upper_bound", "square_min_weight",
    "FailureEstimate", "estimate_failure_rate", "fit_threshold",
    "SplitSchedule", "geometric_schedule", "split_failure_rate",
    "count_unconstrained", "extrapolate_ncon", "sample_constrained",
    "critical_p", "fit_xi", "free_energy_profile", "model_failure_rate",
    "rigorous_upper_bound", "threshold_lower_bound",
    "__version__",
]
