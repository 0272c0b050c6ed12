"""Squeezing-enhanced adaptive Bayesian phase estimation."""

__version__ = "0.1.0"

from .bayes import Posterior, log_likelihood, posterior
from .errors import CapacityError, DegenerateProbeError, InvalidConfigError
from .gaussian import (
    BoundsReport,
    SqueezedThermalProbe,
    bounds_report,
    fisher_info,
    mean_photons,
    optimal_phase,
    probe_from_db,
    qfi_coherent,
    qfi_pure,
    quadrature_variance,
)
from .grid import PhaseGrid
from .homodyne import HomodyneBatch, RandomStream, derive_seed, sample_homodyne
from .protocol import EstimationRecord, ProtocolConfig, run_adaptive, run_nonadaptive

__all__ = [
    "BoundsReport", "CapacityError", "DegenerateProbeError", "EstimationRecord",
    "HomodyneBatch", "InvalidConfigError", "PhaseGrid", "Posterior", "ProtocolConfig",
    "RandomStream", "SqueezedThermalProbe", "bounds_report", "derive_seed", "fisher_info",
    "log_likelihood", "mean_photons", "optimal_phase", "posterior", "probe_from_db",
    "qfi_coherent", "qfi_pure", "quadrature_variance", "run_adaptive", "run_nonadaptive",
    "sample_homodyne",
]
