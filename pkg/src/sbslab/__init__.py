"""Two-tier laboratory for objectivity formation in a photon environment.

An analytic tier (closed-form decoherence and record-overlap asymptotics on a
discretized momentum shell) and an exact finite-dimensional tier (structured
simulation of the controlled-unitary out-state) that cross-check each other,
plus inequality verification and stationary-spectrum broadcasting.
"""

from . import asymptotics, bounds, oracle, pfcast, qmath, scatter
from .errors import CalibrationError, CapacityError, ConfigError, RegimeError, SbsError

__all__ = [
    "asymptotics",
    "bounds",
    "oracle",
    "pfcast",
    "qmath",
    "scatter",
    "CalibrationError",
    "CapacityError",
    "ConfigError",
    "RegimeError",
    "SbsError",
]

__version__ = "0.1.0"
