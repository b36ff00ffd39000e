"""Switching rates of a two-photon driven Kerr resonator with two-photon loss.

Three independent routes are provided: the exact Liouvillian gap on a
truncated Fock basis, closed-form Kramers rates from the stationary complex-P
potential, and first-passage Monte-Carlo of the near-critical Langevin model.
"""

__version__ = "0.1.0"

from .model import ModelParams, Regime, classify_regime, validate
from .rates import RateEstimate

__all__ = ["ModelParams", "Regime", "RateEstimate", "classify_regime", "validate", "__version__"]
