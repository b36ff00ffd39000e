"""The common record every rate method returns."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

NUMERIC_GAP = "numeric-gap"
KRAMERS_FULL = "kramers-full"
KRAMERS_BARRIER = "kramers-barrier"
SMALL_DETUNING = "small-detuning"
NEAR_CRITICAL = "near-critical"
LANGEVIN_MC = "langevin-mc"

METHODS = (NUMERIC_GAP, KRAMERS_FULL, KRAMERS_BARRIER, SMALL_DETUNING, NEAR_CRITICAL, LANGEVIN_MC)

# column suffixes used in sweep tables
SHORT_NAMES = {
    NUMERIC_GAP: "numeric",
    KRAMERS_FULL: "full",
    KRAMERS_BARRIER: "barrier",
    SMALL_DETUNING: "small",
    NEAR_CRITICAL: "critical",
    LANGEVIN_MC: "langevin",
}


@dataclass(frozen=True)
class RateEstimate:
    """A switching rate tagged with the method that produced it.

    ``log_value`` is authoritative; ``value`` is ``exp(log_value)`` and may
    underflow to zero for very high barriers. ``valid`` is False when the
    method's nominal preconditions do not hold; the number is still returned
    so that formulas can be drawn outside their domains.
    """

    method: str
    log_value: float
    valid: bool = True
    notes: tuple[str, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown rate method {self.method!r}")

    @property
    def value(self) -> float:
        if self.log_value == -math.inf:
            return 0.0
        return math.exp(self.log_value)

    @classmethod
    def from_value(cls, method: str, value: float, **kwargs) -> "RateEstimate":
        log_value = math.log(value) if value > 0 else -math.inf
        return cls(method=method, log_value=log_value, **kwargs)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "value": self.value,
            "log_value": self.log_value,
            "valid": self.valid,
            "notes": list(self.notes),
            "metadata": self.metadata,
        }
