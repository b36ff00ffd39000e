"""Physical parameters of the driven Kerr resonator and regime classification.

All rates are dimensionless multiples of a reference rate; nothing here
converts units. The nonlinear coupling ``kappa2 = eta + iU`` is always derived
from ``eta`` and ``U`` and never stored.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import asdict, dataclass

from .errors import NegativeRate, NonPositivePump, ValidationError

DEFAULT_NEAR_CRITICAL_FRACTION = 0.05


@dataclass(frozen=True)
class ModelParams:
    """Two-photon pump ``G``, detuning ``Delta``, two-photon loss ``eta`` and Kerr ``U``."""

    G: float
    Delta: float
    eta: float
    U: float = 0.0

    @property
    def kappa2(self) -> complex:
        return complex(self.eta, self.U)

    @property
    def kappa2_modulus(self) -> float:
        return math.hypot(self.eta, self.U)

    @property
    def kappa2_phase(self) -> float:
        # atan2 keeps eta = 0 well defined (theta = pi/2)
        return math.atan2(self.U, self.eta)

    @property
    def radicand(self) -> float:
        """``G^2 |kappa2|^2 - Delta^2 eta^2``; the nontrivial solutions need it >= 0."""
        return self.G**2 * (self.eta**2 + self.U**2) - self.Delta**2 * self.eta**2

    def replace(self, **changes) -> "ModelParams":
        data = asdict(self)
        data.update(changes)
        return ModelParams(**data)

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}

    @classmethod
    def from_polar(cls, G: float, Delta: float, kappa_modulus: float, theta: float) -> "ModelParams":
        """Build from ``|kappa2|`` and ``theta = arctan(U/eta)``."""
        return cls(G=G, Delta=Delta, eta=kappa_modulus * math.cos(theta),
                   U=kappa_modulus * math.sin(theta))

    @classmethod
    def from_ratio(cls, G: float, Delta: float, kappa_modulus: float, u_over_eta: float) -> "ModelParams":
        return cls.from_polar(G, Delta, kappa_modulus, math.atan(u_over_eta))


@dataclass(frozen=True)
class Regime:
    bistable: bool
    detuning_class: str  # "small" | "barrier" | "near_critical" | "supercritical"
    saddle_class: str  # "saddle" | "center"
    nontrivial_class: str | None  # "focus" | "node" | None when no nontrivial point


def validate(params: ModelParams) -> ModelParams:
    """Check field constraints and return ``params`` unchanged."""
    for name in ("G", "Delta", "eta", "U"):
        value = getattr(params, name)
        if not isinstance(value, numbers.Real) or isinstance(value, bool) or not math.isfinite(value):
            raise ValidationError(f"{name} must be a finite real number, got {value!r}")
    if params.G <= 0:
        raise NonPositivePump(f"pump rate G must be positive, got {params.G}")
    if params.eta < 0:
        raise NegativeRate(f"two-photon loss eta must be >= 0, got {params.eta}")
    if params.U < 0:
        raise NegativeRate(f"Kerr nonlinearity U must be >= 0, got {params.U}")
    if params.eta == 0 and params.U == 0:
        raise ValidationError("eta and U cannot both vanish: kappa2 would be zero")
    return params


def nontrivial_class(params: ModelParams) -> str | None:
    """Stability type of the nontrivial fixed point from the sign of its eigenvalue radicand."""
    if params.radicand < 0:
        return None
    k2 = params.eta**2 + params.U**2
    n0 = (math.sqrt(params.radicand) + params.Delta * params.U) / k2
    if n0 <= 0:
        return None
    # eigenvalues -2 n0 (eta +/- i sqrt(U^2 - Delta U / n0)); complex pair -> focus
    return "focus" if n0 * params.U**2 - params.Delta * params.U > 0 else "node"


def classify_regime(params: ModelParams,
                    near_critical_fraction: float = DEFAULT_NEAR_CRITICAL_FRACTION) -> Regime:
    if not 0 < near_critical_fraction < 1:
        raise ValidationError("near_critical_fraction must lie in (0, 1)")
    validate(params)
    delta = abs(params.Delta)
    bistable = delta < params.G
    if not bistable:
        detuning_class = "supercritical"
    elif (params.G - delta) / params.G < near_critical_fraction:
        detuning_class = "near_critical"
    elif delta < params.kappa2_modulus:
        detuning_class = "small"
    else:
        detuning_class = "barrier"
    return Regime(
        bistable=bistable,
        detuning_class=detuning_class,
        saddle_class="saddle" if bistable else "center",
        nontrivial_class=nontrivial_class(params),
    )
