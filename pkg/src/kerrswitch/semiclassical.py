"""Mean-field amplitude equation, its fixed points and their linear stability.

The amplitude obeys ``d(alpha)/dt = i Delta alpha + G alpha* - kappa2 |alpha|^2 alpha``.
Quadratures are ``x = sqrt(2) Re(alpha)`` and ``p = sqrt(2) Im(alpha)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoBistability, NonFinite, ValidationError
from .grids import GridSpec, PhaseSpaceGrid
from .model import ModelParams, nontrivial_class, validate


@dataclass(frozen=True)
class QuadratureState:
    x: float
    p: float

    @classmethod
    def from_alpha(cls, alpha: complex) -> "QuadratureState":
        return cls(math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag)

    @property
    def alpha(self) -> complex:
        return complex(self.x, self.p) / math.sqrt(2.0)

    def __neg__(self) -> "QuadratureState":
        return QuadratureState(-self.x, -self.p)


@dataclass(frozen=True)
class Stability:
    eigenvalues: tuple[complex, complex]
    label: str  # "saddle", "center", "focus" or "node"


@dataclass(frozen=True)
class FixedPointSet:
    """Trivial point at the origin plus, when it exists, the pair ``+/- alpha0``."""

    n0: float
    theta0: float
    alpha0: complex
    saddle: Stability
    nontrivial: Stability | None

    @property
    def has_nontrivial(self) -> bool:
        return self.nontrivial is not None

    @property
    def quadratures(self) -> QuadratureState:
        return QuadratureState.from_alpha(self.alpha0)

    @property
    def saddle_eigs(self) -> tuple[complex, complex]:
        return self.saddle.eigenvalues

    @property
    def nontrivial_eigs(self) -> tuple[complex, complex] | None:
        return None if self.nontrivial is None else self.nontrivial.eigenvalues


def _photon_number(params: ModelParams) -> float | None:
    if params.radicand < 0:
        return None
    k2 = params.eta**2 + params.U**2
    n0 = (math.sqrt(params.radicand) + params.Delta * params.U) / k2
    return n0 if n0 > 0 else None


def _phase(params: ModelParams) -> float:
    rhs = complex(math.sqrt(params.radicand), params.Delta * params.eta) / (params.G * params.kappa2)
    return 0.5 * cmath.phase(rhs)


def jacobian(params: ModelParams, alpha: complex) -> np.ndarray:
    """Jacobian of ``(A_alpha, A_beta)`` with respect to ``(alpha, beta)`` at ``beta = alpha*``."""
    k = params.kappa2
    beta = alpha.conjugate()
    d = params.Delta
    return np.array([
        [1j * d - 2 * alpha * beta * k, params.G - alpha**2 * k],
        [params.G - beta**2 * k.conjugate(), -1j * d - 2 * alpha * beta * k.conjugate()],
    ])


def _origin_stability(params: ModelParams) -> Stability:
    root = cmath.sqrt(params.G**2 - params.Delta**2)
    label = "saddle" if abs(params.Delta) < params.G else "center"
    return Stability((root, -root), label)


def _nontrivial_stability(params: ModelParams, n0: float) -> Stability:
    # -2 n0 (eta +/- i U sqrt(1 - Delta/(U n0))) written without the 1/U so that U = 0 is regular
    root = cmath.sqrt(n0**2 * params.U**2 - n0 * params.Delta * params.U)
    eigs = (-2 * n0 * params.eta - 2j * root, -2 * n0 * params.eta + 2j * root)
    return Stability(eigs, nontrivial_class(params))


def fixed_points(params: ModelParams) -> FixedPointSet:
    """Fixed points of the amplitude equation.

    When the nontrivial pair does not exist the returned set carries only the
    origin (``n0 = 0``, ``nontrivial = None``); callers that need the pair
    raise :class:`NoBistability`.
    """
    validate(params)
    saddle = _origin_stability(params)
    n0 = _photon_number(params)
    if n0 is None:
        return FixedPointSet(0.0, 0.0, 0j, saddle, None)
    theta0 = _phase(params)
    alpha0 = math.sqrt(n0) * cmath.exp(1j * theta0)
    return FixedPointSet(n0, theta0, alpha0, saddle, _nontrivial_stability(params, n0))


def stability_at(params: ModelParams, point: str) -> Stability:
    """Eigenvalues and type at ``"origin"`` or ``"nontrivial"``."""
    validate(params)
    if point == "origin":
        return _origin_stability(params)
    if point == "nontrivial":
        n0 = _photon_number(params)
        if n0 is None:
            raise NoBistability("the nontrivial fixed point does not exist for these parameters")
        return _nontrivial_stability(params, n0)
    raise ValueError(f"point must be 'origin' or 'nontrivial', not {point!r}")


def _drift_xp(params: ModelParams, x, p):
    r2 = 0.5 * (x * x + p * p)
    dx = params.G * x - params.Delta * p - r2 * (params.eta * x - params.U * p)
    dp = params.Delta * x - params.G * p - r2 * (params.eta * p + params.U * x)
    return dx, dp


def drift(params: ModelParams, s: QuadratureState) -> QuadratureState:
    dx, dp = _drift_xp(params, s.x, s.p)
    return QuadratureState(dx, dp)


def integrate_trajectory(params: ModelParams, s0: QuadratureState, dt: float, n_steps: int) -> np.ndarray:
    """Fixed-step classical RK4 integration of the quadrature flow.

    Returns an array of shape ``(n_steps + 1, 2)`` holding ``(x, p)`` at
    times ``0, dt, ..., n_steps*dt``.
    """
    if dt <= 0:
        raise ValidationError("dt must be positive")
    if n_steps < 1:
        raise ValidationError("n_steps must be >= 1")
    validate(params)
    out = np.empty((n_steps + 1, 2))
    x, p = float(s0.x), float(s0.p)
    out[0] = x, p
    f = _drift_xp
    h = dt
    for i in range(1, n_steps + 1):
        k1x, k1p = f(params, x, p)
        k2x, k2p = f(params, x + 0.5 * h * k1x, p + 0.5 * h * k1p)
        k3x, k3p = f(params, x + 0.5 * h * k2x, p + 0.5 * h * k2p)
        k4x, k4p = f(params, x + h * k3x, p + h * k3p)
        x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if not (math.isfinite(x) and math.isfinite(p)):
            raise NonFinite(f"trajectory diverged at step {i}; reduce dt")
        out[i] = x, p
    return out


def vector_field_grid(params: ModelParams, spec: GridSpec) -> PhaseSpaceGrid:
    validate(params)
    X, P = spec.mesh()
    dx, dp = _drift_xp(params, X, P)
    return PhaseSpaceGrid(spec.x_axis(), spec.p_axis(), np.stack([dx, dp], axis=-1),
                          kind="drift", metadata={"params": params.as_dict()})
