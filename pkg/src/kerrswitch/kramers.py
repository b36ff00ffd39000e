"""Closed-form escape rates from the stationary complex-P potential.

The potential ``Phi(alpha, beta)`` has a saddle at the origin and minima at
the classical pair ``(+/-alpha_cl, +/-alpha_cl*)``. The switching rate follows
the multidimensional Eyring-Kramers law, or its small-nonlinearity
simplification ``B exp(-dPhi)``. Asymptotic forms for small detuning, the
critical point and large Kerr are also provided. Every rate is returned in
log space so barriers of hundreds of units do not underflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NegativeDeterminantRatio, NoBistability, PotentialSingularity
from .model import ModelParams, classify_regime, validate
from .rates import (KRAMERS_BARRIER, KRAMERS_FULL, NEAR_CRITICAL, SMALL_DETUNING,
                    RateEstimate)


@dataclass(frozen=True)
class PotentialExtrema:
    alpha_cl: complex
    theta_cl: float
    alpha_q: complex | None  # None when |alpha_q|^2 < 0
    theta_q: float
    alpha_q_sq: float  # signed; negative means the quantum pair is absent

    @property
    def quantum_pair_exists(self) -> bool:
        return self.alpha_q_sq > 0


@dataclass(frozen=True)
class KramersBreakdown:
    phi_saddle: float
    phi_cl_parts: tuple[float, float, float]
    exponent: float  # Phi(alpha_cl, alpha_cl*) - Phi(0, 0)
    delta_phi: float
    prefactor_B: float
    lambda1_saddle: float
    det_saddle: float
    det_cl: float
    rate_full: float
    rate_barrier: float

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["phi_cl_parts"] = list(self.phi_cl_parts)
        return d


@dataclass(frozen=True)
class EffectivePotential:
    """Near-critical double well for the x quadrature, with ``V`` evaluated at the requested x."""

    V: float | np.ndarray
    m: float
    T_eff: float
    x0: float  # NaN above the critical point
    omega0: float  # sqrt(|V''(0)| / m)
    barrier_over_T: float  # |V(x0)| / T_eff


def _radical(params: ModelParams) -> float:
    """``R = sqrt(G^2 |kappa2|^2 - Delta^2 eta^2)``; raises when the classical pair is absent."""
    if params.radicand < 0:
        raise NoBistability("G^2 |kappa2|^2 < Delta^2 eta^2: no classical fixed points")
    R = math.sqrt(params.radicand)
    if R + params.Delta * params.U <= 0:
        raise NoBistability("classical photon number is not positive")
    return R


def _c_arctan(c: float, y: float) -> float:
    """``c * arctan(y / c)``, continuous through ``c = 0``."""
    return 0.0 if c == 0 else c * math.atan(y / c)


def _c_log_abs(c: float, x: float) -> float:
    """``c * ln|x|`` with the ``c = x = 0`` limit taken as 0."""
    return 0.0 if c == 0 else c * math.log(abs(x))


def potential(params: ModelParams, alpha, beta):
    """Complex potential of the stationary P-distribution.

    The ``beta`` logarithm is taken as the mirror image of the ``alpha`` one,
    ``conj(Log(conj(beta)^2 - G/kappa2))``, so that ``Phi(alpha, alpha*)`` is
    real on the physical plane, including points on the branch cut.
    """
    validate(params)
    k = params.kappa2
    c = params.G / k
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    za = alpha**2 - c
    zb = np.conj(beta) ** 2 - c
    if np.any(za == 0) or np.any(zb == 0):
        raise PotentialSingularity("alpha^2 or beta^2 hits G/kappa2")
    w = 1 + 1j * params.Delta / k
    out = -2 * alpha * beta + w * np.log(za) + np.conj(w * np.log(zb))
    return out[()] if out.ndim == 0 else out


def extrema(params: ModelParams) -> PotentialExtrema:
    validate(params)
    R = _radical(params)
    k2 = params.kappa2_modulus**2
    gk = params.G * params.kappa2
    theta_cl = 0.5 * cmath.phase(complex(R, params.eta * params.Delta) / gk)
    theta_q = 0.5 * cmath.phase(complex(R, -params.eta * params.Delta) / gk)
    n_cl = (R + params.U * params.Delta) / k2 + 1
    n_q = (R - params.U * params.Delta) / k2 - 1
    alpha_q = math.sqrt(n_q) * cmath.exp(1j * theta_q) if n_q > 0 else None
    return PotentialExtrema(math.sqrt(n_cl) * cmath.exp(1j * theta_cl), theta_cl, alpha_q, theta_q, n_q)


def hessian(params: ModelParams, alpha: complex, beta: complex) -> np.ndarray:
    """Closed-form matrix of second derivatives of ``Phi`` in ``(alpha, beta)``."""
    validate(params)
    k = params.kappa2
    kc = k.conjugate()
    G, d = params.G, params.Delta
    da = G - k * alpha**2
    db = G - kc * beta**2
    if da == 0 or db == 0:
        raise PotentialSingularity("alpha^2 or beta^2 hits G/kappa2")
    haa = -2j * (d - 1j * k) * (G + k * alpha**2) / da**2
    hbb = 2j * (d + 1j * kc) * (G + kc * beta**2) / db**2
    return np.array([[haa, -2.0], [-2.0, hbb]], dtype=complex)


def saddle_eigenvalue(params: ModelParams) -> float:
    """Negative Hessian eigenvalue at the origin, ``-2(sqrt(G^2 - (Delta+U)^2) + eta)/G``."""
    s = params.G**2 - (params.Delta + params.U) ** 2
    if s < 0:
        raise NegativeDeterminantRatio("|Delta + U| > G: the origin Hessian eigenvalues are complex")
    return -2.0 * (math.sqrt(s) + params.eta) / params.G


def determinants(params: ModelParams) -> tuple[float, float]:
    """Closed-form ``(det at the origin, det at the classical point)``."""
    R = _radical(params)
    k2 = params.kappa2_modulus**2
    du = params.Delta + params.U
    det0 = -4.0 * (params.G**2 - du**2 - params.eta**2) / params.G**2
    det_cl = 16.0 * R / k2 * (R + params.Delta * params.U + k2) / (params.eta**2 + du**2)
    return det0, det_cl


def potential_parts(params: ModelParams) -> tuple[float, tuple[float, float, float]]:
    """Closed forms of ``Phi(0, 0)`` and of the three pieces of ``Phi(alpha_cl, alpha_cl*)``.

    Each is defined up to a common additive constant; only the difference is
    meaningful. The last arctangent is ``arg(sgn(Delta)(Delta + U) + i eta)``
    signed by ``Delta``, which follows the potential continuously from the
    saddle to the well for either sign of the detuning.
    """
    R = _radical(params)
    eta, U, d, G = params.eta, params.U, params.Delta, params.G
    k2 = params.kappa2_modulus**2
    theta = params.kappa2_phase
    de = d * eta
    s = 1.0 if d >= 0 else -1.0
    tilt = 1 + d * U / k2
    phi0 = tilt * math.log(G**2 / k2) + 2 * de * theta / k2
    phi1 = -2 * (R + d * U) / k2 - 2
    phi2 = (2 * _c_arctan(de, R) + 4 * de * theta + 2 * de * s * math.atan2(eta, s * (d + U))) / k2
    phi3 = tilt * math.log((eta**2 + (d + U) ** 2) / k2)
    return phi0, (phi1, phi2, phi3)


def barrier_height(params: ModelParams) -> float:
    """Effective barrier ``dPhi`` of the small-nonlinearity rate."""
    R = _radical(params)
    eta, U, d, G = params.eta, params.U, params.Delta, params.G
    k2 = params.kappa2_modulus**2
    de = d * eta
    return (2 * (R + d * U) / k2
            - 2 * (_c_arctan(de, R) + de * math.atan2(U, eta)) / k2
            - 2 * _c_log_abs(d * U, d / G) / k2)


def log_prefactor_B(params: ModelParams) -> float:
    R = _radical(params)
    k2 = params.kappa2_modulus**2
    if params.Delta == 0:
        return -math.inf
    return (math.log(2 / math.pi) + math.log(abs(params.Delta) / params.G)
            + 0.25 * math.log(params.radicand) + 0.5 * math.log((R + params.Delta * params.U) / k2))


def _barrier_valid(params: ModelParams) -> tuple[bool, tuple[str, ...]]:
    notes = []
    if abs(params.Delta) >= params.G:
        notes.append("|Delta| >= G: the origin is no longer a saddle")
    if abs(params.Delta) <= params.kappa2_modulus:
        notes.append("|Delta| <= |kappa2|: barrier prefactor overestimates the rate")
    return not notes, tuple(notes)


def rate_barrier(params: ModelParams) -> RateEstimate:
    """``Gamma = B exp(-dPhi)``."""
    validate(params)
    dphi = barrier_height(params)
    valid, notes = _barrier_valid(params)
    return RateEstimate(KRAMERS_BARRIER, log_prefactor_B(params) - dphi, valid, notes,
                        {"delta_phi": dphi})


def rate_full(params: ModelParams) -> tuple[RateEstimate, KramersBreakdown]:
    """Multidimensional Eyring-Kramers rate with diffusion ``D0 = G`` at the saddle."""
    validate(params)
    lam = saddle_eigenvalue(params)
    det0, det_cl = determinants(params)
    if det0 >= 0 or det_cl <= 0:
        raise NegativeDeterminantRatio(
            f"Hessian determinants det0={det0:.4g}, det_cl={det_cl:.4g} do not describe a saddle and a minimum")
    phi0, parts = potential_parts(params)
    exponent = sum(parts) - phi0
    log_rate = (math.log(params.G * abs(lam) / (2 * math.pi))
                + 0.5 * math.log(det_cl / abs(det0)) + exponent)
    barrier = rate_barrier(params)
    breakdown = KramersBreakdown(
        phi_saddle=phi0,
        phi_cl_parts=parts,
        exponent=exponent,
        delta_phi=barrier.metadata["delta_phi"],
        prefactor_B=math.exp(log_prefactor_B(params)),
        lambda1_saddle=lam,
        det_saddle=det0,
        det_cl=det_cl,
        rate_full=math.exp(log_rate),
        rate_barrier=barrier.value,
    )
    valid = abs(params.Delta) < params.G
    notes = () if valid else ("|Delta| >= G: the origin is no longer a saddle",)
    return RateEstimate(KRAMERS_FULL, log_rate, valid, notes, {"exponent": exponent}), breakdown


def rate_small_detuning(params: ModelParams) -> RateEstimate:
    """``Gamma = (4 Delta^2/|kappa2|) exp(-2G/|kappa2|)``; depends on eta and U only through ``|kappa2|``."""
    validate(params)
    k = params.kappa2_modulus
    log_rate = (math.log(4 * params.Delta**2 / k) if params.Delta else -math.inf) - 2 * params.G / k
    valid = abs(params.Delta) < k
    notes = () if valid else ("|Delta| >= |kappa2|: outside the small-detuning regime",)
    return RateEstimate(SMALL_DETUNING, log_rate, valid, notes)


def _critical_exponent(G: float, gap: float, eta: float) -> float:
    return 4 * math.sqrt(2) * gap**1.5 / (3 * eta * math.sqrt(G))


def rate_near_critical(params: ModelParams,
                       near_critical_fraction: float | None = None) -> RateEstimate:
    """``Gamma = (2/pi) sqrt(2G(G-|Delta|)) exp(-4 sqrt(2) (G-|Delta|)^{3/2} / (3 eta sqrt(G)))``."""
    validate(params)
    G = params.G
    gap = G - abs(params.Delta)
    notes = []
    if params.U != 0:
        notes.append("derived for U = 0")
    if gap <= 0:
        notes.append("|Delta| >= G: no double well")
        return RateEstimate(NEAR_CRITICAL, -math.inf, False, tuple(notes))
    if params.eta == 0:
        notes.append("eta = 0: the barrier is infinite")
        return RateEstimate(NEAR_CRITICAL, -math.inf, False, tuple(notes))
    kw = {} if near_critical_fraction is None else {"near_critical_fraction": near_critical_fraction}
    if classify_regime(params, **kw).detuning_class != "near_critical":
        notes.append("not in the near-critical regime")
    log_rate = math.log(2 / math.pi) + 0.5 * math.log(2 * G * gap) - _critical_exponent(G, gap, params.eta)
    return RateEstimate(NEAR_CRITICAL, log_rate, not notes, tuple(notes))


def wigner_effective_potential(params: ModelParams, x=0.0) -> EffectivePotential:
    """Landau-like double well ``V(x) = ((Delta-G)/2) x^2 + (eta^2/(48G)) x^6`` with ``m = 1/(2G)``, ``T = G/2``.

    The well sits at ``x0 = (8G(G-Delta)/eta^2)^{1/4}`` and the barrier over
    temperature is ``4 sqrt(2) (G-Delta)^{3/2} / (3 eta sqrt(G))``.
    """
    validate(params)
    G, d, eta = params.G, params.Delta, params.eta
    xa = np.asarray(x, dtype=float)
    V = 0.5 * (d - G) * xa**2 + eta**2 / (48 * G) * xa**6
    V = V[()] if V.ndim == 0 else V
    m = 1.0 / (2 * G)
    T = G / 2
    omega0 = math.sqrt(abs(d - G) / m)
    if d < G and eta > 0:
        x0 = (8 * G * (G - d) / eta**2) ** 0.25
        v0 = 0.5 * (d - G) * x0**2 + eta**2 / (48 * G) * x0**6
        barrier = abs(v0) / T
    else:
        x0 = math.nan
        barrier = 0.0 if d >= G else math.inf
    return EffectivePotential(V, m, T, x0, omega0, barrier)


def arrhenius_rate(params: ModelParams) -> float:
    """``omega0/(2 pi) exp(-|V(x0)|/T_eff)`` for the near-critical double well."""
    ep = wigner_effective_potential(params)
    return ep.omega0 / (2 * math.pi) * math.exp(-ep.barrier_over_T)


def critical_ratio(G: float, kappa_modulus: float = 1.0) -> float:
    """Closed-form ``(U/eta)_c`` at which the rate first becomes non-monotonic in Delta."""
    if not G > kappa_modulus > 0:
        raise ValueError("critical ratio needs G > |kappa2| > 0")
    ell = math.log(G / (math.e * kappa_modulus))
    return math.tan(2 / math.pi * (math.sqrt(ell**2 + math.pi**2 / 2) - ell))


def critical_ratio_asymptote(G: float, kappa_modulus: float = 1.0) -> float:
    return math.pi / math.log(G**2 / (math.e**2 * kappa_modulus**2))


def barrier_slope(G: float, kappa_modulus: float, u_over_eta: float, Delta: float | None = None,
                  h: float = 1e-6) -> float:
    """Central-difference ``d(dPhi)/dDelta`` at ``Delta`` (default ``|kappa2|``) and fixed ``|kappa2|``."""
    Delta = kappa_modulus if Delta is None else Delta
    p = ModelParams.from_ratio(G, Delta, kappa_modulus, u_over_eta)
    return (barrier_height(p.replace(Delta=Delta + h)) - barrier_height(p.replace(Delta=Delta - h))) / (2 * h)


def critical_ratio_from_slope(G: float, kappa_modulus: float = 1.0,
                              bracket: tuple[float, float] = (0.1, 20.0)) -> float:
    """Ratio ``U/eta`` where the barrier slope at ``Delta = |kappa2|`` changes sign."""
    return brentq(lambda r: barrier_slope(G, kappa_modulus, r), *bracket, xtol=1e-10)


def rate_min_large_kerr(params: ModelParams) -> RateEstimate:
    """Minimal rate ``(2G/pi) exp(-4G/U)`` reached near ``Delta_opt = G + |kappa2|`` when eta << U."""
    validate(params)
    if params.U == 0:
        return RateEstimate(KRAMERS_BARRIER, -math.inf, False, ("U = 0: no Kerr minimum",))
    k = params.kappa2_modulus
    notes = []
    if params.U < 5 * params.eta:
        notes.append("eta is not small compared with U")
    if params.eta > 0 and params.U / params.eta > 8 * math.pi / 3 * params.G / k:
        notes.append("U/eta exceeds (8 pi/3) G/|kappa2|")
    log_rate = math.log(2 * params.G / math.pi) - 4 * params.G / params.U
    return RateEstimate(KRAMERS_BARRIER, log_rate, not notes, tuple(notes),
                        {"Delta_opt": params.G + k, "approximation": "large-kerr-minimum"})
