"""Exact steady-state Wigner function of the U = 0 model.

``W(x, p) = (2/pi) |0F1(1/2 - i Delta/eta; (G/2eta)(x - ip)^2)|^2 e^{-(x^2+p^2)} / N``
with ``N = 1F2(1/2; 1/2 - i Delta/eta, 1/2 + i Delta/eta; G^2/eta^2)``.
With this prefactor ``W`` is a density over ``d^2 alpha = dx dp / 2``.
The formula does not contain U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize

from .errors import EtaZero, LowerParameterPole, MaxTermsExceeded
from .grids import GridSpec, PhaseSpaceGrid
from .model import ModelParams, validate
from .semiclassical import fixed_points

SERIES_EPS = 1e-14
MAX_TERMS = 100_000


@dataclass(frozen=True)
class HypergeometricSpec:
    upper: tuple[complex, ...]
    lower: tuple[complex, ...]
    argument: complex

    @property
    def kind(self) -> str:
        return f"{len(self.upper)}F{len(self.lower)}"

    def evaluate(self, eps: float = SERIES_EPS, max_terms: int | None = None) -> complex:
        return complex(hypergeometric(self.upper, self.lower, self.argument, eps, max_terms))


def _check_lower(lower) -> None:
    for b in lower:
        b = complex(b)
        if b.imag == 0 and b.real <= 0 and b.real == int(b.real):
            raise LowerParameterPole(f"lower parameter {b.real:g} is a non-positive integer")


def hypergeometric(upper, lower, z, eps: float = SERIES_EPS, max_terms: int | None = None):
    """Generalized hypergeometric series ``pFq(upper; lower; z)``, elementwise over ``z``.

    Each element stops once three consecutive terms fall below ``eps`` times its
    partial sum; afterwards that element is frozen, so a value does not depend on
    which other arguments it was evaluated with. The default term budget is
    ``10 sqrt(max|z|) + 100`` capped at ``1e5``.
    """
    _check_lower(lower)
    upper = [complex(a) for a in upper]
    lower = [complex(b) for b in lower]
    za = np.asarray(z, dtype=complex)
    if max_terms is None:
        max_terms = min(MAX_TERMS, int(10 * math.sqrt(float(np.abs(za).max(initial=0.0)))) + 100)
    term = np.ones_like(za)
    total = np.ones_like(za)
    quiet = np.zeros(za.shape, dtype=int)
    active = np.ones(za.shape, dtype=bool)
    for k in range(max_terms):
        ratio = 1.0 + 0j
        for a in upper:
            ratio *= a + k
        for b in lower:
            ratio /= b + k
        term = term * za * (ratio / (k + 1))
        total = np.where(active, total + term, total)
        small = np.abs(term) < eps * np.abs(total)
        quiet = np.where(small, quiet + 1, 0)
        active &= quiet < 3
        if not active.any():
            return total[()] if total.ndim == 0 else total
    raise MaxTermsExceeded(f"series did not converge within {max_terms} terms")


def _wigner_lower(params: ModelParams) -> complex:
    validate(params)
    if params.eta == 0:
        raise EtaZero("the steady-state Wigner function needs eta > 0")
    return complex(0.5, -params.Delta / params.eta)


def wigner_normalizer(params: ModelParams) -> float:
    b = _wigner_lower(params)
    val = hypergeometric([0.5], [b, b.conjugate()], (params.G / params.eta) ** 2)
    return float(val.real)


def wigner(params: ModelParams, x, p):
    """Steady-state Wigner density at quadratures ``(x, p)``; broadcasts over arrays."""
    b = _wigner_lower(params)
    x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    shape = x.shape
    # work on flat arrays so scalars and grids go through the same numpy loops
    x, p = x.ravel(), p.ravel()
    z = params.G / (2 * params.eta) * (x - 1j * p) ** 2
    f = hypergeometric([], [b], z)
    w = (2 / math.pi * np.abs(f) ** 2 * np.exp(-(x * x + p * p)) / wigner_normalizer(params)).reshape(shape)
    return w[()] if w.ndim == 0 else w


def default_grid(params: ModelParams, n: int = 201) -> GridSpec:
    """Square grid of radius ``sqrt(2(n0 + 1)) + 5`` around the origin."""
    n0 = fixed_points(params.replace(U=0.0)).n0 if params.eta > 0 else 0.0
    return GridSpec.square(math.sqrt(2 * (n0 + 1)) + 5, n)


def wigner_grid(params: ModelParams, spec: GridSpec | None = None) -> PhaseSpaceGrid:
    spec = default_grid(params) if spec is None else spec
    X, P = spec.mesh()
    W = wigner(params, X, P)
    return PhaseSpaceGrid(spec.x_axis(), spec.p_axis(), np.asarray(W, dtype=float), kind="wigner",
                          metadata={"params": params.as_dict()})


def integrate_grid(grid: PhaseSpaceGrid) -> float:
    """``integral W d^2 alpha`` by the trapezoidal rule (half the ``dx dp`` integral)."""
    return 0.5 * float(trapezoid(trapezoid(grid.values, grid.p_axis, axis=1), grid.x_axis))


def wigner_peaks(params: ModelParams, grid: PhaseSpaceGrid | None = None,
                 rel_threshold: float = 1e-3) -> list[tuple[float, float]]:
    """Local maxima of ``W``: interior grid maxima refined by a simplex search."""
    grid = wigner_grid(params) if grid is None else grid
    W = grid.values
    core = W[1:-1, 1:-1]
    is_max = np.ones_like(core, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_max &= core > W[1 + di:W.shape[0] - 1 + di, 1 + dj:W.shape[1] - 1 + dj]
    is_max &= core > rel_threshold * W.max()
    peaks = []
    for i, j in zip(*np.nonzero(is_max)):
        start = (grid.x_axis[i + 1], grid.p_axis[j + 1])
        res = minimize(lambda s: -wigner(params, s[0], s[1]), start, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-14})
        peaks.append((float(res.x[0]), float(res.x[1])))
    return sorted(peaks)
