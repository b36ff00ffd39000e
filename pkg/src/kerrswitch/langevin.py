"""Monte-Carlo escape times for the near-critical effective Langevin equation.

The x quadrature behaves as a particle in the double well ``V(x)`` with mass
``m = 1/(2G)``, nonlinear friction ``2 eta x^2`` and multiplicative noise::

    dx = w dt
    dw = [-2 eta x^2 w - V'(x)/m] dt + x sqrt(4 eta T_eff / m) dW

The noise amplitude depends only on x, which is not itself driven by noise,
so the Ito and Stratonovich readings coincide. The explicit Euler-Maruyama
step evaluates everything at the pre-step state.

Random numbers come from numpy's PCG64. Trajectories are processed in fixed
chunks, each with its own child of ``SeedSequence(seed)``, so results depend
only on ``(seed, trajectory index)`` and not on how chunks are scheduled.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AllCensored, NonFinite, ValidationError
from .kramers import wigner_effective_potential
from .model import ModelParams, validate
from .rates import LANGEVIN_MC, RateEstimate

CHUNK = 256
GENERATOR = "numpy.PCG64"


@dataclass(frozen=True)
class LangevinConfig:
    params: ModelParams
    dt: float = 1e-3
    n_trajectories: int = 2000
    max_time: float = 100.0
    seed: int = 0
    noise_scale: float = 1.0  # multiplies the noise amplitude; 0 gives the deterministic flow
    noise_substeps: int = 1  # each Brownian increment is the sum of this many finer increments

    def __post_init__(self):
        if self.params.U != 0:
            object.__setattr__(self, "params", self.params.replace(U=0.0))
        validate(self.params)
        if self.params.eta <= 0:
            raise ValidationError("the Langevin model needs eta > 0")
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if self.n_trajectories < 1:
            raise ValidationError("n_trajectories must be >= 1")
        if not self.max_time > 0:
            raise ValidationError("max_time must be positive")
        if self.noise_substeps < 1:
            raise ValidationError("noise_substeps must be >= 1")

    def stiffness(self) -> float:
        ep = wigner_effective_potential(self.params)
        x0 = ep.x0 if math.isfinite(ep.x0) else 0.0
        return max(2 * self.params.eta * x0**2, ep.omega0)


@dataclass
class EscapeStatistics:
    mean_fpt: float
    stderr: float
    n_escaped: int
    n_censored: int
    implied_rate: float  # 1/(2 MFPT): transitions per unit time into the other well
    switching_rate: float  # 1/MFPT: relaxation rate of the well-population difference
    rate_stderr: float  # standard error of implied_rate by the delta method
    seed: int
    lower_bound: bool  # True when censored runs make mean_fpt a lower bound
    metadata: dict = field(default_factory=dict)

    def rate_estimate(self) -> RateEstimate:
        return RateEstimate.from_value(LANGEVIN_MC, self.implied_rate, valid=not self.lower_bound,
                                       notes=("censored trajectories",) if self.lower_bound else (),
                                       metadata=self.as_dict())

    def as_dict(self) -> dict:
        return {
            "mean_fpt": self.mean_fpt,
            "stderr": self.stderr,
            "n_escaped": self.n_escaped,
            "n_censored": self.n_censored,
            "censored": self.n_censored > 0,
            "implied_rate": self.implied_rate,
            "switching_rate": self.switching_rate,
            "rate_stderr": self.rate_stderr,
            "seed": self.seed,
            "lower_bound": self.lower_bound,
            **self.metadata,
        }


def _coefficients(params: ModelParams):
    G, d, eta = params.G, params.Delta, params.eta
    return 2 * G * (G - d), eta**2 / 4, 2 * eta, 2 * G * math.sqrt(eta)


def _increments(rng, substeps: int, n: int, dt: float) -> np.ndarray:
    z = rng.standard_normal((substeps, n))
    return z.sum(axis=0) * math.sqrt(dt / substeps)


def _em_step(x, w, dW, dt, coef):
    lin, quint, fric, amp = coef
    accel = -fric * x * x * w + lin * x - quint * x**5
    return x + w * dt, w + accel * dt + amp * x * dW


def _chunks(n: int):
    return [(start, min(CHUNK, n - start)) for start in range(0, n, CHUNK)]


def _check_config(config: LangevinConfig) -> None:
    if config.dt * config.stiffness() >= 0.1:
        warnings.warn(f"dt={config.dt:g} is large compared with the stiffest rate {config.stiffness():.3g}",
                      RuntimeWarning, stacklevel=3)


def _escape_times(config: LangevinConfig, x0: float, rng, n: int) -> np.ndarray:
    coef = _coefficients(config.params)
    amp_scale = config.noise_scale
    coef = coef[:3] + (coef[3] * amp_scale,)
    dt = config.dt
    n_steps = int(math.ceil(config.max_time / dt))
    x = np.full(n, x0)
    w = np.zeros(n)
    fpt = np.full(n, np.inf)
    alive = np.ones(n, dtype=bool)
    for step in range(1, n_steps + 1):
        # draw for every trajectory so the stream alignment does not depend on escapes
        dW = _increments(rng, config.noise_substeps, n, dt)
        xa, wa = _em_step(x[alive], w[alive], dW[alive], dt, coef)
        if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(wa))):
            raise NonFinite(f"Langevin integration diverged at t={step * dt:g}; reduce dt")
        x[alive], w[alive] = xa, wa
        crossed = alive.copy()
        crossed[alive] = xa <= 0
        fpt[crossed] = step * dt
        alive &= ~crossed
        if not alive.any():
            break
    return fpt


def simulate_escape(config: LangevinConfig) -> EscapeStatistics:
    """First-passage times from the right well ``x = +x0`` (at rest) to the saddle ``x = 0``."""
    _check_config(config)
    ep = wigner_effective_potential(config.params)
    if not math.isfinite(ep.x0):
        raise ValidationError("no double well: need Delta < G")
    seeds = np.random.SeedSequence(config.seed).spawn(len(_chunks(config.n_trajectories)))
    times = np.concatenate([
        _escape_times(config, ep.x0, np.random.Generator(np.random.PCG64(s)), size)
        for s, (_, size) in zip(seeds, _chunks(config.n_trajectories))
    ])
    escaped = times[np.isfinite(times)]
    n_cens = int(times.size - escaped.size)
    if escaped.size == 0:
        raise AllCensored(f"no trajectory escaped before t={config.max_time:g}")
    mean = float(escaped.mean())
    stderr = float(escaped.std(ddof=1) / math.sqrt(escaped.size)) if escaped.size > 1 else math.inf
    return EscapeStatistics(
        mean_fpt=mean,
        stderr=stderr,
        n_escaped=int(escaped.size),
        n_censored=n_cens,
        implied_rate=1.0 / (2.0 * mean),
        switching_rate=1.0 / mean,
        rate_stderr=stderr / (2.0 * mean * mean),
        seed=config.seed,
        lower_bound=n_cens > 0,
        metadata={
            "params": config.params.as_dict(),
            "dt": config.dt,
            "n": config.n_trajectories,
            "max_time": config.max_time,
            "generator": GENERATOR,
            "scheme": "euler-maruyama",
        },
    )


@dataclass
class StationaryHistogram:
    edges: np.ndarray
    density: np.ndarray  # normalized x histogram
    v_mean: float
    v_var: float
    n_samples: int

    def reference_density(self, params: ModelParams) -> np.ndarray:
        """Bin averages of ``exp(-V/T_eff)`` normalized over the histogram range."""
        fine = np.linspace(self.edges[0], self.edges[-1], 20 * (len(self.edges) - 1) + 1)
        ep = wigner_effective_potential(params, fine)
        boltz = np.exp(-(ep.V - np.min(ep.V)) / ep.T_eff)
        mids = 0.5 * (boltz[1:] + boltz[:-1]) * np.diff(fine)
        per_bin = mids.reshape(len(self.edges) - 1, 20).sum(axis=1)
        return per_bin / per_bin.sum() / np.diff(self.edges)


def sample_stationary_histogram(config: LangevinConfig, burn_in: float, n_samples: int,
                                bins: int = 60, x_range: tuple[float, float] | None = None,
                                stride: int = 10) -> StationaryHistogram:
    """Long-run x histogram and velocity moments of free-running (non-absorbed) walkers.

    Half the walkers start at ``+x0`` and half at ``-x0`` (both at the origin
    above the critical point). After ``burn_in`` time units every ``stride``-th
    step is recorded until ``n_samples`` samples per walker are collected.
    """
    if n_samples < 1 or burn_in < 0 or stride < 1:
        raise ValidationError("need n_samples >= 1, burn_in >= 0 and stride >= 1")
    _check_config(config)
    params = config.params
    ep = wigner_effective_potential(params)
    x0 = ep.x0 if math.isfinite(ep.x0) else 0.0
    if x_range is None:
        reach = 1.8 * x0 if x0 > 0 else 3.0 * (params.G / params.eta**2) ** (1 / 6) + 1.0
        x_range = (-reach, reach)
    edges = np.linspace(*x_range, bins + 1)
    counts = np.zeros(bins)
    v_sum = v_sq = 0.0
    total = 0
    coef = _coefficients(params)
    coef = coef[:3] + (coef[3] * config.noise_scale,)
    dt = config.dt
    burn_steps = int(math.ceil(burn_in / dt))
    seeds = np.random.SeedSequence(config.seed).spawn(len(_chunks(config.n_trajectories)))
    for s, (start, size) in zip(seeds, _chunks(config.n_trajectories)):
        rng = np.random.Generator(np.random.PCG64(s))
        idx = np.arange(start, start + size)
        x = np.where(idx % 2 == 0, x0, -x0).astype(float)
        w = np.zeros(size)
        for step in range(burn_steps + n_samples * stride):
            x, w = _em_step(x, w, _increments(rng, config.noise_substeps, size, dt), dt, coef)
            if step >= burn_steps and (step - burn_steps) % stride == stride - 1:
                counts += np.histogram(x, bins=edges)[0]
                v_sum += float(w.sum())
                v_sq += float((w * w).sum())
                total += size
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise NonFinite("Langevin integration diverged; reduce dt")
    density = counts / max(counts.sum(), 1) / np.diff(edges)
    v_mean = v_sum / total
    return StationaryHistogram(edges, density, v_mean, v_sq / total - v_mean**2, total)
