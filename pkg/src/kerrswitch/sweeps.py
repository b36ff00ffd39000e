"""Parameter sweeps over every rate method, optimal detuning and the critical ratio."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import kramers
from .errors import KerrSwitchError, PredicateNotBracketed, TruncationLeak, ValidationError
from .langevin import LangevinConfig, simulate_escape
from .liouvillian import default_truncation, liouvillian_gap
from .model import ModelParams, validate
from .rates import (KRAMERS_BARRIER, KRAMERS_FULL, LANGEVIN_MC, METHODS, NEAR_CRITICAL,
                    NUMERIC_GAP, SHORT_NAMES, SMALL_DETUNING, RateEstimate)

VARIABLES = ("Delta", "theta", "G", "U_over_eta")
OPTIMIZER_METHODS = (NUMERIC_GAP, KRAMERS_BARRIER)
DEFAULT_SCAN_POINTS = 120


@dataclass(frozen=True)
class GridAxis:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ValidationError("grid.count must be >= 2")
        if not self.start < self.stop:
            raise ValidationError("grid.start must be < grid.stop")
        if self.spacing not in ("linear", "log"):
            raise ValidationError(f"grid.spacing must be 'linear' or 'log', not {self.spacing!r}")
        if self.spacing == "log" and self.start <= 0:
            raise ValidationError("log spacing needs positive endpoints")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class LangevinSettings:
    dt: float = 1e-3
    n_trajectories: int = 2000
    max_time: float = 100.0


@dataclass(frozen=True)
class SweepSpec:
    """Sweep ``variable`` over ``grid`` with the other parameters taken from ``base``.

    For ``theta`` and ``U_over_eta`` sweeps ``|kappa2|`` is held at the value
    of ``base``; the point is rebuilt from polar form.
    """

    variable: str
    grid: GridAxis
    base: ModelParams
    methods: tuple[str, ...]
    N_override: int | None = None
    seed: int = 0
    langevin: LangevinSettings = LangevinSettings()

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValidationError(f"sweep variable must be one of {VARIABLES}, not {self.variable!r}")
        if not self.methods:
            raise ValidationError("a sweep needs at least one method")
        for m in self.methods:
            if m not in METHODS:
                raise ValidationError(f"unknown rate method {m!r}")
        validate(self.base)

    def point(self, value: float) -> ModelParams:
        b = self.base
        if self.variable == "Delta":
            return b.replace(Delta=float(value))
        if self.variable == "G":
            return b.replace(G=float(value))
        if self.variable == "theta":
            return ModelParams.from_polar(b.G, b.Delta, b.kappa2_modulus, float(value))
        return ModelParams.from_ratio(b.G, b.Delta, b.kappa2_modulus, float(value))


@dataclass
class SweepTable:
    columns: list[str]
    rows: list[list]
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def failures(self) -> int:
        return sum(1 for c in self.columns if c.startswith("status_")
                   for s in self.column(c) if s not in ("ok", "invalid", "retried"))

    def as_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1)[0])


def numeric_gap_with_retry(params: ModelParams, N: int | None = None) -> tuple[RateEstimate, bool]:
    """Numeric gap, retried once at ``N + 10`` on truncation leak. Returns ``(rate, retried)``."""
    N = default_truncation(params) if N is None else N
    try:
        return liouvillian_gap(params, N=N), False
    except TruncationLeak:
        return liouvillian_gap(params, N=N + 10), True


def evaluate(params: ModelParams, method: str, N: int | None = None, seed: int = 0,
             langevin: LangevinSettings = LangevinSettings()) -> tuple[RateEstimate, bool]:
    """One rate by one method; the flag is True when the numeric gap needed a retry."""
    if method == NUMERIC_GAP:
        return numeric_gap_with_retry(params, N)
    if method == KRAMERS_FULL:
        return kramers.rate_full(params)[0], False
    if method == KRAMERS_BARRIER:
        return kramers.rate_barrier(params), False
    if method == SMALL_DETUNING:
        return kramers.rate_small_detuning(params), False
    if method == NEAR_CRITICAL:
        return kramers.rate_near_critical(params), False
    if method == LANGEVIN_MC:
        cfg = LangevinConfig(params, dt=langevin.dt, n_trajectories=langevin.n_trajectories,
                             max_time=langevin.max_time, seed=seed)
        return simulate_escape(cfg).rate_estimate(), False
    raise ValidationError(f"unknown rate method {method!r}")


def _evaluate_row(task) -> list:
    index, value, spec = task
    params = spec.point(value)
    row = [float(value)]
    statuses = []
    for method in spec.methods:
        try:
            rate, retried = evaluate(params, method, spec.N_override, _point_seed(spec.seed, index), spec.langevin)
        except TruncationLeak:
            row.append(None)
            statuses.append("missing:TruncationLeak")
            continue
        except (KerrSwitchError, ValueError, ArithmeticError) as exc:
            row.append(None)
            statuses.append(f"error:{type(exc).__name__}")
            continue
        row.append(rate.value)
        statuses.append("retried" if retried else ("ok" if rate.valid else "invalid"))
    return row + statuses


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, workers: int | None = 1) -> SweepTable:
    """Evaluate every method at every grid point, in grid order.

    Failures are recorded per cell in ``status_<method>`` columns: ``ok``,
    ``invalid`` (formula outside its nominal regime), ``retried`` (numeric gap
    needed ``N + 10``), ``missing:TruncationLeak`` or ``error:<exception>``.
    ``workers=None`` uses every available core.
    """
    names = [SHORT_NAMES[m] for m in spec.methods]
    columns = [spec.variable] + [f"gamma_{n}" for n in names] + [f"status_{n}" for n in names]
    tasks = [(i, v, spec) for i, v in enumerate(spec.grid.values())]
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            rows = list(pool.map(_evaluate_row, tasks))
    else:
        rows = [_evaluate_row(t) for t in tasks]
    return SweepTable(columns, rows)


@dataclass
class OptimalDetuning:
    delta_opt: float
    log_gamma_min: float
    boundary: bool  # True when no interior minimum exists; delta_opt is then 0 by convention
    method: str
    delta_range: tuple[float, float]
    scan_delta: np.ndarray = field(repr=False)
    scan_log_gamma: np.ndarray = field(repr=False)

    @property
    def gamma_min(self) -> float:
        return math.exp(self.log_gamma_min) if self.log_gamma_min > -math.inf else 0.0

    def as_dict(self) -> dict:
        return {
            "delta_opt": self.delta_opt,
            "gamma_min": self.gamma_min,
            "log_gamma_min": self.log_gamma_min,
            "boundary": self.boundary,
            "method": self.method,
            "delta_range": list(self.delta_range),
        }


def _log_rate_function(base: ModelParams, method: str, N: int | None):
    if method not in OPTIMIZER_METHODS:
        raise ValidationError(f"optimal detuning supports {OPTIMIZER_METHODS}, not {method!r}")

    def f(delta: float) -> float:
        return evaluate(base.replace(Delta=float(delta)), method, N)[0].log_value
    return f


def _scan_task(task):
    base, method, N, delta = task
    try:
        return _log_rate_function(base, method, N)(delta)
    except (KerrSwitchError, ValueError, ArithmeticError):
        return math.nan


def interior_minima(values: np.ndarray) -> list[int]:
    """Indices of strict-left, weak-right local minima away from both ends."""
    return [i for i in range(1, len(values) - 1)
            if values[i] < values[i - 1] and values[i] <= values[i + 1]]


def refine_minimum(f, a: float, b: float, c: float, fb: float | None = None,
                   xtol: float = 1e-6) -> tuple[float, float]:
    """Golden-section search inside the bracket ``a < b < c`` with ``f(b)`` below both ends."""
    try:
        res = minimize_scalar(f, bracket=(a, b, c), method="golden", options={"xtol": xtol})
    except ValueError:
        return b, f(b) if fb is None else fb
    if not a <= res.x <= c:
        return b, f(b) if fb is None else fb
    return float(res.x), float(res.fun)


def find_optimal_detuning(base: ModelParams, method: str = KRAMERS_BARRIER,
                          delta_range: tuple[float, float] | None = None,
                          n_grid: int = DEFAULT_SCAN_POINTS, N: int | None = None,
                          workers: int = 1) -> OptimalDetuning:
    """Detuning of the lowest interior local minimum of ``Gamma(Delta)``.

    The rate vanishes at ``Delta = 0``, so the global minimum is always there.
    An interior minimum on the scan range is what marks the non-monotonic
    regime. Without one, ``delta_opt = 0`` and ``boundary = True``.
    Default range ``(0.2 |kappa2|, 0.98 G)``.
    """
    validate(base)
    lo, hi = delta_range if delta_range is not None else (0.2 * base.kappa2_modulus, 0.98 * base.G)
    if not 0 < lo < hi < base.G:
        raise ValidationError("the detuning range must lie inside (0, G)")
    f = _log_rate_function(base, method, N)
    deltas = np.linspace(lo, hi, n_grid)
    tasks = [(base, method, N, float(d)) for d in deltas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            logs = np.array(list(pool.map(_scan_task, tasks, chunksize=4)))
    else:
        logs = np.array([_scan_task(t) for t in tasks])
    candidates = [i for i in interior_minima(logs) if np.isfinite(logs[i - 1:i + 2]).all()]
    if not candidates:
        i = int(np.nanargmin(logs))
        return OptimalDetuning(0.0, float(logs[i]), True, method, (lo, hi), deltas, logs)
    best = min(candidates, key=lambda i: logs[i])
    x, fx = refine_minimum(f, deltas[best - 1], deltas[best], deltas[best + 1], logs[best])
    return OptimalDetuning(x, fx, False, method, (lo, hi), deltas, logs)


@dataclass
class CriticalRatio:
    ratio: float
    closed_form: float
    slope_root: float
    method: str
    bracket: tuple[float, float]
    evaluations: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "closed_form": self.closed_form,
            "slope_root": self.slope_root,
            "method": self.method,
            "bracket": list(self.bracket),
            "evaluations": [list(e) for e in self.evaluations],
        }


def find_critical_ratio(G: float, kappa_modulus: float = 1.0, method: str = NUMERIC_GAP,
                        bracket: tuple[float, float] = (0.1, 20.0), tol: float = 1e-2,
                        n_grid: int = DEFAULT_SCAN_POINTS, workers: int = 1) -> CriticalRatio:
    """Smallest ``U/eta`` at which ``Gamma(Delta)`` acquires an interior minimum, by bisection."""
    if not G > kappa_modulus > 0:
        raise ValidationError("critical ratio needs G > |kappa2| > 0")
    evaluations = []

    def interior(r: float) -> bool:
        base = ModelParams.from_ratio(G, 0.0, kappa_modulus, r)
        res = find_optimal_detuning(base, method, n_grid=n_grid, workers=workers)
        evaluations.append((r, not res.boundary, res.delta_opt))
        return not res.boundary

    lo, hi = bracket
    at_hi = interior(hi)
    if interior(lo) == at_hi:
        raise PredicateNotBracketed(f"interior-minimum predicate has the same value at U/eta = {lo} and {hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if interior(mid) == at_hi:
            hi = mid
        else:
            lo = mid
    return CriticalRatio(0.5 * (lo + hi), kramers.critical_ratio(G, kappa_modulus),
                         kramers.critical_ratio_from_slope(G, kappa_modulus), method, bracket, evaluations)
