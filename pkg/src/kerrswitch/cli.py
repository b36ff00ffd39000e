"""Command-line entry point.

Every subcommand reads parameters from flags, then an optional ``--config``
file, then built-in defaults, in that order of precedence. The effective
configuration is echoed into the metadata of every JSON output.

Exit codes: 0 success, 2 invalid input or a failed computation, 3 some
points of a multi-point run failed (the output is still written), 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import kramers, wigner as wig
from .config import load_config, merge
from .emit import csv_text, json_text, metadata_block, write_bytes, write_text
from .errors import KerrSwitchError
from .grids import GridSpec
from .langevin import LangevinConfig, simulate_escape
from .liouvillian import (DEFAULT_ZERO_TOL, build_liouvillian, default_truncation, liouvillian_gap,
                          spectrum)
from .model import DEFAULT_NEAR_CRITICAL_FRACTION, ModelParams, classify_regime
from .rates import (KRAMERS_BARRIER, KRAMERS_FULL, LANGEVIN_MC, METHODS, NEAR_CRITICAL, NUMERIC_GAP,
                    SHORT_NAMES, SMALL_DETUNING)
from .semiclassical import QuadratureState, fixed_points, integrate_trajectory, vector_field_grid
from .sweeps import (GridAxis, LangevinSettings, SweepSpec, default_workers, evaluate,
                     find_critical_ratio, find_optimal_detuning, run_sweep)

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL, EXIT_IO = 0, 2, 3, 4

DEFAULTS = {"G": 6.0, "Delta": 3.0, "eta": 1.0, "U": 0.0, "seed": 0}
POINT_METHODS = [NUMERIC_GAP, KRAMERS_FULL, KRAMERS_BARRIER, SMALL_DETUNING, NEAR_CRITICAL]
_SHORT_TO_METHOD = {v: k for k, v in SHORT_NAMES.items()}


def _method(name: str) -> str:
    name = name.strip()
    return _SHORT_TO_METHOD.get(name, name)


def _methods(value) -> list[str]:
    items = value.split(",") if isinstance(value, str) else value
    out = [_method(m) for m in items if m.strip()]
    for m in out:
        if m not in METHODS:
            raise KerrSwitchError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    return out


def _add_common(p: argparse.ArgumentParser, fmt_choices, fmt_default):
    g = p.add_argument_group("model parameters")
    g.add_argument("--G", type=float, help="two-photon pump rate (default 6)")
    g.add_argument("--Delta", type=float, help="detuning (default 3)")
    g.add_argument("--eta", type=float, help="two-photon loss rate (default 1)")
    g.add_argument("--U", type=float, help="Kerr nonlinearity (default 0)")
    g.add_argument("--kappa", type=float, help="|kappa2|, used with --theta or --u-over-eta")
    g.add_argument("--theta", type=float, help="arctan(U/eta); overrides --eta/--U")
    g.add_argument("--u-over-eta", dest="u_over_eta", type=float, help="U/eta; overrides --eta/--U")
    p.add_argument("--config", help="key = value parameter file")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.add_argument("--format", choices=fmt_choices, help=f"output format (default {fmt_default})")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from JSON metadata")
    p.set_defaults(format_default=fmt_default)


def _add_grid(p, start=None, stop=None, count=None):
    p.add_argument("--start", dest="grid.start", type=float, help=f"grid start{'' if start is None else f' (default {start})'}")
    p.add_argument("--stop", dest="grid.stop", type=float, help=f"grid stop{'' if stop is None else f' (default {stop})'}")
    p.add_argument("--count", dest="grid.count", type=int, help=f"grid points{'' if count is None else f' (default {count})'}")
    p.add_argument("--spacing", dest="grid.spacing", choices=("linear", "log"), help="grid spacing (default linear)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrswitch", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixed-points", help="semiclassical fixed points, stability and regime")
    _add_common(p, ("json",), "json")
    p.add_argument("--near-critical-fraction", dest="near_critical_fraction", type=float)

    p = sub.add_parser("phase-portrait", help="drift field on a grid, or one RK4 trajectory")
    _add_common(p, ("csv", "json", "raster"), "csv")
    p.add_argument("--radius", type=float, help="half-width of the square grid (default: cat radius + 5)")
    p.add_argument("--n", type=int, help="nodes per axis (default 21)")
    p.add_argument("--x0", type=float, help="start a trajectory at (x0, p0) instead of emitting the grid")
    p.add_argument("--p0", type=float)
    p.add_argument("--dt", type=float, help="trajectory step (default 1e-3)")
    p.add_argument("--steps", type=int, help="trajectory steps (default 10000)")

    p = sub.add_parser("wigner", help="steady-state Wigner function on a grid")
    _add_common(p, ("csv", "json", "raster"), "csv")
    p.add_argument("--radius", type=float, help="half-width of the square grid (default: cat radius + 5)")
    p.add_argument("--n", type=int, help="nodes per axis (default 101)")

    p = sub.add_parser("gap", help="numeric Liouvillian gap")
    _add_common(p, ("json",), "json")
    p.add_argument("--N", type=int, help="Fock truncation (default adaptive)")
    p.add_argument("--zero-tol", dest="zero_tol", type=float, help=f"relative zero threshold (default {DEFAULT_ZERO_TOL:g})")
    p.add_argument("--solver", choices=("arnoldi", "dense"), default="arnoldi")
    p.add_argument("--full-spectrum", action="store_true", help="also emit every eigenvalue (dense, slow)")

    p = sub.add_parser("rate", help="switching rate at one point by several methods")
    _add_common(p, ("json",), "json")
    p.add_argument("--methods", help="comma list (default: all but langevin-mc)")
    p.add_argument("--N", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--n-trajectories", dest="n_trajectories", type=int)
    p.add_argument("--max-time", dest="max_time", type=float)

    p = sub.add_parser("sweep", help="rates of several methods along one parameter")
    _add_common(p, ("csv", "json"), "csv")
    p.add_argument("--variable", choices=("Delta", "theta", "G", "U_over_eta"), help="swept parameter (default Delta)")
    _add_grid(p)
    p.add_argument("--methods", help="comma list (default numeric-gap,kramers-barrier)")
    p.add_argument("--N", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="processes (default: available cores)")
    p.add_argument("--dt", type=float)
    p.add_argument("--n-trajectories", dest="n_trajectories", type=int)
    p.add_argument("--max-time", dest="max_time", type=float)

    p = sub.add_parser("optimal-detuning", help="detuning of the interior minimum of the rate")
    _add_common(p, ("json",), "json")
    p.add_argument("--method", help="numeric-gap or kramers-barrier (default)")
    p.add_argument("--start", dest="grid.start", type=float, help="scan start (default 0.2 |kappa2|)")
    p.add_argument("--stop", dest="grid.stop", type=float, help="scan stop (default 0.98 G)")
    p.add_argument("--n-grid", dest="n_grid", type=int, help="scan points (default 120)")
    p.add_argument("--N", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("critical-ratio", help="U/eta at which the rate turns non-monotonic")
    _add_common(p, ("json",), "json")
    p.add_argument("--method", help="numeric-gap (default) or kramers-barrier")
    p.add_argument("--lo", type=float, help="bracket low end (default 0.1)")
    p.add_argument("--hi", type=float, help="bracket high end (default 20)")
    p.add_argument("--tol", type=float, help="bracket tolerance (default 0.01)")
    p.add_argument("--n-grid", dest="n_grid", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("barrier", help="barrier height and prefactor against detuning")
    _add_common(p, ("csv", "json"), "csv")
    _add_grid(p, "0.2 |kappa2|", "0.98 G", 50)

    p = sub.add_parser("langevin", help="Monte-Carlo first-passage rate of the near-critical model")
    _add_common(p, ("json",), "json")
    p.add_argument("--dt", type=float, help="step (default 1e-3)")
    p.add_argument("--n-trajectories", dest="n_trajectories", type=int, help="ensemble size (default 2000)")
    p.add_argument("--max-time", dest="max_time", type=float, help="censoring time (default 100)")
    p.add_argument("--seed", type=int)
    return parser


_NON_CONFIG = {"command", "config", "output", "format", "no_timestamp", "format_default",
               "solver", "full_spectrum"}


def _effective_config(ns) -> dict:
    flags = {k: v for k, v in vars(ns).items() if k not in _NON_CONFIG}
    file_values = load_config(ns.config) if ns.config else {}
    cfg = merge(DEFAULTS, file_values, flags)
    cfg = {k: v for k, v in cfg.items() if v is not None}
    if ns.command in ("gap", "rate") and "solver" in vars(ns):
        cfg["solver"] = ns.solver
    return dict(sorted(cfg.items()))


def _params(cfg: dict) -> ModelParams:
    if "theta" in cfg or "u_over_eta" in cfg:
        kappa = cfg.get("kappa", math.hypot(cfg["eta"], cfg["U"]))
        if "theta" in cfg:
            return ModelParams.from_polar(cfg["G"], cfg["Delta"], kappa, cfg["theta"])
        return ModelParams.from_ratio(cfg["G"], cfg["Delta"], kappa, cfg["u_over_eta"])
    return ModelParams(cfg["G"], cfg["Delta"], cfg["eta"], cfg["U"])


class _Out:
    def __init__(self, ns, cfg):
        self.path = ns.output
        self.fmt = ns.format or cfg.get("format") or ns.format_default
        self.cfg = cfg
        self.timestamp = not ns.no_timestamp

    def json(self, record: dict):
        write_text(json_text(record, metadata_block(self.cfg, self.cfg.get("seed"), self.timestamp)), self.path)

    def table(self, columns, rows, extra: dict | None = None):
        if self.fmt == "json":
            record = {"columns": list(columns), "rows": [list(r) for r in rows]}
            record.update(extra or {})
            self.json(record)
        else:
            write_text(csv_text(columns, rows), self.path)

    def grid(self, grid, columns, extra: dict | None = None):
        if self.fmt == "raster":
            write_bytes(grid.to_raster(), self.path)
        elif self.fmt == "json":
            record = {"x_axis": grid.x_axis, "p_axis": grid.p_axis, "values": grid.values}
            record.update(extra or {})
            self.json(record)
        else:
            write_text(csv_text(columns, grid.rows()), self.path)


def _cmd_fixed_points(cfg, out):
    params = _params(cfg)
    fps = fixed_points(params)
    regime = classify_regime(params, cfg.get("near_critical_fraction", DEFAULT_NEAR_CRITICAL_FRACTION))
    q = fps.quadratures
    out.json({
        "params": params.as_dict(),
        "kappa2_modulus": params.kappa2_modulus,
        "kappa2_phase": params.kappa2_phase,
        "n0": fps.n0,
        "theta0": fps.theta0,
        "alpha0": fps.alpha0,
        "quadratures": [q.x, q.p],
        "saddle": {"eigenvalues": list(fps.saddle.eigenvalues), "label": fps.saddle.label},
        "nontrivial": None if fps.nontrivial is None else
        {"eigenvalues": list(fps.nontrivial.eigenvalues), "label": fps.nontrivial.label},
        "regime": regime.__dict__,
    })
    return EXIT_OK


def _default_radius(params: ModelParams) -> float:
    return math.sqrt(2 * (fixed_points(params).n0 + 1)) + 5


def _cmd_phase_portrait(cfg, out):
    params = _params(cfg)
    if "x0" in cfg or "p0" in cfg:
        dt = cfg.get("dt", 1e-3)
        traj = integrate_trajectory(params, QuadratureState(cfg.get("x0", 0.0), cfg.get("p0", 0.0)),
                                    dt, cfg.get("steps", 10_000))
        t = dt * np.arange(len(traj))
        rows = [(float(a), float(b), float(c)) for a, b, c in zip(t, traj[:, 0], traj[:, 1])]
        out.fmt = "json" if out.fmt == "json" else "csv"
        out.table(["t", "x", "p"], rows)
        return EXIT_OK
    spec = GridSpec.square(cfg.get("radius", _default_radius(params)), cfg.get("n", 21))
    out.grid(vector_field_grid(params, spec), ["x", "p", "dx", "dp"], {"params": params.as_dict()})
    return EXIT_OK


def _cmd_wigner(cfg, out):
    params = _params(cfg)
    spec = GridSpec.square(cfg.get("radius", wig.default_grid(params).x_max), cfg.get("n", 101))
    grid = wig.wigner_grid(params, spec)
    extra = {"params": params.as_dict(), "normalization": wig.integrate_grid(grid),
             "peaks": [list(pk) for pk in wig.wigner_peaks(params, grid)]}
    out.grid(grid, ["x", "p", "W"], extra)
    return EXIT_OK


def _cmd_gap(cfg, out, ns):
    params = _params(cfg)
    zero_tol = cfg.get("zero_tol", DEFAULT_ZERO_TOL)
    N = cfg.get("N", default_truncation(params))
    rate = liouvillian_gap(params, N=N, zero_tol=zero_tol, solver=ns.solver)
    record = {"params": params.as_dict(), **rate.as_dict()}
    if ns.full_spectrum:
        record["spectrum"] = spectrum(build_liouvillian(params, N), zero_tol).as_dict()
    out.json(record)
    return EXIT_OK


def _langevin_settings(cfg) -> LangevinSettings:
    return LangevinSettings(cfg.get("dt", 1e-3), cfg.get("n_trajectories", 2000), cfg.get("max_time", 100.0))


def _cmd_rate(cfg, out):
    params = _params(cfg)
    methods = _methods(cfg.get("methods", POINT_METHODS))
    results, failed = {}, False
    for m in methods:
        try:
            if m == KRAMERS_FULL:
                rate, breakdown = kramers.rate_full(params)
                results[m] = {**rate.as_dict(), "breakdown": breakdown.as_dict()}
                continue
            rate, retried = evaluate(params, m, cfg.get("N"), cfg.get("seed", 0), _langevin_settings(cfg))
            results[m] = {**rate.as_dict(), "retried": retried}
        except (KerrSwitchError, ValueError, ArithmeticError) as exc:
            failed = True
            results[m] = {"method": m, "error": type(exc).__name__, "message": str(exc)}
    out.json({"params": params.as_dict(), "rates": results})
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_sweep(cfg, out):
    params = _params(cfg)
    variable = cfg.get("variable", "Delta")
    if variable == "Delta":
        start, stop = 0.2 * params.kappa2_modulus, 0.98 * params.G
    elif variable == "theta":
        start, stop = 0.0, 0.45 * math.pi
    elif variable == "U_over_eta":
        start, stop = 0.1, 20.0
    else:
        start, stop = 2.0, 10.0
    axis = GridAxis(cfg.get("grid.start", start), cfg.get("grid.stop", stop), cfg.get("grid.count", 20),
                    cfg.get("grid.spacing", "linear"))
    spec = SweepSpec(variable, axis, params, tuple(_methods(cfg.get("methods", [NUMERIC_GAP, KRAMERS_BARRIER]))),
                     N_override=cfg.get("N"), seed=cfg.get("seed", 0), langevin=_langevin_settings(cfg))
    table = run_sweep(spec, workers=cfg.get("workers", default_workers()))
    out.table(table.columns, table.rows)
    return EXIT_PARTIAL if table.failures() else EXIT_OK


def _cmd_optimal_detuning(cfg, out):
    params = _params(cfg)
    method = _method(cfg.get("method", KRAMERS_BARRIER))
    rng = None
    if "grid.start" in cfg or "grid.stop" in cfg:
        rng = (cfg.get("grid.start", 0.2 * params.kappa2_modulus), cfg.get("grid.stop", 0.98 * params.G))
    res = find_optimal_detuning(params, method, rng, n_grid=cfg.get("n_grid", 120), N=cfg.get("N"),
                                workers=cfg.get("workers", 1))
    out.json({"params": params.as_dict(), **res.as_dict(),
              "scan": {"Delta": res.scan_delta, "log_gamma": res.scan_log_gamma}})
    return EXIT_OK


def _cmd_critical_ratio(cfg, out):
    params = _params(cfg)
    method = _method(cfg.get("method", NUMERIC_GAP))
    res = find_critical_ratio(params.G, params.kappa2_modulus, method, (cfg.get("lo", 0.1), cfg.get("hi", 20.0)),
                              cfg.get("tol", 1e-2), cfg.get("n_grid", 120), cfg.get("workers", 1))
    out.json({"G": params.G, "kappa2_modulus": params.kappa2_modulus, **res.as_dict(),
              "asymptote": kramers.critical_ratio_asymptote(params.G, params.kappa2_modulus)})
    return EXIT_OK


def _cmd_barrier(cfg, out):
    params = _params(cfg)
    axis = GridAxis(cfg.get("grid.start", 0.2 * params.kappa2_modulus), cfg.get("grid.stop", 0.98 * params.G),
                    cfg.get("grid.count", 50), cfg.get("grid.spacing", "linear"))
    rows, failed = [], False
    for d in axis.values():
        p = params.replace(Delta=float(d))
        try:
            rate = kramers.rate_barrier(p)
            rows.append([float(d), rate.metadata["delta_phi"], kramers.log_prefactor_B(p), rate.value,
                         "ok" if rate.valid else "invalid"])
        except KerrSwitchError as exc:
            failed = True
            rows.append([float(d), None, None, None, f"error:{type(exc).__name__}"])
    out.table(["Delta", "delta_phi", "log_prefactor_B", "gamma_barrier", "status_barrier"], rows)
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_langevin(cfg, out):
    params = _params(cfg)
    lc = LangevinConfig(params, dt=cfg.get("dt", 1e-3), n_trajectories=cfg.get("n_trajectories", 2000),
                        max_time=cfg.get("max_time", 100.0), seed=cfg.get("seed", 0))
    stats = simulate_escape(lc)
    out.json({**stats.as_dict(), "reference": {
        NEAR_CRITICAL: kramers.rate_near_critical(params.replace(U=0.0)).value,
        "arrhenius": kramers.arrhenius_rate(params.replace(U=0.0)),
    }, "method": LANGEVIN_MC})
    return EXIT_OK


COMMANDS = {
    "fixed-points": _cmd_fixed_points,
    "phase-portrait": _cmd_phase_portrait,
    "wigner": _cmd_wigner,
    "rate": _cmd_rate,
    "sweep": _cmd_sweep,
    "optimal-detuning": _cmd_optimal_detuning,
    "critical-ratio": _cmd_critical_ratio,
    "barrier": _cmd_barrier,
    "langevin": _cmd_langevin,
}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = _effective_config(ns)
        out = _Out(ns, cfg)
        if ns.command == "gap":
            return _cmd_gap(cfg, out, ns)
        return COMMANDS[ns.command](cfg, out)
    except OSError as exc:
        print(f"kerrswitch: {exc}", file=sys.stderr)
        return EXIT_IO
    except (KerrSwitchError, ValueError, ArithmeticError) as exc:
        print(f"kerrswitch: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
