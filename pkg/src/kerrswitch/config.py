"""Plain-text ``key = value`` configuration files.

One entry per line, ``#`` starts a comment, blank lines are ignored. Values
are converted to the type of the key; unknown keys are rejected.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ValidationError

FLOAT_KEYS = {"G", "Delta", "eta", "U", "kappa", "theta", "u_over_eta", "dt", "max_time",
              "grid.start", "grid.stop", "zero_tol", "radius", "near_critical_fraction",
              "x0", "p0", "lo", "hi", "tol"}
INT_KEYS = {"N", "seed", "grid.count", "n_trajectories", "workers", "n", "steps", "n_grid"}
STR_KEYS = {"grid.spacing", "variable", "method", "format"}
LIST_KEYS = {"methods"}
KNOWN_KEYS = FLOAT_KEYS | INT_KEYS | STR_KEYS | LIST_KEYS


def convert(key: str, raw: str):
    try:
        if key in FLOAT_KEYS:
            return float(raw)
        if key in INT_KEYS:
            return int(raw)
    except ValueError:
        raise ValidationError(f"config key {key!r}: cannot parse {raw!r}") from None
    if key in LIST_KEYS:
        return [item.strip() for item in raw.split(",") if item.strip()]
    if key in STR_KEYS:
        return raw
    raise ValidationError(f"unknown config key {key!r}")


def parse_config(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        out[key] = convert(key, raw)
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def merge(defaults: dict, file_values: dict, flags: dict) -> dict:
    """Flag beats file beats default; ``None`` flags count as unset."""
    merged = dict(defaults)
    merged.update(file_values)
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged
