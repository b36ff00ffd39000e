"""Regular (x, p) grids and their binary raster encoding.

Raster layout (little-endian)::

    8 bytes   magic  b"KSWGRID1"
    uint32    nx
    uint32    np
    uint32    ncomp      1 for scalar fields, 2 for drift vectors
    uint32    reserved   always 0
    float64   x_min, x_max, p_min, p_max
    float64   nx * np * ncomp values, row-major: x index slowest, component fastest
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ValidationError

RASTER_MAGIC = b"KSWGRID1"
_HEADER = struct.Struct("<8s4I4d")


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    nx: int
    p_min: float
    p_max: float
    np: int

    def __post_init__(self):
        if self.nx < 1 or self.np < 1:
            raise ValidationError("grid needs at least one node per axis")
        if (self.nx > 1 and not self.x_max > self.x_min) or (self.np > 1 and not self.p_max > self.p_min):
            raise ValidationError("grid axes must be increasing")

    @classmethod
    def square(cls, radius: float, n: int) -> "GridSpec":
        return cls(-radius, radius, n, -radius, radius, n)

    def x_axis(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    def p_axis(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x_axis(), self.p_axis(), indexing="ij")


@dataclass
class PhaseSpaceGrid:
    """Field sampled on a grid; ``values[i, j]`` belongs to ``(x_axis[i], p_axis[j])``."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    kind: str = "wigner"
    metadata: dict[str, Any] = field(default_factory=dict)

    def rows(self):
        """Yield flat ``(x, p, *components)`` tuples in row-major order."""
        vals = self.values if self.values.ndim == 3 else self.values[..., None]
        for i, x in enumerate(self.x_axis):
            for j, p in enumerate(self.p_axis):
                yield (float(x), float(p), *(float(v) for v in vals[i, j]))

    def to_raster(self) -> bytes:
        vals = self.values if self.values.ndim == 3 else self.values[..., None]
        nx, np_, ncomp = vals.shape
        header = _HEADER.pack(RASTER_MAGIC, nx, np_, ncomp, 0,
                              float(self.x_axis[0]), float(self.x_axis[-1]),
                              float(self.p_axis[0]), float(self.p_axis[-1]))
        return header + np.ascontiguousarray(vals, dtype="<f8").tobytes()

    @classmethod
    def from_raster(cls, data: bytes, kind: str = "wigner") -> "PhaseSpaceGrid":
        magic, nx, np_, ncomp, _, x0, x1, p0, p1 = _HEADER.unpack_from(data)
        if magic != RASTER_MAGIC:
            raise ValueError("not a phase-space raster")
        vals = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(nx, np_, ncomp)
        if ncomp == 1:
            vals = vals[..., 0]
        return cls(np.linspace(x0, x1, nx), np.linspace(p0, p1, np_), vals.copy(), kind=kind)
