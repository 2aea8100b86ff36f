"""Discrimination ellipsoid providers and gaze eccentricity.

A provider maps a linear RGB color and an eccentricity (degrees) to the
semi-axes ``(a, b, c)`` of an axis-aligned ellipsoid in DKL space. Three
providers are built in: :class:`ConstantModel`, :class:`LinearEccentricityModel`
and :class:`TableModel` (a grid loaded from a text file).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .colorspace import DEFAULT_TRANSFORM, DklColor, DklTransform, LinearColor, rgb_to_dkl

log = logging.getLogger(__name__)

TABLE_MAGIC = "PBDTABLE"
TABLE_VERSION = 1


class ModelFormatError(ValueError):
    """Malformed ellipsoid model file."""

    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            msg = f"line {lineno}: {msg}"
        super().__init__(msg)


@dataclass(frozen=True)
class DiscriminationEllipsoid:
    center: DklColor
    semi_axes: tuple

    def __post_init__(self):
        axes = tuple(float(x) for x in self.semi_axes)
        if len(axes) != 3 or any(not x >= 0 for x in axes):
            raise ValueError(f"semi-axes must be three non-negative reals, got {self.semi_axes!r}")
        object.__setattr__(self, "semi_axes", axes)

    @property
    def is_degenerate(self) -> bool:
        return min(self.semi_axes) == 0.0


@dataclass(frozen=True)
class DisplayGeometry:
    width_px: int
    height_px: int
    horizontal_fov_deg: float = 100.0
    vertical_fov_deg: float = 100.0

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("display dimensions must be positive")
        for fov in (self.horizontal_fov_deg, self.vertical_fov_deg):
            if not 0 < fov < 180:
                raise ValueError(f"field of view must lie in (0, 180), got {fov}")


@dataclass(frozen=True)
class GazePoint:
    x_px: float
    y_px: float


def eccentricity_of_pixel(p, g: GazePoint, d: DisplayGeometry) -> float:
    """Angular distance in degrees of pixel coordinate ``p = (x, y)`` from the gaze.

    Equiangular screen model: every pixel spans ``fov / size`` degrees.
    """
    dx = (p[0] - g.x_px) * d.horizontal_fov_deg / d.width_px
    dy = (p[1] - g.y_px) * d.vertical_fov_deg / d.height_px
    return min(90.0, math.hypot(dx, dy))


def eccentricity_map(height, width, g: GazePoint, d: DisplayGeometry) -> np.ndarray:
    """Eccentricity of every pixel center ``(x + 0.5, y + 0.5)``; shape (height, width)."""
    xs = (np.arange(width) + 0.5 - g.x_px) * (d.horizontal_fov_deg / d.width_px)
    ys = (np.arange(height) + 0.5 - g.y_px) * (d.vertical_fov_deg / d.height_px)
    return np.minimum(np.hypot(xs[None, :], ys[:, None]), 90.0)


class EllipsoidProvider:
    """Base class. Subclasses implement :meth:`axes`."""

    def axes(self, rgb, ecc) -> np.ndarray:
        """Semi-axes for linear colors ``rgb`` (..., 3) at eccentricities ``ecc`` (...)."""
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError


def _vec3(v, name):
    v = tuple(float(x) for x in v)
    if len(v) != 3 or any(not (x >= 0 and math.isfinite(x)) for x in v):
        raise ValueError(f"{name} must be three finite non-negative numbers")
    return v


@dataclass(frozen=True)
class ConstantModel(EllipsoidProvider):
    a: float
    b: float
    c: float

    def __post_init__(self):
        _vec3((self.a, self.b, self.c), "axes")

    def axes(self, rgb, ecc):
        shape = np.broadcast_shapes(np.shape(rgb)[:-1], np.shape(ecc))
        return np.broadcast_to(np.array([self.a, self.b, self.c], float), shape + (3,)).copy()

    def spec(self):
        return f"constant:{self.a!r},{self.b!r},{self.c!r}"


@dataclass(frozen=True)
class LinearEccentricityModel(EllipsoidProvider):
    """Axes grow linearly with eccentricity: ``base + slope * e``."""

    base: tuple
    slope: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", _vec3(self.base, "base"))
        object.__setattr__(self, "slope", _vec3(self.slope, "slope"))

    def axes(self, rgb, ecc):
        ecc = np.asarray(ecc, dtype=float)
        shape = np.broadcast_shapes(np.shape(rgb)[:-1], ecc.shape)
        ecc = np.broadcast_to(ecc, shape)
        return np.asarray(self.base) + np.asarray(self.slope) * ecc[..., None]

    def spec(self):
        vals = ",".join(repr(x) for x in self.base + self.slope)
        return f"linear:{vals}"


# Default peripheral model. Sized by its footprint in linear RGB: at 25 deg the
# Blue half-extent is ~0.02 (a few sRGB codes in mid-tones).
DEFAULT_MODEL = LinearEccentricityModel(base=(0.002, 0.002, 0.002), slope=(0.001, 0.001, 0.001))


class TableModel(EllipsoidProvider):
    """Multilinear interpolation over a (R, G, B, eccentricity) grid.

    Queries outside the grid are clamped to the nearest grid boundary
    (nearest-neighbour extrapolation) and a warning is logged. A grid axis
    with a single node means the model is constant along it; no warning.
    """

    def __init__(self, r, g, b, ecc, values, source=None):
        self.grid = tuple(np.asarray(x, dtype=float) for x in (r, g, b, ecc))
        for name, ax in zip("rgbe", self.grid):
            if ax.ndim != 1 or ax.size == 0:
                raise ModelFormatError("empty model")
            if np.any(np.diff(ax) <= 0):
                raise ModelFormatError(f"grid axis {name!r} is not strictly increasing")
        self.values = np.asarray(values, dtype=float).reshape(tuple(a.size for a in self.grid) + (3,))
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise ModelFormatError("semi-axes must be finite and non-negative")
        self.values.setflags(write=False)
        self.source = source

    def axes(self, rgb, ecc):
        rgb = np.asarray(rgb, dtype=float)
        ecc = np.asarray(ecc, dtype=float)
        shape = np.broadcast_shapes(rgb.shape[:-1], ecc.shape)
        coords = [np.broadcast_to(rgb[..., i], shape) for i in range(3)]
        coords.append(np.broadcast_to(ecc, shape))

        lo_idx, weights = [], []
        outside = False
        for ax, x in zip(self.grid, coords):
            if ax.size == 1:
                lo_idx.append(np.zeros(shape, dtype=np.intp))
                weights.append(np.zeros(shape))
                continue
            if np.any(x < ax[0]) or np.any(x > ax[-1]):
                outside = True
            xc = np.clip(x, ax[0], ax[-1])
            i = np.clip(np.searchsorted(ax, xc, side="right") - 1, 0, ax.size - 2)
            lo_idx.append(i)
            weights.append((xc - ax[i]) / (ax[i + 1] - ax[i]))
        if outside:
            log.warning("ellipsoid table queried outside its grid; clamping to nearest node")

        out = np.zeros(shape + (3,))
        for corner in range(16):
            w = np.ones(shape)
            idx = []
            for d in range(4):
                bit = (corner >> d) & 1
                if self.grid[d].size == 1:
                    if bit:
                        w = w * 0.0
                    idx.append(lo_idx[d])
                    continue
                w = w * (weights[d] if bit else 1.0 - weights[d])
                idx.append(lo_idx[d] + bit)
            out += w[..., None] * self.values[tuple(idx)]
        return out

    def spec(self):
        return f"table:{self.source}" if self.source else "table"


def ellipsoid_for(c: LinearColor, e: float, provider: EllipsoidProvider,
                  t: DklTransform = DEFAULT_TRANSFORM) -> DiscriminationEllipsoid:
    if e < 0:
        raise ValueError("eccentricity must be non-negative")
    axes = provider.axes(c.as_array(), e)
    return DiscriminationEllipsoid(rgb_to_dkl(c, t), tuple(axes))


def save_table_model(model: TableModel, path):
    r, g, b, e = model.grid
    lines = [f"{TABLE_MAGIC} {TABLE_VERSION}"]
    for name, ax in zip(("r", "g", "b", "ecc"), (r, g, b, e)):
        lines.append(name + " " + " ".join(repr(float(x)) for x in ax))
    for abc in model.values.reshape(-1, 3):
        lines.append(" ".join(repr(float(x)) for x in abc))
    Path(path).write_text("\n".join(lines) + "\n")


def load_table_model(path) -> TableModel:
    """Parse a table model file. See docs/formats.md for the layout."""
    rows = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise ModelFormatError("empty model")

    lineno, head = rows[0]
    if len(head) != 2 or head[0] != TABLE_MAGIC:
        raise ModelFormatError(f"expected '{TABLE_MAGIC} {TABLE_VERSION}' header", lineno)
    if head[1] != str(TABLE_VERSION):
        raise ModelFormatError(f"unsupported table version {head[1]}", lineno)

    grid = []
    for expect, (lineno, toks) in zip(("r", "g", "b", "ecc"), rows[1:5]):
        if toks[0] != expect:
            raise ModelFormatError(f"expected grid axis {expect!r}, got {toks[0]!r}", lineno)
        try:
            ax = [float(x) for x in toks[1:]]
        except ValueError as exc:
            raise ModelFormatError(str(exc), lineno) from None
        if not ax:
            raise ModelFormatError("empty model", lineno)
        if any(b <= a for a, b in zip(ax, ax[1:])):
            raise ModelFormatError(f"grid axis {expect!r} is not strictly increasing", lineno)
        grid.append(ax)
    if len(grid) < 4:
        raise ModelFormatError("empty model")

    n = math.prod(len(ax) for ax in grid)
    body = rows[5:]
    if len(body) != n:
        where = body[n][0] if len(body) > n else None
        raise ModelFormatError(f"expected {n} node rows, found {len(body)}", where)
    values = np.empty((n, 3))
    for k, (lineno, toks) in enumerate(body):
        if len(toks) != 3:
            raise ModelFormatError("node row must have exactly 3 values", lineno)
        try:
            abc = [float(x) for x in toks]
        except ValueError as exc:
            raise ModelFormatError(str(exc), lineno) from None
        if any(not (x >= 0 and math.isfinite(x)) for x in abc):
            raise ModelFormatError("semi-axes must be finite and non-negative", lineno)
        values[k] = abc
    return TableModel(*grid, values, source=str(path))


def provider_from_spec(spec: str) -> EllipsoidProvider:
    """Build a provider from a CLI string.

    ``default``, ``constant:a,b,c``, ``linear:a0,b0,c0,sa,sb,sc`` or
    ``table:PATH``.
    """
    kind, _, arg = spec.partition(":")
    if kind == "default":
        return DEFAULT_MODEL
    if kind == "table":
        return load_table_model(arg)
    try:
        nums = [float(x) for x in arg.split(",")] if arg else []
    except ValueError:
        raise ValueError(f"bad provider spec {spec!r}") from None
    if kind == "constant" and len(nums) == 3:
        return ConstantModel(*nums)
    if kind == "linear" and len(nums) == 6:
        return LinearEccentricityModel(nums[:3], nums[3:])
    raise ValueError(f"bad provider spec {spec!r}")
