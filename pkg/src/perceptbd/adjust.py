"""Per-tile color adjustment inside discrimination ellipsoids.

For one channel (Red or Blue) every pixel can slide along its extrema vector
between ``low[axis]`` and ``high[axis]``. With

    HL = max_i low_i[axis]     (highest of the lows)
    LH = min_i high_i[axis]    (lowest of the highs)

the smallest reachable channel range is ``max(0, HL - LH)``:

* C1, ``HL > LH``: pixels above HL move down to HL, pixels below LH move up to
  LH, the rest stay put.
* C2, ``HL <= LH``: every pixel moves to the common plane ``(HL + LH) / 2``.

Both axes are tried and the candidate (or the untouched tile) with the fewest
encoded bits wins; ties go Blue, then Red, then untouched.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .codec import EncodedTile, bits_of, encode_tile, tile_bits_array
from .colorspace import DEFAULT_TRANSFORM, DklTransform, LinearColor, linear_to_srgb, rgb_to_dkl_array
from .geometry import Axis, ExtremaPair, extrema_arrays
from .perception import DiscriminationEllipsoid


class Case(str, enum.Enum):
    C1 = "C1"
    C2 = "C2"
    SKIPPED = "Skipped"


# candidate order doubles as the tie-break order
CANDIDATES = (Axis.BLUE, Axis.RED, None)


@dataclass(frozen=True, eq=False)
class Tile:
    pixels: np.ndarray  # (N, 3) linear RGB, row-major
    tile_size: int

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float).reshape(-1, 3)
        if px.shape[0] != self.tile_size ** 2:
            raise ValueError(f"expected {self.tile_size ** 2} pixels, got {px.shape[0]}")
        if np.any(px < 0) or np.any(px > 1):
            raise ValueError("tile pixels must be in gamut")
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_colors(cls, colors: Sequence[LinearColor], tile_size: int) -> "Tile":
        return cls(np.array([c.as_array() for c in colors]), tile_size)


@dataclass(frozen=True, eq=False)
class AdjustedTile:
    pixels: np.ndarray
    chosen_axis: Axis | None
    case_tag: Case
    clamped: bool = False

    def srgb(self) -> np.ndarray:
        return linear_to_srgb(self.pixels)


@dataclass(frozen=True)
class PlanePair:
    hl: float
    lh: float
    axis: Axis

    @property
    def case(self) -> Case:
        return Case.C1 if self.hl > self.lh else Case.C2


def compute_planes(extrema: Sequence[ExtremaPair]) -> PlanePair:
    if not extrema:
        raise ValueError("compute_planes needs at least one extrema pair")
    axis = extrema[0].axis
    if any(e.axis != axis for e in extrema):
        raise ValueError("extrema pairs must share one axis")
    hl = max(float(e.low[axis]) for e in extrema)
    lh = min(float(e.high[axis]) for e in extrema)
    return PlanePair(hl, lh, axis)


def shift_along_extrema(pixels, high, low, axis):
    """Core move for tiles (T, N, 3). Returns (moved, is_c2, clamped) per tile."""
    v = pixels[..., axis]
    hi = high[..., axis]
    lo = low[..., axis]
    hl = lo.max(axis=-1)
    lh = hi.min(axis=-1)
    c2 = hl <= lh

    mid = 0.5 * (hl + lh)
    target = np.where(
        c2[:, None],
        mid[:, None],
        np.where(v > hl[:, None], hl[:, None], np.where(v < lh[:, None], lh[:, None], v)),
    )

    up = target > v
    down = target < v
    with np.errstate(divide="ignore", invalid="ignore"):
        tau_up = np.where(up & (hi > v), (target - v) / (hi - v), 0.0)
        tau_dn = np.where(down & (v > lo), (v - target) / (v - lo), 0.0)
    tau = np.clip(np.where(up, tau_up, tau_dn), 0.0, 1.0)
    end = np.where(up[..., None], high, low)
    d = tau[..., None] * (end - pixels)

    # shorten the move so the point stays inside [0, 1]^3
    with np.errstate(divide="ignore", invalid="ignore"):
        lim = np.where(d > 0, (1.0 - pixels) / d, np.where(d < 0, -pixels / d, np.inf))
    lam = np.clip(lim.min(axis=-1), 0.0, 1.0)
    clamped = (lam < 1.0).any(axis=-1)
    moved = np.clip(pixels + lam[..., None] * d, 0.0, 1.0)
    return moved, c2, clamped


def adjust_tiles(pixels, centers, axes, transform: DklTransform = DEFAULT_TRANSFORM):
    """Adjust many tiles at once.

    ``pixels`` is (T, N, 3) linear RGB, ``centers`` and ``axes`` the matching
    DKL ellipsoids. Returns a dict with ``srgb`` (T, N, 3) uint8 of the winning
    candidate, ``linear`` (its float values), ``choice`` (index into
    :data:`CANDIDATES`), ``c2``, ``clamped`` and ``bits``.
    """
    pixels = np.asarray(pixels, dtype=float)
    outs, srgbs, c2s, clamps, costs = [], [], [], [], []
    for axis in CANDIDATES:
        if axis is None:
            moved, c2, cl = pixels, np.zeros(len(pixels), bool), np.zeros(len(pixels), bool)
        else:
            high, low = extrema_arrays(centers, axes, axis, transform)
            moved, c2, cl = shift_along_extrema(pixels, high, low, axis)
        s = linear_to_srgb(moved)
        outs.append(moved)
        srgbs.append(s)
        c2s.append(c2)
        clamps.append(cl)
        costs.append(tile_bits_array(s))
    costs = np.stack(costs)
    choice = np.argmin(costs, axis=0)
    idx = np.arange(len(pixels))
    return {
        "srgb": np.stack(srgbs)[choice, idx],
        "linear": np.stack(outs)[choice, idx],
        "choice": choice,
        "c2": np.stack(c2s)[choice, idx],
        "clamped": np.stack(clamps)[choice, idx],
        "bits": costs[choice, idx],
    }


def _ellipsoid_arrays(t: Tile, ellipsoids, transform):
    if len(ellipsoids) != len(t.pixels):
        raise ValueError(f"{len(t.pixels)} pixels but {len(ellipsoids)} ellipsoids")
    centers = np.array([e.center.as_array() for e in ellipsoids])
    axes = np.array([e.semi_axes for e in ellipsoids], dtype=float)
    expect = rgb_to_dkl_array(t.pixels, transform)
    if not np.allclose(centers, expect, rtol=1e-9, atol=1e-9):
        raise ValueError("ellipsoid centers must be the DKL images of the tile pixels")
    return centers, axes


def adjust_tile_axis(t: Tile, ellipsoids: Sequence[DiscriminationEllipsoid], axis,
                     transform: DklTransform = DEFAULT_TRANSFORM) -> AdjustedTile:
    axis = Axis(axis)
    centers, axes = _ellipsoid_arrays(t, ellipsoids, transform)
    high, low = extrema_arrays(centers, axes, axis, transform)
    moved, c2, clamped = shift_along_extrema(t.pixels[None], high[None], low[None], axis)
    return AdjustedTile(moved[0], axis, Case.C2 if c2[0] else Case.C1, bool(clamped[0]))


def adjust_tile(t: Tile, ellipsoids: Sequence[DiscriminationEllipsoid],
                codec_cost: Callable[[EncodedTile], int] = bits_of,
                transform: DklTransform = DEFAULT_TRANSFORM) -> AdjustedTile:
    """Best of Blue, Red and the untouched tile by ``codec_cost`` of the sRGB result."""
    n = t.tile_size
    best, best_cost = None, None
    for axis in CANDIDATES:
        if axis is None:
            cand = AdjustedTile(t.pixels.copy(), None, Case.SKIPPED)
        else:
            cand = adjust_tile_axis(t, ellipsoids, axis, transform)
        cost = codec_cost(encode_tile(cand.srgb().reshape(n, n, 3)))
        if best_cost is None or cost < best_cost:
            best, best_cost = cand, cost
    return best
