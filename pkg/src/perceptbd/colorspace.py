"""Conversions between 8-bit sRGB, linear RGB and DKL.

All arithmetic is float64. Quantization happens only when going to sRGB.

The DKL matrix is stored in the DKL -> linear RGB orientation::

    [R, G, B]^T = M @ [K1, K2, K3]^T

and its inverse is precomputed once per :class:`DklTransform`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# sRGB transfer function constants
_LIN_THRESHOLD = 0.0031308
_ENC_THRESHOLD = 0.04045
_SLOPE = 12.92
_A = 0.055
_GAMMA = 2.4

DKL_TO_RGB = np.array(
    [
        [0.14, 0.17, 0.00],
        [-0.21, -0.71, -0.07],
        [0.21, 0.72, 0.07],
    ]
)


@dataclass(frozen=True)
class SrgbColor:
    r: int
    g: int
    b: int

    def __post_init__(self):
        for v in (self.r, self.g, self.b):
            if not 0 <= int(v) <= 255 or int(v) != v:
                raise ValueError(f"sRGB channel out of range: {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.uint8)


@dataclass(frozen=True)
class LinearColor:
    """Linear RGB color; channels are clamped to [0, 1] on construction."""

    r: float
    g: float
    b: float

    def __post_init__(self):
        for name in ("r", "g", "b"):
            object.__setattr__(self, name, min(1.0, max(0.0, float(getattr(self, name)))))

    @classmethod
    def from_array(cls, a) -> "LinearColor":
        return cls(*np.asarray(a, dtype=float))

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b])


@dataclass(frozen=True)
class DklColor:
    k1: float
    k2: float
    k3: float

    @classmethod
    def from_array(cls, a) -> "DklColor":
        return cls(*(float(x) for x in a))

    def as_array(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3])


@dataclass(frozen=True, eq=False)
class DklTransform:
    m: np.ndarray = field(default_factory=lambda: DKL_TO_RGB.copy())
    m_inv: np.ndarray = None

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("DKL matrix must be 3x3")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        if self.m_inv is None:
            inv = np.linalg.inv(m)
        else:
            inv = np.array(self.m_inv, dtype=float)
        inv.setflags(write=False)
        object.__setattr__(self, "m_inv", inv)


DEFAULT_TRANSFORM = DklTransform()


def _check_unit(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("linear channel value must lie in [0, 1]")
    return x


def encode_transfer(x):
    """Unquantized sRGB encoding curve on [0, 1] (no range check)."""
    x = np.asarray(x, dtype=float)
    hi = np.maximum(x, _LIN_THRESHOLD)
    return np.where(x <= _LIN_THRESHOLD, _SLOPE * x, (1 + _A) * hi ** (1 / _GAMMA) - _A)


def decode_transfer(v):
    """Inverse of :func:`encode_transfer` for v in [0, 1]."""
    v = np.asarray(v, dtype=float)
    hi = np.maximum(v, _ENC_THRESHOLD)
    return np.where(v <= _ENC_THRESHOLD, v / _SLOPE, ((hi + _A) / (1 + _A)) ** _GAMMA)


def linear_to_srgb(x) -> np.ndarray:
    """Quantize linear values in [0, 1] to 8-bit sRGB, rounding half up.

    Works element-wise on arrays of any shape; returns ``uint8``.
    Raises ``ValueError`` for values outside [0, 1].
    """
    x = _check_unit(x)
    q = np.floor(255.0 * encode_transfer(x) + 0.5)
    return np.clip(q, 0, 255).astype(np.uint8)


def srgb_to_linear(v) -> np.ndarray:
    v = np.asarray(v)
    if np.any(v < 0) or np.any(v > 255):
        raise ValueError("sRGB value must lie in [0, 255]")
    return decode_transfer(v.astype(float) / 255.0)


def linear_to_srgb_channel(x: float) -> int:
    return int(linear_to_srgb(x))


def srgb_to_linear_channel(v: int) -> float:
    if int(v) != v:
        raise ValueError(f"sRGB value must be an integer, got {v!r}")
    return float(srgb_to_linear(int(v)))


def rgb_to_dkl_array(rgb, t: DklTransform = DEFAULT_TRANSFORM) -> np.ndarray:
    """Map linear RGB (..., 3) to DKL (..., 3)."""
    return np.asarray(rgb, dtype=float) @ t.m_inv.T


def dkl_to_rgb_array(k, t: DklTransform = DEFAULT_TRANSFORM) -> np.ndarray:
    """Map DKL (..., 3) to unclamped linear RGB (..., 3)."""
    return np.asarray(k, dtype=float) @ t.m.T


def rgb_to_dkl(c: LinearColor, t: DklTransform = DEFAULT_TRANSFORM) -> DklColor:
    return DklColor.from_array(rgb_to_dkl_array(c.as_array(), t))


def dkl_to_rgb(k: DklColor, t: DklTransform = DEFAULT_TRANSFORM) -> LinearColor:
    return LinearColor.from_array(dkl_to_rgb_array(k.as_array(), t))


def dkl_to_rgb_unclamped(k: DklColor, t: DklTransform = DEFAULT_TRANSFORM) -> np.ndarray:
    return dkl_to_rgb_array(k.as_array(), t)
