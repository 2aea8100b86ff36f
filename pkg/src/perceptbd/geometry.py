"""Ellipsoid geometry in linear RGB.

A DKL ellipsoid ``sum(((k - kappa) / s)**2) = 1`` becomes a general quadric in
linear RGB once ``k = T @ x`` is substituted (``T`` is RGB -> DKL)::

    A x^2 + B y^2 + C z^2 + D x + E y + F z + G xy + H yz + I zx + 1 = 0

The extrema along a channel lie on the line where the two partial derivatives
in the *other* channels vanish. Its direction is the cross product of the two
plane normals; intersecting it with the ellipsoid (done in DKL, where the
ellipsoid is axis aligned) yields the highest and lowest points.

Array functions accept any leading batch shape; the dataclass wrappers are thin
conveniences over them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .colorspace import (
    DEFAULT_TRANSFORM,
    DklTransform,
    LinearColor,
    dkl_to_rgb_array,
    rgb_to_dkl_array,
)
from .perception import DiscriminationEllipsoid

# |t| below this means the unit-constant normalization is ill-posed
T_EPS = 1e-12
_CROSS_EPS = 1e-12


class Axis(enum.IntEnum):
    RED = 0
    BLUE = 2


class DegenerateGeometryError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadricSurface:
    """Coefficients of the normalized quadric plus the normalizer ``t``.

    ``t = 1 - sum(kappa**2 / s**2)``; the stored coefficients are the DKL
    equation divided by ``-t`` so the constant term is 1. A point is inside
    iff ``evaluate(p)`` has the same sign as ``t``.
    """

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float
    G: float
    H: float
    I: float  # noqa: E741
    t: float

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C, self.D, self.E, self.F, self.G, self.H, self.I])

    def evaluate(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return (self.A * x * x + self.B * y * y + self.C * z * z
                + self.D * x + self.E * y + self.F * z
                + self.G * x * y + self.H * y * z + self.I * z * x + 1.0)

    def contains(self, p) -> np.ndarray:
        return self.evaluate(p) * self.t > 0


@dataclass(frozen=True)
class ExtremaPair:
    high: np.ndarray
    low: np.ndarray
    axis: Axis


def quadric_arrays(centers, axes, t: DklTransform = DEFAULT_TRANSFORM):
    """Batched quadric coefficients.

    Returns ``(coef, tnorm)`` with ``coef[..., :]`` ordered A..I. Axes must be
    strictly positive; rows with ``|tnorm| < T_EPS`` yield non-finite values.
    """
    kappa = np.asarray(centers, dtype=float)
    s = np.asarray(axes, dtype=float)
    w = 1.0 / (s * s)
    T = t.m_inv
    # Q = T^T diag(w) T ; lin = -2 T^T diag(w) kappa ; const = kappa^T diag(w) kappa - 1
    Q = np.einsum("ki,...k,kj->...ij", T, w, T)
    lin = -2.0 * np.einsum("ki,...k->...i", T, w * kappa)
    tnorm = 1.0 - np.sum(w * kappa * kappa, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = -1.0 / tnorm
        coef = np.stack(
            [
                Q[..., 0, 0], Q[..., 1, 1], Q[..., 2, 2],
                lin[..., 0], lin[..., 1], lin[..., 2],
                2 * Q[..., 0, 1], 2 * Q[..., 1, 2], 2 * Q[..., 0, 2],
            ],
            axis=-1,
        ) * scale[..., None]
    return coef, tnorm


def _plane_normals(coef, axis):
    A, B, C, _, _, _, G, H, I = np.moveaxis(coef, -1, 0)  # noqa: E741
    dx = np.stack([2 * A, G, I], axis=-1)
    dy = np.stack([G, 2 * B, H], axis=-1)
    dz = np.stack([I, H, 2 * C], axis=-1)
    if axis == Axis.BLUE:
        return dx, dy
    if axis == Axis.RED:
        return dy, dz
    raise ValueError(f"unsupported axis {axis!r}")


def extrema_vector_array(coef, axis):
    """Cross product of the two derivative-plane normals; returns ``(v, ok)``."""
    n1, n2 = _plane_normals(np.asarray(coef, dtype=float), Axis(axis))
    v = np.cross(n1, n2)
    scale = np.linalg.norm(n1, axis=-1) * np.linalg.norm(n2, axis=-1)
    ok = np.isfinite(v).all(axis=-1) & (np.linalg.norm(v, axis=-1) > _CROSS_EPS * scale)
    return v, ok


def extrema_arrays(centers, axes, axis, t: DklTransform = DEFAULT_TRANSFORM):
    """Highest and lowest RGB points of each ellipsoid along ``axis``.

    Non-degenerate ellipsoids go through the quadric / cross-product route;
    degenerate axes, ``|t| < T_EPS`` or a vanishing cross product fall back to
    the equivalent direct construction in DKL. Point ellipsoids return the
    center for both. Results are unclamped.
    """
    axis = Axis(axis)
    kappa = np.asarray(centers, dtype=float)
    s = np.asarray(axes, dtype=float)
    kappa, s = np.broadcast_arrays(kappa, s)

    # direct DKL direction: argmax of x[axis] over the ellipsoid is along S^2 M^T e
    x = (s * s) * t.m[axis]

    positive = np.all(s > 0, axis=-1)
    if np.any(positive):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            coef, tnorm = quadric_arrays(np.where(positive[..., None], kappa, 0.0),
                                         np.where(positive[..., None], s, 1.0), t)
            v, ok = extrema_vector_array(coef, axis)
        use_quadric = positive & ok & (np.abs(tnorm) >= T_EPS)
        xq = v @ t.m_inv.T
        x = np.where(use_quadric[..., None], xq, x)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s > 0, x / np.where(s > 0, s, 1.0), 0.0)
        norm = np.sqrt(np.sum(ratio * ratio, axis=-1))
        step = np.where(norm > 0, 1.0 / np.where(norm > 0, norm, 1.0), 0.0)
    offset = x * step[..., None]
    p1 = dkl_to_rgb_array(kappa + offset, t)
    p2 = dkl_to_rgb_array(kappa - offset, t)
    swap = p1[..., axis] < p2[..., axis]
    high = np.where(swap[..., None], p2, p1)
    low = np.where(swap[..., None], p1, p2)
    return high, low


def membership_array(points_dkl, centers, axes) -> np.ndarray:
    """``sum(((k - kappa) / s)**2)``; zero axes give 0 for zero offset, else inf."""
    off = np.asarray(points_dkl, dtype=float) - np.asarray(centers, dtype=float)
    s = np.asarray(axes, dtype=float)
    off, s = np.broadcast_arrays(off, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(s > 0, off / np.where(s > 0, s, 1.0), 0.0)
    terms = np.where(s > 0, r * r, np.where(off == 0, 0.0, np.inf))
    return terms.sum(axis=-1)


def dkl_to_quadric(e: DiscriminationEllipsoid, t: DklTransform = DEFAULT_TRANSFORM) -> QuadricSurface:
    if min(e.semi_axes) <= 0:
        raise DegenerateGeometryError("quadric form needs strictly positive semi-axes")
    coef, tnorm = quadric_arrays(e.center.as_array(), np.array(e.semi_axes), t)
    if abs(tnorm) < T_EPS or not np.all(np.isfinite(coef)):
        raise DegenerateGeometryError(f"quadric normalizer too small (t={tnorm:.3g})")
    return QuadricSurface(*(float(c) for c in coef), t=float(tnorm))


def extrema_vector(q: QuadricSurface, axis) -> np.ndarray:
    v, ok = extrema_vector_array(q.coefficients, axis)
    if not ok:
        raise DegenerateGeometryError("derivative planes are (nearly) parallel")
    return v


def extrema_points(e: DiscriminationEllipsoid, axis, t: DklTransform = DEFAULT_TRANSFORM) -> ExtremaPair:
    high, low = extrema_arrays(e.center.as_array(), np.array(e.semi_axes), axis, t)
    return ExtremaPair(high, low, Axis(axis))


def membership(e: DiscriminationEllipsoid, c, t: DklTransform = DEFAULT_TRANSFORM) -> float:
    """Normalized DKL distance of color ``c`` (LinearColor or raw RGB triple)."""
    rgb = c.as_array() if isinstance(c, LinearColor) else np.asarray(c, dtype=float)
    return float(membership_array(rgb_to_dkl_array(rgb, t), e.center.as_array(), e.semi_axes))
