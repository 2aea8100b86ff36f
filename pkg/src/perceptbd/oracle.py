"""Slow reference computations for tests.

Nothing here imports from the rest of the package: the DKL matrix is
duplicated on purpose so a bug in the production path cannot leak into the
checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# DKL -> linear RGB, same values as the production constant, separate copy
ORACLE_DKL_TO_RGB = np.array([[0.14, 0.17, 0.00], [-0.21, -0.71, -0.07], [0.21, 0.72, 0.07]])


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")


def _as_intervals(intervals):
    out = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals]
    if not out:
        raise ValueError("need at least one interval")
    return out


def interval_min_range(intervals) -> float:
    """Smallest spread of one value picked from each interval: max(0, max lo - min hi)."""
    ivs = _as_intervals(intervals)
    return max(0.0, max(iv.lo for iv in ivs) - min(iv.hi for iv in ivs))


def interval_min_range_bruteforce(intervals) -> float:
    """Same quantity by enumeration.

    Some optimal assignment has its smallest value at an interval endpoint m,
    with every other value as close to m as its interval allows, i.e.
    clip(m, lo, hi). Trying every endpoint as m therefore finds the optimum.
    """
    ivs = _as_intervals(intervals)
    lo = np.array([iv.lo for iv in ivs])
    hi = np.array([iv.hi for iv in ivs])
    best = math.inf
    for m in np.concatenate([lo, hi]):
        x = np.clip(m, lo, hi)
        best = min(best, float(x.max() - x.min()))
    return best


def _center_axes(e):
    center = getattr(e, "center", None)
    if center is None:
        center, axes = e
    else:
        axes = e.semi_axes
    center = center.as_array() if hasattr(center, "as_array") else center
    return np.asarray(center, dtype=float), np.asarray(axes, dtype=float)


_SPHERE_CACHE: dict[int, np.ndarray] = {}


def sphere_grid(samples: int) -> np.ndarray:
    """Unit sphere points on a (polar, azimuth) grid with roughly ``samples`` points."""
    if samples not in _SPHERE_CACHE:
        n_theta = max(2, int(math.sqrt(samples / 2)))
        n_phi = max(3, samples // n_theta)
        theta = np.linspace(0.0, math.pi, n_theta)
        phi = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
        st, ct = np.sin(theta)[:, None], np.cos(theta)[:, None]
        pts = np.stack(
            [
                (st * np.cos(phi)).ravel(),
                (st * np.sin(phi)).ravel(),
                np.broadcast_to(ct, (n_theta, n_phi)).ravel(),
            ],
            axis=-1,
        )
        _SPHERE_CACHE.clear()
        _SPHERE_CACHE[samples] = pts
    return _SPHERE_CACHE[samples]


def surface_sample_points(e, samples: int = 10**6, matrix=ORACLE_DKL_TO_RGB) -> np.ndarray:
    """Ellipsoid surface sampled parametrically in DKL, mapped to linear RGB."""
    center, axes = _center_axes(e)
    dkl = center + sphere_grid(samples) * axes
    return dkl @ np.asarray(matrix).T


def surface_sample_extrema(e, axis: int, samples: int = 10**6, matrix=ORACLE_DKL_TO_RGB):
    """(max, min) of RGB channel ``axis`` over a dense surface sample."""
    if samples < 10**4:
        raise ValueError("use at least 1e4 samples")
    center, axes = _center_axes(e)
    row = np.asarray(matrix)[int(axis)]
    # channel value of center + axes * u, one matvec instead of a full transform
    vals = sphere_grid(samples) @ (axes * row) + center @ row
    return float(vals.max()), float(vals.min())


def channel_interval(e, axis: int, matrix=ORACLE_DKL_TO_RGB):
    """Exact channel range of the ellipsoid from its support function."""
    center, axes = _center_axes(e)
    row = np.asarray(matrix)[int(axis)]
    c = float(center @ row)
    r = float(np.sqrt(np.sum((axes * row) ** 2)))
    return c - r, c + r


def dkl_membership(rgb, e, matrix=ORACLE_DKL_TO_RGB) -> np.ndarray:
    """Normalized DKL distance of RGB points to the ellipsoid (solve, not a cached inverse)."""
    center, axes = _center_axes(e)
    rgb = np.atleast_2d(np.asarray(rgb, dtype=float))
    k = np.linalg.solve(np.asarray(matrix), rgb.T).T
    return np.sum(((k - center) / axes) ** 2, axis=-1)


def convexity_probe(f, dim: int, trials: int, rng=None, slack: float = 1e-12) -> bool:
    """Check f(t x1 + (1-t) x2) <= t f(x1) + (1-t) f(x2) on random samples."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng)
    x1 = rng.normal(size=(trials, dim))
    x2 = rng.normal(size=(trials, dim))
    t = rng.uniform(size=trials)
    for a, b, w in zip(x1, x2, t):
        lhs = f(w * a + (1 - w) * b)
        rhs = w * f(a) + (1 - w) * f(b)
        if lhs > rhs + slack:
            return False
    return True


def psnr_direct(a, b) -> float:
    """PSNR written out term by term (peak 255)."""
    a = np.asarray(a).ravel().tolist()
    b = np.asarray(b).ravel().tolist()
    sq = sum((int(x) - int(y)) ** 2 for x, y in zip(a, b))
    if sq == 0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 * len(a) / sq)
