import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perceptbd import oracle
from perceptbd.colorspace import DklColor, LinearColor, dkl_to_rgb_array, rgb_to_dkl
from perceptbd.geometry import (
    Axis,
    DegenerateGeometryError,
    QuadricSurface,
    dkl_to_quadric,
    extrema_arrays,
    extrema_points,
    extrema_vector,
    membership,
    membership_array,
)
from perceptbd.perception import DEFAULT_MODEL, DiscriminationEllipsoid, ellipsoid_for


def random_ellipsoid(rng, lo=0.002, hi=0.09):
    c = LinearColor(*rng.uniform(0.05, 0.95, 3))
    return DiscriminationEllipsoid(rgb_to_dkl(c), tuple(rng.uniform(lo, hi, 3)))


def test_center_is_inside(rng):
    for _ in range(50):
        e = random_ellipsoid(rng)
        q = dkl_to_quadric(e)
        center_rgb = dkl_to_rgb_array(e.center.as_array())
        assert q.contains(center_rgb)
        assert membership(e, center_rgb) == pytest.approx(0.0, abs=1e-18)


def test_quadric_sign_matches_oracle(rng):
    e = random_ellipsoid(rng)
    q = dkl_to_quadric(e)
    center = e.center.as_array()
    offsets = rng.normal(size=(4000, 3))
    offsets /= np.linalg.norm(offsets, axis=1, keepdims=True)
    radius = rng.uniform(0.0, 2.0, (4000, 1))
    pts = dkl_to_rgb_array(center + offsets * radius * np.array(e.semi_axes))
    m = oracle.dkl_membership(pts, e)
    keep = np.abs(m - 1.0) > 1e-6
    pts, m = pts[keep][:1000], m[keep][:1000]
    assert len(pts) == 1000
    np.testing.assert_array_equal(q.contains(pts), m < 1.0)


def test_surface_points_are_roots(rng):
    e = random_ellipsoid(rng)
    q = dkl_to_quadric(e)
    pts = oracle.surface_sample_points(e, samples=10**4)
    assert np.abs(q.evaluate(pts)).max() < 1e-7


def test_axis_aligned_blue_vector_is_vertical():
    q = QuadricSurface(2.0, 3.0, 5.0, 0.1, 0.2, 0.3, 0.0, 0.0, 0.0, t=1.0)
    v = extrema_vector(q, Axis.BLUE)
    assert v[0] == 0 and v[1] == 0 and v[2] != 0
    v = extrema_vector(q, Axis.RED)
    assert v[1] == 0 and v[2] == 0 and v[0] != 0


def test_parallel_planes_raise():
    # G = 2*sqrt(A*B) makes the x and y derivative planes parallel
    q = QuadricSurface(1.0, 1.0, 1.0, 0, 0, 0, 2.0, 0.0, 0.0, t=1.0)
    with pytest.raises(DegenerateGeometryError):
        extrema_vector(q, Axis.BLUE)


def test_degenerate_quadric_rejected():
    e = DiscriminationEllipsoid(DklColor(0, 0, 0), (0.0, 0.1, 0.1))
    with pytest.raises(DegenerateGeometryError):
        dkl_to_quadric(e)


@pytest.mark.parametrize("axis", [Axis.RED, Axis.BLUE])
def test_extrema_match_sampling_oracle(rng, axis):
    for _ in range(5):
        e = random_ellipsoid(rng)
        pair = extrema_points(e, axis)
        smax, smin = oracle.surface_sample_extrema(e, axis, samples=10**6)
        assert pair.high[axis] == pytest.approx(smax, abs=1e-4)
        assert pair.low[axis] == pytest.approx(smin, abs=1e-4)
        lo, hi = oracle.channel_interval(e, axis)
        assert pair.high[axis] == pytest.approx(hi, abs=1e-12)
        assert pair.low[axis] == pytest.approx(lo, abs=1e-12)


@pytest.mark.parametrize("axis", [Axis.RED, Axis.BLUE])
def test_extrema_on_surface_and_symmetric(rng, axis):
    for _ in range(20):
        e = random_ellipsoid(rng)
        pair = extrema_points(e, axis)
        assert membership(e, pair.high) == pytest.approx(1.0, abs=1e-9)
        assert membership(e, pair.low) == pytest.approx(1.0, abs=1e-9)
        mid = 0.5 * (pair.high + pair.low)
        np.testing.assert_allclose(mid, dkl_to_rgb_array(e.center.as_array()), atol=1e-12)


@pytest.mark.parametrize("axis", [Axis.RED, Axis.BLUE])
def test_quadric_path_agrees_with_direct_path(rng, axis):
    centers = np.array([random_ellipsoid(rng).center.as_array() for _ in range(200)])
    axes = rng.uniform(0.002, 0.09, (200, 3))
    high, low = extrema_arrays(centers, axes, axis)
    # a zero axis forces the direct construction; a tiny one leaves the result essentially unchanged
    for i in range(0, 200, 40):
        e = DiscriminationEllipsoid(DklColor(*centers[i]), tuple(axes[i]))
        assert dkl_to_quadric(e).t != 0
        lo, hi = oracle.channel_interval(e, axis)
        assert high[i, axis] == pytest.approx(hi, abs=1e-9)
        assert low[i, axis] == pytest.approx(lo, abs=1e-9)


def test_point_ellipsoid_extrema_are_center():
    e = ellipsoid_for(LinearColor(0.3, 0.6, 0.1), 40.0, DEFAULT_MODEL)
    point = DiscriminationEllipsoid(e.center, (0.0, 0.0, 0.0))
    pair = extrema_points(point, Axis.BLUE)
    np.testing.assert_allclose(pair.high, [0.3, 0.6, 0.1], atol=1e-12)
    np.testing.assert_allclose(pair.low, [0.3, 0.6, 0.1], atol=1e-12)


def test_partially_degenerate_extrema(rng):
    e = random_ellipsoid(rng)
    flat = DiscriminationEllipsoid(e.center, (e.semi_axes[0], 0.0, e.semi_axes[2]))
    for axis in Axis:
        pair = extrema_points(flat, axis)
        lo, hi = oracle.channel_interval(flat, axis)
        assert pair.high[axis] == pytest.approx(hi, abs=1e-12)
        assert pair.low[axis] == pytest.approx(lo, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
def test_chord_stays_inside(tau, seed):
    rng = np.random.default_rng(seed)
    e = random_ellipsoid(rng)
    for axis in Axis:
        pair = extrema_points(e, axis)
        c = dkl_to_rgb_array(e.center.as_array())
        for end in (pair.high, pair.low):
            assert membership(e, c + tau * (end - c)) <= 1.0 + 1e-9


@given(st.floats(0.0, 1.0))
def test_membership_scales_quadratically(tau):
    center, axes = np.zeros(3), (0.5, 0.25, 2.0)
    direction = np.array([0.3, -0.1, 1.2])
    m1 = membership_array(direction, center, axes)
    mt = membership_array(tau * direction, center, axes)
    assert mt == pytest.approx(tau * tau * m1, rel=1e-12)


def test_membership_zero_axis():
    c = np.zeros(3)
    assert membership_array(np.zeros(3), c, (0.0, 0.0, 0.0)) == 0.0
    assert membership_array(np.array([0.0, 1e-9, 0.0]), c, (1.0, 0.0, 1.0)) == np.inf
