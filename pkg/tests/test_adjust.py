import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perceptbd import oracle
from perceptbd.adjust import (
    CANDIDATES,
    Case,
    Tile,
    adjust_tile,
    adjust_tile_axis,
    adjust_tiles,
    compute_planes,
    shift_along_extrema,
)
from perceptbd.codec import tile_bits_array
from perceptbd.colorspace import LinearColor, linear_to_srgb, rgb_to_dkl_array, srgb_to_linear
from perceptbd.geometry import Axis, ExtremaPair, membership_array
from perceptbd.perception import DEFAULT_MODEL, ConstantModel, ellipsoid_for


def pair(lo, hi, axis=Axis.BLUE):
    low = np.full(3, 0.5)
    high = np.full(3, 0.5)
    low[axis], high[axis] = lo, hi
    return ExtremaPair(high, low, axis)


def test_compute_planes_example():
    planes = compute_planes([pair(2, 4), pair(5, 9), pair(1, 3)])
    assert (planes.hl, planes.lh) == (5, 3)
    assert planes.case is Case.C1


def test_compute_planes_overlap_is_c2():
    planes = compute_planes([pair(0.1, 0.5), pair(0.3, 0.7)])
    assert planes.case is Case.C2


def test_compute_planes_rejects_mixed_axes():
    with pytest.raises(ValueError):
        compute_planes([pair(0, 1, Axis.BLUE), pair(0, 1, Axis.RED)])
    with pytest.raises(ValueError):
        compute_planes([])


def test_disjoint_intervals_meet_at_planes():
    pixels = np.array([[[0.5, 0.5, 0.15], [0.5, 0.5, 0.35]]])
    low = np.array([[[0.5, 0.5, 0.1], [0.5, 0.5, 0.3]]])
    high = np.array([[[0.5, 0.5, 0.2], [0.5, 0.5, 0.4]]])
    moved, c2, clamped = shift_along_extrema(pixels, high, low, Axis.BLUE)
    np.testing.assert_allclose(moved[0, :, 2], [0.2, 0.3], atol=1e-15)
    assert not c2[0] and not clamped[0]


def test_overlapping_intervals_meet_in_the_middle():
    pixels = np.array([[[0.5, 0.5, 0.3], [0.5, 0.5, 0.5]]])
    low = pixels - [0, 0, 0.2]
    high = pixels + [0, 0, 0.2]
    moved, c2, _ = shift_along_extrema(pixels, high, low, Axis.BLUE)
    assert c2[0]
    np.testing.assert_allclose(moved[0, :, 2], [0.4, 0.4], atol=1e-15)


def test_gamut_clamp_shortens_move():
    pixels = np.array([[[0.99, 0.5, 0.2], [0.5, 0.5, 0.6]]])
    # pixel 0 would have to move past R = 1 to reach the blue plane
    high = np.array([[[1.19, 0.5, 0.4], [0.5, 0.5, 0.7]]])
    low = np.array([[[0.79, 0.5, 0.0], [0.5, 0.5, 0.5]]])
    moved, _, clamped = shift_along_extrema(pixels, high, low, Axis.BLUE)
    assert clamped[0]
    assert moved.max() <= 1.0 and moved.min() >= 0.0
    np.testing.assert_allclose(moved[0, 0], [1.0, 0.5, 0.21], atol=1e-12)


def tile_and_ellipsoids(rgb, ecc=40.0, provider=DEFAULT_MODEL):
    n = int(round(np.sqrt(len(rgb))))
    t = Tile(np.asarray(rgb), n)
    ells = [ellipsoid_for(LinearColor(*px), ecc, provider) for px in t.pixels]
    return t, ells


def test_near_uniform_tile_collapses(rng):
    base = srgb_to_linear(np.array([120, 140, 100], dtype=np.uint8))
    rgb = np.clip(base + rng.normal(scale=1e-3, size=(16, 3)) * [0, 0, 1], 0, 1)
    t, ells = tile_and_ellipsoids(rgb)
    out = adjust_tile_axis(t, ells, Axis.BLUE)
    assert out.case_tag is Case.C2
    assert np.ptp(out.srgb()[:, 2]) == 0


def test_zero_axes_leave_tile_unchanged(rng):
    rgb = rng.uniform(0.1, 0.9, (16, 3))
    t, ells = tile_and_ellipsoids(rgb, provider=ConstantModel(0, 0, 0))
    for axis in Axis:
        np.testing.assert_allclose(adjust_tile_axis(t, ells, axis).pixels, t.pixels, atol=1e-15)
    best = adjust_tile(t, ells)
    np.testing.assert_array_equal(best.srgb(), linear_to_srgb(t.pixels))


def test_uniform_tile_tie_goes_to_blue():
    rgb = np.tile(srgb_to_linear(np.array([95, 95, 95], dtype=np.uint8)), (16, 1))
    t, ells = tile_and_ellipsoids(rgb)
    out = adjust_tile(t, ells)
    assert out.chosen_axis is Axis.BLUE
    np.testing.assert_array_equal(out.srgb(), np.full((16, 3), 95))


def test_unadjusted_candidate_reports_skipped(rng):
    t, ells = tile_and_ellipsoids(rng.uniform(0.2, 0.8, (16, 3)))
    costs = iter([5, 5, 4])  # Blue, Red, untouched
    out = adjust_tile(t, ells, codec_cost=lambda e: next(costs))
    assert out.case_tag is Case.SKIPPED and out.chosen_axis is None
    np.testing.assert_array_equal(out.pixels, t.pixels)


def test_centers_must_match_pixels(rng):
    t, ells = tile_and_ellipsoids(rng.uniform(0.2, 0.8, (4, 3)))
    with pytest.raises(ValueError):
        adjust_tile_axis(t, ells[::-1], Axis.BLUE)


def test_tile_validation():
    with pytest.raises(ValueError):
        Tile(np.zeros((5, 3)), 2)
    with pytest.raises(ValueError):
        Tile(np.full((4, 3), 1.5), 2)


def random_tiles(rng, count, n=4, spread=0.01):
    base = rng.uniform(0.15, 0.85, (count, 1, 3))
    return np.clip(base + rng.normal(scale=spread, size=(count, n * n, 3)), 0, 1)


def batch(pixels, ecc):
    centers = rgb_to_dkl_array(pixels)
    axes = DEFAULT_MODEL.axes(pixels, np.full(pixels.shape[:2], ecc))
    return centers, axes


@pytest.mark.parametrize("ecc", [12.0, 30.0, 60.0])
def test_never_worse_than_unadjusted(rng, ecc):
    px = random_tiles(rng, 500)
    res = adjust_tiles(px, *batch(px, ecc))
    assert np.all(res["bits"] <= tile_bits_array(linear_to_srgb(px)))


def test_adjusted_pixels_stay_inside_ellipsoids(rng):
    px = random_tiles(rng, 500)
    centers, axes = batch(px, 45.0)
    res = adjust_tiles(px, centers, axes)
    m = membership_array(rgb_to_dkl_array(res["linear"]), centers, axes)
    assert m.max() <= 1.0 + 1e-9


@pytest.mark.parametrize("axis", [Axis.RED, Axis.BLUE])
def test_range_matches_interval_oracle(rng, axis):
    checked = 0
    for _ in range(300):
        px = random_tiles(rng, 1)[0]
        t, ells = tile_and_ellipsoids(px, ecc=rng.uniform(10, 80))
        out = adjust_tile_axis(t, ells, axis)
        if out.clamped:
            continue
        ivs = [oracle.channel_interval(e, axis) for e in ells]
        assert np.ptp(out.pixels[:, axis]) == pytest.approx(oracle.interval_min_range(ivs), abs=1e-9)
        checked += 1
    assert checked > 250


def test_batched_equals_single(rng):
    px = random_tiles(rng, 20)
    centers, axes = batch(px, 35.0)
    res = adjust_tiles(px, centers, axes)
    for i in range(20):
        t, ells = tile_and_ellipsoids(px[i], ecc=35.0)
        single = adjust_tile(t, ells)
        np.testing.assert_array_equal(single.srgb(), res["srgb"][i])
        assert CANDIDATES.index(single.chosen_axis) == res["choice"][i]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 90.0))
def test_adjustment_deterministic(seed, ecc):
    px = random_tiles(np.random.default_rng(seed), 8)
    a = adjust_tiles(px, *batch(px, ecc))
    b = adjust_tiles(px.copy(), *batch(px.copy(), ecc))
    for k in a:
        np.testing.assert_array_equal(a[k], b[k])
