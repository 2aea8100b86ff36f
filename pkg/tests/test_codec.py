import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from perceptbd.codec import (
    HEADER,
    BitReader,
    BitstreamError,
    FrameBitstream,
    FrameHeader,
    bitlen_of_range,
    bits_of,
    decode_frame,
    decode_tile,
    encode_frame,
    encode_tile,
    frame_bits,
    pack_fields,
    pack_tile,
    read_tile,
)


def test_uniform_tile_is_overhead_only():
    e = encode_tile(np.full((4, 4, 3), 95, dtype=np.uint8))
    assert list(e.bitlens) == [0, 0, 0]
    assert bits_of(e) == 36


@pytest.mark.parametrize("r, n", [(0, 0), (1, 1), (2, 2), (3, 2), (7, 3), (8, 4), (128, 8), (255, 8)])
def test_bitlen_of_range(r, n):
    assert bitlen_of_range(r) == n


def test_bits_for_mixed_bitlens():
    tile = np.zeros((4, 4, 3), dtype=np.uint8)
    tile[0, 0] = (7, 0, 3)
    e = encode_tile(tile)
    assert list(e.bitlens) == [3, 0, 2]
    assert bits_of(e) == 116


def test_base_is_channel_minimum():
    tile = np.array([[[10, 200, 3], [12, 190, 3]], [[11, 199, 3], [15, 201, 3]]], dtype=np.uint8)
    e = encode_tile(tile)
    assert list(e.bases) == [10, 190, 3]
    assert list(e.bitlens) == [3, 4, 0]


tiles = st.sampled_from([2, 4, 8, 16]).flatmap(
    lambda n: hnp.arrays(np.uint8, (n, n, 3)))


@settings(max_examples=200)
@given(tiles)
def test_tile_round_trip_and_packed_length(tile):
    e = encode_tile(tile)
    np.testing.assert_array_equal(decode_tile(e), tile)
    data, n_bits = pack_tile(e)
    assert n_bits == bits_of(e)
    assert len(data) == (n_bits + 7) // 8
    back = read_tile(BitReader(data, n_bits), e.tile_size)
    np.testing.assert_array_equal(decode_tile(back), tile)


def test_tile_round_trip_many(rng):
    for _ in range(10_000):
        n = int(rng.choice([2, 4, 8, 16]))
        spread = int(rng.integers(0, 256))
        lo = int(rng.integers(0, 256 - spread))
        tile = rng.integers(lo, lo + spread + 1, (n, n, 3)).astype(np.uint8)
        np.testing.assert_array_equal(decode_tile(encode_tile(tile)), tile)


def test_pack_fields_msb_first():
    data, n = pack_fields([0b101, 0b1, 0b0110], [3, 1, 4])
    assert n == 8
    assert data == bytes([0b10110110])
    r = BitReader(data, n)
    assert [r.read(3), r.read(1), r.read(4)] == [5, 1, 6]


def test_tile_stream_layout():
    tile = np.zeros((2, 2, 3), dtype=np.uint8)
    tile[..., 0] = [[5, 6], [7, 5]]
    tile[..., 1] = 9
    tile[..., 2] = [[0, 1], [0, 0]]
    data, n = pack_tile(encode_tile(tile))
    bits = "".join(f"{b:08b}" for b in data)[:n]
    expect = (
        f"{5:08b}{2:04b}" + "00" + "01" + "10" + "00"
        + f"{9:08b}{0:04b}"
        + f"{0:08b}{1:04b}" + "0100"
    )
    assert bits == expect


def test_header_size_and_fields():
    assert HEADER.size == 42
    h = FrameHeader(640, 480, 8, 1.5, 2.5, 3, 12345)
    assert FrameHeader.unpack(h.pack()) == h


@pytest.mark.parametrize("size", [(1, 1), (3, 5), (17, 9), (16, 16), (33, 2)])
@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_frame_round_trip_odd_sizes(rng, size, n):
    frame = rng.integers(0, 256, size + (3,)).astype(np.uint8)
    bs = encode_frame(frame, n)
    back = decode_frame(bs.to_bytes())
    np.testing.assert_array_equal(back, frame)
    assert bs.n_bits == frame_bits(frame, n)


def test_single_white_pixel_frame():
    frame = np.full((1, 1, 3), 255, dtype=np.uint8)
    bs = encode_frame(frame, 4)
    assert bs.header.payload_bits == 36
    np.testing.assert_array_equal(decode_frame(bs), frame)


def test_gaze_in_header():
    frame = np.zeros((8, 8, 3), dtype=np.uint8)
    h = FrameBitstream.from_bytes(encode_frame(frame, 4, gaze=(3.0, 4.5)).to_bytes()).header
    assert (h.gaze_x, h.gaze_y, h.flags) == (3.0, 4.5, 2)
    h = encode_frame(frame, 4).header
    assert np.isnan(h.gaze_x) and h.flags == 0


def test_bad_magic():
    data = bytearray(encode_frame(np.zeros((4, 4, 3), np.uint8), 4).to_bytes())
    data[:4] = b"XXXX"
    with pytest.raises(BitstreamError, match="magic"):
        decode_frame(bytes(data))


def test_bad_version():
    data = bytearray(encode_frame(np.zeros((4, 4, 3), np.uint8), 4).to_bytes())
    data[4] = 9
    with pytest.raises(BitstreamError, match="version"):
        decode_frame(bytes(data))


def test_truncated(rng):
    data = encode_frame(rng.integers(0, 256, (8, 8, 3)).astype(np.uint8), 4).to_bytes()
    with pytest.raises(BitstreamError):
        decode_frame(data[:-3])
    with pytest.raises(BitstreamError):
        decode_frame(data[:10])


def test_encoding_deterministic(rng):
    frame = rng.integers(0, 256, (37, 23, 3)).astype(np.uint8)
    assert encode_frame(frame, 8).to_bytes() == encode_frame(frame.copy(), 8).to_bytes()


def test_rejects_non_uint8():
    with pytest.raises(ValueError):
        encode_frame(np.zeros((4, 4, 3)), 4)
    with pytest.raises(ValueError):
        encode_tile(np.zeros((4, 4, 3)))
