"""Base+Delta tile codec and the PBD1 frame container.

Tile record, repeated for R, G, B (bit-packed, MSB first)::

    base    8 bits   channel minimum
    bitlen  4 bits   0..8, ceil(log2(range + 1))
    deltas  N * bitlen bits, pixel - base, row-major over the tile

Tiles follow each other without padding; only the frame payload is padded to
a whole byte. See docs/formats.md for the header layout.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"PBD1"
VERSION = 1
HEADER = struct.Struct("<4sHIIHddHQ")
HEADER_BITS = HEADER.size * 8

BASE_BITS = 8
BITLEN_BITS = 4
TILE_OVERHEAD_BITS = 3 * (BASE_BITS + BITLEN_BITS)

FLAG_ADJUSTED = 1
FLAG_GAZE = 2

# bitlen for every possible 8-bit range
BITLEN_LUT = np.array([int(r).bit_length() for r in range(256)], dtype=np.int64)


class BitstreamError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EncodedTile:
    bases: np.ndarray    # (3,) uint8
    bitlens: np.ndarray  # (3,) int
    deltas: np.ndarray   # (N, 3) int, row-major pixel order
    tile_size: int

    @property
    def n_pixels(self) -> int:
        return self.tile_size * self.tile_size


@dataclass(frozen=True)
class FrameHeader:
    width: int
    height: int
    tile_size: int
    gaze_x: float = float("nan")
    gaze_y: float = float("nan")
    flags: int = 0
    payload_bits: int = 0
    version: int = VERSION

    def pack(self) -> bytes:
        return HEADER.pack(MAGIC, self.version, self.width, self.height, self.tile_size,
                           self.gaze_x, self.gaze_y, self.flags, self.payload_bits)

    @classmethod
    def unpack(cls, data: bytes) -> "FrameHeader":
        if len(data) < HEADER.size:
            raise BitstreamError("truncated header")
        magic, ver, w, h, n, gx, gy, flags, nbits = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise BitstreamError(f"bad magic {magic!r}")
        if ver != VERSION:
            raise BitstreamError(f"unsupported version {ver}")
        if n == 0 or w == 0 or h == 0:
            raise BitstreamError("zero frame or tile dimension")
        return cls(w, h, n, gx, gy, flags, nbits, ver)


@dataclass(frozen=True)
class FrameBitstream:
    header: FrameHeader
    payload: bytes

    def to_bytes(self) -> bytes:
        return self.header.pack() + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "FrameBitstream":
        header = FrameHeader.unpack(data)
        payload = bytes(data[HEADER.size:])
        if len(payload) * 8 < header.payload_bits:
            raise BitstreamError("truncated payload")
        return cls(header, payload)

    @property
    def n_bits(self) -> int:
        return 8 * (HEADER.size + len(self.payload))


# --- bit packing ----------------------------------------------------------

def pack_fields(values, widths) -> tuple[bytes, int]:
    """Pack unsigned ``values`` MSB-first using per-field ``widths`` (0..32 bits)."""
    values = np.asarray(values, dtype=np.int64).ravel()
    widths = np.asarray(widths, dtype=np.int64).ravel()
    k = np.arange(max(8, int(widths.max(initial=0))))
    shift = widths[:, None] - 1 - k[None, :]
    used = k[None, :] < widths[:, None]
    bits = (values[:, None] >> np.maximum(shift, 0)) & 1
    flat = bits[used].astype(np.uint8)
    return np.packbits(flat).tobytes(), int(flat.size)


class BitReader:
    def __init__(self, data: bytes, n_bits: int | None = None):
        self.bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        self.limit = self.bits.size if n_bits is None else n_bits
        self.pos = 0

    def _take(self, n):
        if self.pos + n > self.limit:
            raise BitstreamError("truncated stream")
        out = self.bits[self.pos:self.pos + n]
        self.pos += n
        return out

    def read(self, width: int) -> int:
        v = 0
        for b in self._take(width):
            v = (v << 1) | int(b)
        return v

    def read_array(self, count: int, width: int) -> np.ndarray:
        if width == 0:
            return np.zeros(count, dtype=np.int64)
        chunk = self._take(count * width).reshape(count, width).astype(np.int64)
        return chunk @ (1 << np.arange(width - 1, -1, -1))


# --- tiles ----------------------------------------------------------------

def bitlen_of_range(r) -> np.ndarray:
    return BITLEN_LUT[np.asarray(r, dtype=np.int64)]


def encode_tiles(tiles) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized encoding of ``tiles`` (T, N, 3) uint8 -> (bases, bitlens, deltas)."""
    tiles = np.asarray(tiles)
    bases = tiles.min(axis=1)
    ranges = tiles.max(axis=1).astype(np.int64) - bases
    return bases, bitlen_of_range(ranges), tiles.astype(np.int64) - bases[:, None, :]


def tile_bits_array(tiles) -> np.ndarray:
    """Encoded size in bits of each tile in (T, N, 3)."""
    tiles = np.asarray(tiles)
    ranges = tiles.max(axis=1).astype(np.int64) - tiles.min(axis=1)
    return TILE_OVERHEAD_BITS + tiles.shape[1] * bitlen_of_range(ranges).sum(axis=-1)


def encode_tile(tile) -> EncodedTile:
    tile = np.asarray(tile)
    if tile.ndim != 3 or tile.shape[0] != tile.shape[1] or tile.shape[2] != 3:
        raise ValueError(f"tile must be (n, n, 3), got {tile.shape}")
    if tile.dtype != np.uint8:
        raise ValueError("tile must be uint8 sRGB")
    n = tile.shape[0]
    bases, bitlens, deltas = encode_tiles(tile.reshape(1, n * n, 3))
    return EncodedTile(bases[0], bitlens[0], deltas[0], n)


def decode_tile(e: EncodedTile) -> np.ndarray:
    if np.any(np.asarray(e.bitlens) > 8) or np.any(np.asarray(e.bitlens) < 0):
        raise BitstreamError("bitlen out of range")
    out = np.asarray(e.bases, dtype=np.int64)[None, :] + np.asarray(e.deltas, dtype=np.int64)
    if np.any(out > 255) or np.any(out < 0):
        raise BitstreamError("decoded value out of range")
    return out.astype(np.uint8).reshape(e.tile_size, e.tile_size, 3)


def bits_of(e: EncodedTile) -> int:
    return TILE_OVERHEAD_BITS + e.n_pixels * int(np.sum(e.bitlens))


def _tile_fields(bases, bitlens, deltas):
    """Field values/widths in stream order for tiles (T, ...)."""
    T, N, _ = deltas.shape
    values = np.empty((T, 3, N + 2), dtype=np.int64)
    widths = np.empty((T, 3, N + 2), dtype=np.int64)
    values[:, :, 0] = bases
    values[:, :, 1] = bitlens
    values[:, :, 2:] = deltas.transpose(0, 2, 1)
    widths[:, :, 0] = BASE_BITS
    widths[:, :, 1] = BITLEN_BITS
    widths[:, :, 2:] = bitlens[:, :, None]
    return values, widths


def pack_tile(e: EncodedTile) -> tuple[bytes, int]:
    values, widths = _tile_fields(np.asarray(e.bases)[None], np.asarray(e.bitlens)[None],
                                  np.asarray(e.deltas)[None])
    return pack_fields(values, widths)


def read_tile(reader: BitReader, tile_size: int) -> EncodedTile:
    n_pix = tile_size * tile_size
    bases = np.empty(3, dtype=np.uint8)
    bitlens = np.empty(3, dtype=np.int64)
    deltas = np.empty((n_pix, 3), dtype=np.int64)
    for c in range(3):
        bases[c] = reader.read(BASE_BITS)
        bl = reader.read(BITLEN_BITS)
        if bl > 8:
            raise BitstreamError(f"bitlen {bl} > 8")
        bitlens[c] = bl
        deltas[:, c] = reader.read_array(n_pix, bl)
    return EncodedTile(bases, bitlens, deltas, tile_size)


# --- frames ---------------------------------------------------------------

def pad_frame(frame, tile_size) -> np.ndarray:
    h, w = frame.shape[:2]
    ph, pw = -h % tile_size, -w % tile_size
    if ph or pw:
        pad = [(0, ph), (0, pw)] + [(0, 0)] * (frame.ndim - 2)
        frame = np.pad(frame, pad, mode="edge")
    return frame


def to_tiles(frame, tile_size) -> np.ndarray:
    """(H, W, C) with H, W multiples of tile_size -> (T, n*n, C), tiles row-major."""
    h, w = frame.shape[:2]
    n = tile_size
    rest = frame.shape[2:]
    t = frame.reshape(h // n, n, w // n, n, *rest).swapaxes(1, 2)
    return t.reshape((h // n) * (w // n), n * n, *rest)


def from_tiles(tiles, height, width, tile_size) -> np.ndarray:
    n = tile_size
    rest = tiles.shape[2:]
    t = tiles.reshape(height // n, width // n, n, n, *rest).swapaxes(1, 2)
    return t.reshape(height, width, *rest)


def encode_frame(frame, tile_size: int, gaze=None, flags: int = 0) -> FrameBitstream:
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.dtype != np.uint8:
        raise ValueError("frame must be (H, W, 3) uint8")
    h, w = frame.shape[:2]
    tiles = to_tiles(pad_frame(frame, tile_size), tile_size)
    return encode_tiled(tiles, w, h, tile_size, gaze, flags)


def encode_tiled(tiles, width: int, height: int, tile_size: int, gaze=None,
                 flags: int = 0) -> FrameBitstream:
    """Encode already padded and tiled pixels (T, n*n, 3) uint8."""
    w, h = width, height
    bases, bitlens, deltas = encode_tiles(np.asarray(tiles, dtype=np.uint8))
    payload, n_bits = pack_fields(*_tile_fields(bases, bitlens, deltas))
    gx, gy = (float("nan"), float("nan")) if gaze is None else (float(gaze[0]), float(gaze[1]))
    if gaze is not None:
        flags |= FLAG_GAZE
    header = FrameHeader(w, h, tile_size, gx, gy, flags, n_bits)
    return FrameBitstream(header, payload)


def decode_frame(bs) -> np.ndarray:
    if isinstance(bs, (bytes, bytearray, memoryview)):
        bs = FrameBitstream.from_bytes(bytes(bs))
    hd = bs.header
    n = hd.tile_size
    hp, wp = hd.height + (-hd.height % n), hd.width + (-hd.width % n)
    n_tiles = (hp // n) * (wp // n)
    reader = BitReader(bs.payload, hd.payload_bits)
    tiles = np.empty((n_tiles, n * n, 3), dtype=np.uint8)
    for i in range(n_tiles):
        tiles[i] = decode_tile(read_tile(reader, n)).reshape(n * n, 3)
    if reader.pos != hd.payload_bits:
        raise BitstreamError("payload length does not match tile records")
    return from_tiles(tiles, hp, wp, n)[: hd.height, : hd.width]


def frame_bits(frame, tile_size: int) -> int:
    """Size in bits of ``encode_frame(frame, tile_size)`` without packing it."""
    tiles = to_tiles(pad_frame(np.asarray(frame), tile_size), tile_size)
    payload = int(tile_bits_array(tiles).sum())
    return HEADER_BITS + 8 * ((payload + 7) // 8)
