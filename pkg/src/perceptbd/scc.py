"""Set-cover coding (SCC) baseline.

Pick, greedily, a small set of representative colors whose discrimination
ellipsoids cover every color of a reduced-depth sRGB universe, then store each
pixel as an index into that set.
"""

from __future__ import annotations

import heapq
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import BitReader, pack_fields
from .colorspace import DEFAULT_TRANSFORM, DklTransform, rgb_to_dkl_array, srgb_to_linear
from .geometry import membership_array
from .perception import EllipsoidProvider

COVER_FORMAT = "pbd-scc-cover"
COVER_VERSION = 1
STREAM_MAGIC = b"SCC1"
STREAM_HEADER = struct.Struct("<4sIIBB")


def level_values(depth: int) -> np.ndarray:
    """8-bit sRGB value of each of the ``2**depth`` channel levels."""
    n = (1 << depth) - 1
    return np.floor(np.arange(n + 1) * 255 / n + 0.5).astype(np.uint8)


def universe_srgb(depth: int) -> np.ndarray:
    """All colors at ``depth`` bits per channel, indexed by code ``(r << 2d) | (g << d) | b``."""
    lv = level_values(depth)
    r, g, b = np.meshgrid(lv, lv, lv, indexing="ij")
    return np.stack([r.ravel(), g.ravel(), b.ravel()], axis=-1)


def quantize_codes(frame, depth: int) -> np.ndarray:
    n = (1 << depth) - 1
    q = np.floor(np.asarray(frame, dtype=np.int64) * n / 255 + 0.5).astype(np.int64)
    return (q[..., 0] << (2 * depth)) | (q[..., 1] << depth) | q[..., 2]


@dataclass(frozen=True, eq=False)
class ColorCover:
    depth: int
    chosen: np.ndarray      # universe codes of the representatives
    encode_lut: np.ndarray  # universe code -> index into chosen
    eccentricity: float = 25.0
    provider: str = ""

    @property
    def code_bits(self) -> int:
        return math.ceil(math.log2(len(self.chosen))) if len(self.chosen) > 1 else 0

    def representatives(self) -> np.ndarray:
        return universe_srgb(self.depth)[self.chosen]

    def save(self, path):
        doc = {
            "format": COVER_FORMAT,
            "version": COVER_VERSION,
            "depth": self.depth,
            "eccentricity": self.eccentricity,
            "provider": self.provider,
            "chosen": [int(c) for c in self.chosen],
            "lut": [int(i) for i in self.encode_lut],
        }
        Path(path).write_text(json.dumps(doc))

    @classmethod
    def load(cls, path) -> "ColorCover":
        doc = json.loads(Path(path).read_text())
        if doc.get("format") != COVER_FORMAT or doc.get("version") != COVER_VERSION:
            raise ValueError(f"{path}: not a version {COVER_VERSION} cover file")
        depth = int(doc["depth"])
        lut = np.array(doc["lut"], dtype=np.int64)
        chosen = np.array(doc["chosen"], dtype=np.int64)
        if lut.size != 1 << (3 * depth) or np.any(lut < 0) or np.any(lut >= chosen.size):
            raise ValueError(f"{path}: inconsistent lookup table")
        return cls(depth, chosen, lut, float(doc["eccentricity"]), doc.get("provider", ""))


def _coverage_sets(depth, provider, eccentricity, t):
    """For each candidate color, the universe codes inside its ellipsoid."""
    srgb = universe_srgb(depth)
    lin = srgb_to_linear(srgb)
    dkl = rgb_to_dkl_array(lin, t)
    axes = provider.axes(lin, np.full(len(lin), float(eccentricity)))

    # per-channel half extent in linear RGB (support function of the ellipsoid)
    half = np.sqrt(((axes[:, None, :] * t.m[None, :, :]) ** 2).sum(axis=-1))
    lv_lin = srgb_to_linear(level_values(depth))
    lo_idx = np.searchsorted(lv_lin, lin - half - 1e-12, side="left")
    hi_idx = np.searchsorted(lv_lin, lin + half + 1e-12, side="right")

    d = depth
    sets = []
    for c in range(len(lin)):
        rr, gg, bb = (np.arange(lo_idx[c, j], hi_idx[c, j]) for j in range(3))
        codes = ((rr[:, None, None] << (2 * d)) | (gg[None, :, None] << d) | bb[None, None, :]).ravel()
        inside = membership_array(dkl[codes], dkl[c], axes[c]) <= 1.0
        sets.append(codes[inside])
    return sets


def build_cover(depth: int, provider: EllipsoidProvider, eccentricity: float = 25.0,
                t: DklTransform = DEFAULT_TRANSFORM) -> ColorCover:
    """Greedy set cover; ties go to the lowest color code."""
    if not 1 <= depth <= 8:
        raise ValueError("depth must be in 1..8")
    sets = _coverage_sets(depth, provider, eccentricity, t)
    size = len(sets)
    covered = np.zeros(size, dtype=bool)
    lut = np.full(size, -1, dtype=np.int64)
    chosen = []

    heap = [(-len(s), code) for code, s in enumerate(sets)]
    heapq.heapify(heap)
    remaining = size
    while remaining:
        neg, code = heapq.heappop(heap)
        gain = int(np.count_nonzero(~covered[sets[code]]))
        if gain == 0:
            continue
        if gain < -neg:
            heapq.heappush(heap, (-gain, code))
            continue
        new = sets[code][~covered[sets[code]]]
        covered[new] = True
        lut[new] = len(chosen)
        chosen.append(code)
        remaining -= gain

    spec = provider.spec() if hasattr(provider, "spec") else ""
    return ColorCover(depth, np.array(chosen, dtype=np.int64), lut, float(eccentricity), spec)


@dataclass(frozen=True, eq=False)
class SccStream:
    width: int
    height: int
    depth: int
    code_bits: int
    indices: np.ndarray  # (H, W)

    def to_bytes(self) -> bytes:
        head = STREAM_HEADER.pack(STREAM_MAGIC, self.width, self.height, self.depth, self.code_bits)
        if self.code_bits == 0:
            return head
        payload, _ = pack_fields(self.indices.ravel(), np.full(self.indices.size, self.code_bits))
        return head + payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "SccStream":
        if len(data) < STREAM_HEADER.size:
            raise ValueError("truncated SCC stream")
        magic, w, h, depth, bits = STREAM_HEADER.unpack_from(data)
        if magic != STREAM_MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        reader = BitReader(data[STREAM_HEADER.size:])
        idx = reader.read_array(w * h, bits) if bits else np.zeros(w * h, dtype=np.int64)
        return cls(w, h, depth, bits, idx.reshape(h, w))

    @property
    def bits_per_pixel(self) -> int:
        return self.code_bits


def scc_encode(frame, cover: ColorCover) -> SccStream:
    frame = np.asarray(frame)
    idx = cover.encode_lut[quantize_codes(frame, cover.depth)]
    return SccStream(frame.shape[1], frame.shape[0], cover.depth, cover.code_bits, idx)


def scc_decode(stream: SccStream, cover: ColorCover) -> np.ndarray:
    if stream.depth != cover.depth:
        raise ValueError("cover depth does not match stream")
    idx = np.asarray(stream.indices)
    if np.any(idx < 0) or np.any(idx >= len(cover.chosen)):
        raise ValueError("SCC index out of range")
    return cover.representatives()[idx]
