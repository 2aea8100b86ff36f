"""End-to-end compression: eccentricity, foveal bypass, adjustment, BD encoding, stats."""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .adjust import CANDIDATES, Case, adjust_tiles
from .codec import (
    BASE_BITS,
    BITLEN_BITS,
    FLAG_ADJUSTED,
    FrameBitstream,
    bitlen_of_range,
    decode_frame,
    encode_tiled,
    pad_frame,
    to_tiles,
)
from .colorspace import DEFAULT_TRANSFORM, DklTransform, rgb_to_dkl_array, srgb_to_linear
from .perception import (
    DEFAULT_MODEL,
    DisplayGeometry,
    EllipsoidProvider,
    GazePoint,
    eccentricity_map,
)

REPORT_SCHEMA = "pbd-report/1"
TILE_SIZES = (2, 4, 8, 16)
DRAM_PJ_PER_PIXEL = 3477.0
THREADS_ENV = "PBD_THREADS"


@dataclass(frozen=True)
class PipelineConfig:
    tile_size: int = 4
    gaze: GazePoint | None = None           # None: screen center
    display: DisplayGeometry | None = None  # None: frame size, 100 deg horizontal FoV
    foveal_radius_deg: float = 10.0
    provider: EllipsoidProvider = DEFAULT_MODEL
    energy_per_pixel_pj: float = DRAM_PJ_PER_PIXEL
    workers: int = 1
    transform: DklTransform = field(default=DEFAULT_TRANSFORM, compare=False)

    def __post_init__(self):
        if self.tile_size not in TILE_SIZES:
            raise ValueError(f"tile_size must be one of {TILE_SIZES}")
        if not self.foveal_radius_deg >= 0:
            raise ValueError("foveal radius must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def resolve(self, height, width):
        display = self.display or DisplayGeometry(width, height, 100.0, min(179.0, 100.0 * height / width))
        gaze = self.gaze or GazePoint(width / 2, height / 2)
        return display, gaze


def workers_from_env(default: int = 1) -> int:
    val = os.environ.get(THREADS_ENV)
    return max(1, int(val)) if val else default


@dataclass
class CompressionReport:
    width: int
    height: int
    tile_size: int
    nocom_bits: int
    bd_bits: int
    ours_bits: int
    bd_bpp: dict
    ours_bpp: dict
    case_counts: dict
    psnr_db: float
    energy_j: dict
    clamped_tiles: int
    provider: str = ""
    foveal_radius_deg: float = 10.0
    gaze: tuple = ()

    @property
    def pixels(self) -> int:
        return self.width * self.height

    @property
    def case_fractions(self) -> dict:
        total = sum(self.case_counts.values())
        return {k: v / total for k, v in self.case_counts.items()}

    @property
    def reduction_vs_nocom(self) -> float:
        return 1.0 - self.ours_bits / self.nocom_bits

    @property
    def reduction_vs_bd(self) -> float:
        return 1.0 - self.ours_bits / self.bd_bits

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["psnr_db"] = "inf" if math.isinf(self.psnr_db) else self.psnr_db
        d["gaze"] = list(self.gaze)
        return {
            "schema": REPORT_SCHEMA,
            **d,
            "pixels": self.pixels,
            "case_fractions": self.case_fractions,
            "reduction_vs_nocom": self.reduction_vs_nocom,
            "reduction_vs_bd": self.reduction_vs_bd,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class PipelineResult(NamedTuple):
    bitstream: FrameBitstream
    decoded: np.ndarray
    report: CompressionReport


def psnr(a, b) -> float:
    """Peak-255 PSNR over all channels; identical frames give ``math.inf``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return math.inf
    return float(10.0 * np.log10(255.0 ** 2 / mse))


def energy_estimate(total_bytes, cfg: PipelineConfig = PipelineConfig()) -> float:
    """DRAM traffic energy in joules.

    ``energy_per_pixel * (bytes / uncompressed_bytes) * pixels`` reduces to
    ``energy_per_pixel * bytes / 3`` since the uncompressed frame is 3 bytes/pixel.
    """
    return cfg.energy_per_pixel_pj * 1e-12 * total_bytes / 3.0


def bpp_breakdown(tiles, pixels) -> dict:
    """Base / metadata / delta bits per pixel of BD-encoded tiles (T, N, 3)."""
    tiles = np.asarray(tiles)
    n_tiles, n_pix = tiles.shape[:2]
    ranges = tiles.max(axis=1).astype(np.int64) - tiles.min(axis=1)
    base = 3 * BASE_BITS * n_tiles
    meta = 3 * BITLEN_BITS * n_tiles
    delta = int(n_pix * bitlen_of_range(ranges).sum())
    out = {"base": base / pixels, "metadata": meta / pixels, "delta": delta / pixels}
    out["total"] = out["base"] + out["metadata"] + out["delta"]
    out["payload_bits"] = base + meta + delta
    return out


def _adjust_parallel(pixels, centers, axes, workers, transform):
    if workers <= 1 or len(pixels) < 2 * workers:
        return adjust_tiles(pixels, centers, axes, transform)
    bounds = np.linspace(0, len(pixels), 4 * workers + 1).astype(int)
    chunks = [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(lambda ab: adjust_tiles(pixels[ab[0]:ab[1]], centers[ab[0]:ab[1]],
                                                    axes[ab[0]:ab[1]], transform), chunks))
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


@dataclass(frozen=True, eq=False)
class FrameAdjustment:
    """Tile-level outcome of the adjustment stage.

    ``tiles`` and ``adjusted`` are (T, n*n, 3) uint8 over the padded frame;
    ``active`` indexes the tiles outside the fovea, and ``linear``,
    ``centers`` and ``axes`` hold the pre-quantization result and the
    ellipsoids for those tiles only.
    """

    tiles: np.ndarray
    adjusted: np.ndarray
    cases: np.ndarray
    clamped: int
    active: np.ndarray
    linear: np.ndarray
    centers: np.ndarray
    axes: np.ndarray
    gaze: GazePoint


def adjust_frame(frame, cfg: PipelineConfig = PipelineConfig()) -> FrameAdjustment:
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.dtype != np.uint8:
        raise ValueError("frame must be (H, W, 3) uint8")
    h, w = frame.shape[:2]
    n = cfg.tile_size
    display, gaze = cfg.resolve(h, w)

    tiles = to_tiles(pad_frame(frame, n), n)
    ecc = to_tiles(pad_frame(eccentricity_map(h, w, gaze, display), n), n)
    bypass = ecc.max(axis=1) <= cfg.foveal_radius_deg
    active = np.flatnonzero(~bypass)

    out = tiles.copy()
    cases = np.full(len(tiles), Case.SKIPPED.value, dtype=object)
    clamped = 0
    lin = centers = axes = np.empty((0, n * n, 3))
    if active.size:
        lin = srgb_to_linear(tiles[active])
        centers = rgb_to_dkl_array(lin, cfg.transform)
        axes = cfg.provider.axes(lin, ecc[active])
        res = _adjust_parallel(lin, centers, axes, cfg.workers, cfg.transform)
        out[active] = res["srgb"]
        lin = res["linear"]
        picked = res["choice"] != CANDIDATES.index(None)
        cases[active[picked]] = np.where(res["c2"][picked], Case.C2.value, Case.C1.value)
        clamped = int(np.count_nonzero(res["clamped"] & picked))
    return FrameAdjustment(tiles, out, cases, clamped, active, lin, centers, axes, gaze)


def run_pipeline(frame, cfg: PipelineConfig = PipelineConfig()) -> PipelineResult:
    frame = np.asarray(frame)
    adj = adjust_frame(frame, cfg)
    h, w = frame.shape[:2]
    n = cfg.tile_size
    gaze, tiles, out, cases, clamped = adj.gaze, adj.tiles, adj.adjusted, adj.cases, adj.clamped

    changed = bool(np.any(out != tiles))
    gaze_xy = (gaze.x_px, gaze.y_px)
    bs = encode_tiled(out, w, h, n, gaze_xy, FLAG_ADJUSTED if changed else 0)
    bd = encode_tiled(tiles, w, h, n, gaze_xy)
    decoded = decode_frame(bs)

    counts = {c.value: int(np.count_nonzero(cases == c.value)) for c in Case}
    pixels = h * w
    report = CompressionReport(
        width=w,
        height=h,
        tile_size=n,
        nocom_bits=24 * pixels,
        bd_bits=bd.n_bits,
        ours_bits=bs.n_bits,
        bd_bpp=bpp_breakdown(tiles, pixels),
        ours_bpp=bpp_breakdown(out, pixels),
        case_counts=counts,
        psnr_db=psnr(frame, decoded),
        energy_j={
            "nocom": energy_estimate(3 * pixels, cfg),
            "bd": energy_estimate(bd.n_bits // 8, cfg),
            "ours": energy_estimate(bs.n_bits // 8, cfg),
        },
        clamped_tiles=clamped,
        provider=cfg.provider.spec(),
        foveal_radius_deg=cfg.foveal_radius_deg,
        gaze=gaze_xy,
    )
    return PipelineResult(bs, decoded, report)


def tile_sweep(frame, cfg: PipelineConfig = PipelineConfig(), sizes=TILE_SIZES) -> dict:
    return {s: run_pipeline(frame, dataclasses.replace(cfg, tile_size=s)).report for s in sizes}


SWEEP_COLUMNS = ("tile_size", "bd_bpp", "ours_bpp", "reduction_vs_nocom", "reduction_vs_bd",
                 "c1", "c2", "skipped")


def sweep_rows(reports: dict) -> list:
    rows = []
    for size, r in reports.items():
        fr = r.case_fractions
        rows.append({
            "tile_size": size,
            "bd_bpp": r.bd_bits / r.pixels,
            "ours_bpp": r.ours_bits / r.pixels,
            "reduction_vs_nocom": r.reduction_vs_nocom,
            "reduction_vs_bd": r.reduction_vs_bd,
            "c1": fr["C1"],
            "c2": fr["C2"],
            "skipped": fr["Skipped"],
        })
    return rows
