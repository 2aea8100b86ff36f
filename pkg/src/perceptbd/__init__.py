"""Perception-aware Base+Delta framebuffer compression."""

from .adjust import AdjustedTile, Case, PlanePair, Tile, adjust_tile, adjust_tile_axis, compute_planes
from .codec import (
    EncodedTile,
    FrameBitstream,
    bits_of,
    decode_frame,
    decode_tile,
    encode_frame,
    encode_tile,
)
from .colorspace import (
    DEFAULT_TRANSFORM,
    DklColor,
    DklTransform,
    LinearColor,
    SrgbColor,
    dkl_to_rgb,
    linear_to_srgb_channel,
    rgb_to_dkl,
    srgb_to_linear_channel,
)
from .geometry import Axis, ExtremaPair, QuadricSurface, dkl_to_quadric, extrema_points, extrema_vector, membership
from .perception import (
    DEFAULT_MODEL,
    ConstantModel,
    DiscriminationEllipsoid,
    DisplayGeometry,
    GazePoint,
    LinearEccentricityModel,
    TableModel,
    eccentricity_of_pixel,
    ellipsoid_for,
    load_table_model,
)
from .pipeline import (
    CompressionReport,
    FrameAdjustment,
    PipelineConfig,
    adjust_frame,
    energy_estimate,
    psnr,
    run_pipeline,
    tile_sweep,
)

__version__ = "0.1.0"
