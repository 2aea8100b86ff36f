"""Frame I/O: binary PPM (P6) natively, PNG through Pillow if it is installed."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class ImageFormatError(ValueError):
    pass


_WS = b" \t\n\r\v\f"


def parse_ppm(data: bytes) -> np.ndarray:
    """Decode a P6 file with maxval 255 into an (H, W, 3) uint8 array."""
    if data[:2] != b"P6":
        raise ImageFormatError("not a binary PPM (missing P6 magic)")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise ImageFormatError("truncated PPM header")
        ch = data[pos:pos + 1]
        if ch in _WS:
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise ImageFormatError("truncated PPM header")
            pos = end + 1
        else:
            start = pos
            while pos < len(data) and data[pos:pos + 1] not in _WS and data[pos:pos + 1] != b"#":
                pos += 1
            tok = data[start:pos]
            if not tok.isdigit():
                raise ImageFormatError(f"malformed PPM header token {tok!r}")
            fields.append(int(tok))
    if pos >= len(data) or data[pos:pos + 1] not in _WS:
        raise ImageFormatError("missing whitespace after PPM maxval")
    pos += 1
    width, height, maxval = fields
    if width == 0 or height == 0:
        raise ImageFormatError("PPM with zero dimension")
    if maxval != 255:
        raise ImageFormatError(f"unsupported PPM maxval {maxval} (only 255)")
    n = width * height * 3
    raster = data[pos:pos + n]
    if len(raster) < n:
        raise ImageFormatError(f"truncated PPM raster ({len(raster)} of {n} bytes)")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def format_ppm(frame) -> bytes:
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.dtype != np.uint8:
        raise ValueError("frame must be (H, W, 3) uint8")
    h, w = frame.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(frame).tobytes()


def load_frame(path) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P6":
        return parse_ppm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            from PIL import Image
        except ImportError:  # pragma: no cover
            raise ImageFormatError("PNG input needs Pillow") from None
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    raise ImageFormatError(f"{path}: unrecognized image format")


def save_frame(path, frame):
    path = Path(path)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(np.asarray(frame, dtype=np.uint8), "RGB").save(path)
    else:
        path.write_bytes(format_ppm(frame))
