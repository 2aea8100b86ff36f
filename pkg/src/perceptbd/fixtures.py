"""Synthetic test frames: smooth gradients, uniform fields and iid noise."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .frames import save_frame

CORPUS_SIZE = 128


def _to_u8(f):
    return np.clip(np.floor(f * 255 + 0.5), 0, 255).astype(np.uint8)


def smooth_gradient_corpus(size: int = CORPUS_SIZE) -> dict:
    """Four smooth sRGB gradients, keyed by name."""
    y, x = np.mgrid[0:size, 0:size] / (size - 1)
    r = np.hypot(x - 0.5, y - 0.5) / np.sqrt(0.5)

    frames = {}
    frames["sky"] = np.stack([0.25 + 0.3 * y, 0.45 + 0.35 * y, 0.95 - 0.15 * y], axis=-1)
    frames["green_blue"] = np.stack([0.3 + 0.4 * y, 0.8 - 0.6 * x, 0.2 + 0.6 * x], axis=-1)
    frames["sunset"] = np.stack([0.9 - 0.2 * y, 0.3 + 0.4 * y, 0.25 + 0.5 * y * x], axis=-1)
    frames["radial"] = np.stack([0.5 + 0.3 * r, 0.6 - 0.3 * r, 0.35 + 0.4 * r], axis=-1)
    return {k: _to_u8(v) for k, v in frames.items()}


def uniform_frame(size: int, value=(95, 95, 95)) -> np.ndarray:
    return np.broadcast_to(np.array(value, dtype=np.uint8), (size, size, 3)).copy()


def noise_frame(size: int, sigma: float = 8.0, mean: float = 128.0, seed: int = 0) -> np.ndarray:
    """Gaussian iid noise around ``mean``; moderate amplitude so ranges still grow with tile size."""
    rng = np.random.default_rng(seed)
    return np.clip(np.round(rng.normal(mean, sigma, (size, size, 3))), 0, 255).astype(np.uint8)


def write_corpus(directory) -> list:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, frame in smooth_gradient_corpus().items():
        p = directory / f"gradient_{name}.ppm"
        save_frame(p, frame)
        paths.append(p)
    return paths
