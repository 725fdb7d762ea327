"""Procedural class corpora and composite test images.

The benchmark classes are synthetic stand-ins with very different patch
statistics: high-contrast glyph-like "text", smooth low-frequency "blobs",
and oriented "gratings". Composites concatenate class images and carry a
ground-truth per-patch label field.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ArgumentError
from .classify import LabelField

__all__ = [
    "text_texture",
    "blob_texture",
    "grating_texture",
    "make_composite",
]


def text_texture(shape, rng: np.random.Generator) -> np.ndarray:
    """Binary glyph-like texture: dark strokes on a near-white page."""
    h, w = shape
    img = np.full((h, w), 250.0)
    n_strokes = max(4, (h * w) // 40)
    for _ in range(n_strokes):
        r = int(rng.integers(h))
        c = int(rng.integers(w))
        length = int(rng.integers(3, 13))
        thick = int(rng.integers(1, 3))
        value = float(rng.uniform(0, 40))
        if rng.integers(2) == 0:
            img[r : r + thick, c : c + length] = value
        else:
            img[r : r + length, c : c + thick] = value
    return img


def blob_texture(shape, rng: np.random.Generator) -> np.ndarray:
    """Smooth low-frequency texture, roughly mid-gray with soft structure."""
    h, w = shape
    field = rng.standard_normal((h, w))
    field = gaussian_filter(field, sigma=min(h, w) / 12, mode="wrap")
    lo, hi = field.min(), field.max()
    span = hi - lo if hi > lo else 1.0
    return 40.0 + 180.0 * (field - lo) / span


def grating_texture(shape, rng: np.random.Generator) -> np.ndarray:
    """Oriented sinusoidal grating with random angle, frequency, and phase."""
    h, w = shape
    theta = rng.uniform(0, np.pi)
    freq = rng.uniform(0.15, 0.5)
    phase = rng.uniform(0, 2 * np.pi)
    rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    wave = np.sin(freq * (rr * np.sin(theta) + cc * np.cos(theta)) + phase)
    return 127.5 + 110.0 * wave


def make_composite(images, patch_size: int, layout: str = "horizontal"):
    """Concatenate class images into one test image with a true label field.

    images is a list of (image, class_name) pairs. The per-patch ground truth
    assigns each patch location to the segment owning the majority of its
    pixels; ties go to the lower segment index. Returns
    (composite, LabelField, class_names).
    """
    if not images:
        raise ArgumentError("composite needs at least one image")
    arrays = [np.asarray(img, dtype=np.float64) for img, _ in images]
    names = [name for _, name in images]
    if layout == "vertical":
        arrays = [a.T for a in arrays]
    heights = {a.shape[0] for a in arrays}
    if len(heights) != 1:
        raise ArgumentError(f"incompatible segment heights: {sorted(heights)}")
    composite = np.hstack(arrays)
    h, w = composite.shape
    p = patch_size
    if p > h or p > w:
        raise ArgumentError(f"patch size {p} exceeds composite shape {composite.shape}")

    bounds = np.cumsum([0] + [a.shape[1] for a in arrays])
    gr, gc = h - p + 1, w - p + 1
    cols = np.arange(gc)
    overlap = np.empty((len(arrays), gc))
    for s in range(len(arrays)):
        lo = np.maximum(cols, bounds[s])
        hi = np.minimum(cols + p, bounds[s + 1])
        overlap[s] = np.maximum(hi - lo, 0)
    col_owner = np.argmax(overlap, axis=0)
    labels = np.broadcast_to(col_owner, (gr, gc)).copy().astype(np.int64)

    if layout == "vertical":
        composite = composite.T
        labels = labels.T
    elif layout != "horizontal":
        raise ArgumentError(f"unknown layout {layout!r}")
    return composite, LabelField(labels=labels), names
