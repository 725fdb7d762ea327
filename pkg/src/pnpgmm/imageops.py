"""Images, overlapping patches, and periodic convolution.

Images are 2-D float64 arrays on the [0, 255] intensity scale. Patches are
extracted at every stride-1 position (no padding), vectorized column-major
within the patch and ordered row-major across patch-grid locations; the GMM
model files depend on this order, so it must not change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ArgumentError, DataError

__all__ = [
    "PatchMatrix",
    "extract_patches",
    "aggregate_patches",
    "normalize_kernel",
    "convolve_periodic",
    "transfer_function",
    "load_kernel",
    "save_kernel",
    "read_pgm",
    "write_pgm",
    "read_image",
    "write_image",
    "as_image",
]


def as_image(pixels) -> np.ndarray:
    """Validate and return a 2-D float64 image array."""
    img = np.asarray(pixels, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ArgumentError(f"expected a 2-D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise DataError("image contains non-finite pixel values")
    return img


@dataclass
class PatchMatrix:
    """All overlapping p x p patches of an image, one vectorized patch per column.

    data has shape (p*p, grid_rows*grid_cols); column j holds the patch whose
    top-left corner is at (j // grid_cols, j % grid_cols), flattened in
    Fortran (column-major) order.
    """

    patch_size: int
    grid_rows: int
    grid_cols: int
    data: np.ndarray

    @property
    def dim(self) -> int:
        return self.patch_size * self.patch_size

    @property
    def count(self) -> int:
        return self.grid_rows * self.grid_cols


def extract_patches(image, p: int) -> PatchMatrix:
    """Extract all (H-p+1)(W-p+1) overlapping p x p patches, stride 1."""
    img = as_image(image)
    h, w = img.shape
    if p < 1:
        raise ArgumentError(f"patch size must be positive, got {p}")
    if p > h or p > w:
        raise ArgumentError(f"patch size {p} exceeds image shape {img.shape}")
    gr, gc = h - p + 1, w - p + 1
    windows = sliding_window_view(img, (p, p))  # (gr, gc, p, p)
    # axes -> (col-in-patch, row-in-patch, grid_row, grid_col), then flatten
    data = np.ascontiguousarray(windows.transpose(3, 2, 0, 1)).reshape(p * p, gr * gc)
    return PatchMatrix(patch_size=p, grid_rows=gr, grid_cols=gc, data=data)


def aggregate_patches(patches: PatchMatrix, per_patch_weights, image_shape) -> np.ndarray:
    """Recombine overlapping patch estimates into an image.

    Each pixel is the weight-normalized average of all patch estimates that
    cover it; uniform weights give the plain overlap average. Accumulation
    order is fixed (per in-patch offset), so results are deterministic.
    """
    p = patches.patch_size
    gr, gc = patches.grid_rows, patches.grid_cols
    h, w = image_shape
    if (gr, gc) != (h - p + 1, w - p + 1):
        raise ArgumentError(
            f"patch grid {gr}x{gc} inconsistent with image shape {image_shape} and p={p}"
        )
    wts = np.asarray(per_patch_weights, dtype=np.float64)
    if wts.shape != (patches.count,):
        raise ArgumentError(f"expected {patches.count} weights, got shape {wts.shape}")
    if not np.all(np.isfinite(wts)) or np.any(wts <= 0):
        raise ArgumentError("patch weights must be strictly positive and finite")

    wgrid = wts.reshape(gr, gc)
    cube = patches.data.reshape(p, p, gr, gc)  # (col, row, grid_row, grid_col)
    num = np.zeros((h, w))
    den = np.zeros((h, w))
    for b in range(p):  # column offset within patch
        for a in range(p):  # row offset within patch
            num[a : a + gr, b : b + gc] += wgrid * cube[b, a]
            den[a : a + gr, b : b + gc] += wgrid
    return num / den


def normalize_kernel(taps) -> np.ndarray:
    """Validate a blur kernel and normalize it to unit sum."""
    k = np.asarray(taps, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise ArgumentError(f"kernel must be 2-D with odd dimensions, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise DataError("kernel contains non-finite entries")
    s = k.sum()
    if s == 0:
        raise ArgumentError("kernel sums to zero; cannot normalize")
    return k / s


def transfer_function(kernel, shape) -> np.ndarray:
    """Frequency response of the circulant convolution operator.

    The kernel is zero-padded to `shape` and circularly shifted so its center
    tap sits at (0, 0); the DC bin equals the kernel sum.
    """
    k = np.asarray(kernel, dtype=np.float64)
    h, w = shape
    kh, kw = k.shape
    if kh > h or kw > w:
        raise ArgumentError(f"kernel {k.shape} does not fit in shape {shape}")
    padded = np.zeros((h, w))
    padded[:kh, :kw] = k
    padded = np.roll(padded, (-(kh // 2), -(kw // 2)), axis=(0, 1))
    return np.fft.fft2(padded)


def convolve_periodic(image, kernel) -> np.ndarray:
    """Circular (periodic-boundary) convolution with a centered kernel, via FFT."""
    img = as_image(image)
    tf = transfer_function(kernel, img.shape)
    return np.real(np.fft.ifft2(np.fft.fft2(img) * tf))


# ---------------------------------------------------------------------------
# File I/O: plain-text kernels and 8-bit PGM (P5) images.

def load_kernel(path) -> np.ndarray:
    """Load a plain-text kernel: first line "rows cols", then row-major taps."""
    with open(path) as f:
        tokens = f.read().split()
    if len(tokens) < 2:
        raise DataError(f"kernel file {path} is empty or truncated")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        vals = [float(t) for t in tokens[2:]]
    except ValueError as e:
        raise DataError(f"kernel file {path}: {e}") from e
    if len(vals) != rows * cols:
        raise DataError(f"kernel file {path}: expected {rows * cols} taps, got {len(vals)}")
    return normalize_kernel(np.array(vals).reshape(rows, cols))


def save_kernel(path, taps) -> None:
    k = np.asarray(taps, dtype=np.float64)
    with open(path, "w") as f:
        f.write(f"{k.shape[0]} {k.shape[1]}\n")
        for row in k:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary PGM (P5) file as a float64 image."""
    with open(path, "rb") as f:
        raw = f.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        # skip whitespace and comments
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataError(f"{path}: truncated PGM header")
        fields.append(raw[start:pos])
    if fields[0] != b"P5":
        raise DataError(f"{path}: not a binary PGM (P5) file")
    try:
        w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError as e:
        raise DataError(f"{path}: bad PGM header") from e
    if maxval != 255:
        raise DataError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    pos += 1  # single whitespace byte after maxval
    pix = raw[pos : pos + w * h]
    if len(pix) != w * h:
        raise DataError(f"{path}: truncated PGM pixel data")
    return np.frombuffer(pix, dtype=np.uint8).reshape(h, w).astype(np.float64)


def write_pgm(path, image) -> None:
    """Write an image as 8-bit binary PGM, rounding half away from zero and clamping."""
    img = as_image(image)
    q = np.clip(quantize_u8(img), 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n" + f"{w} {h}\n255\n".encode())
        f.write(q.tobytes())


def quantize_u8(image) -> np.ndarray:
    """Round half away from zero to integers (no clamping)."""
    img = np.asarray(image, dtype=np.float64)
    return np.sign(img) * np.floor(np.abs(img) + 0.5)


def read_image(path) -> np.ndarray:
    """Read a grayscale image: PGM natively, PNG via Pillow when available."""
    path = str(path)
    if path.lower().endswith(".png"):
        try:
            from PIL import Image as PILImage
        except ImportError as e:
            raise DataError("PNG support requires Pillow") from e
        with PILImage.open(path) as im:
            return np.asarray(im.convert("L"), dtype=np.float64)
    return read_pgm(path)


def write_image(path, image) -> None:
    path = str(path)
    if path.lower().endswith(".png"):
        try:
            from PIL import Image as PILImage
        except ImportError as e:
            raise DataError("PNG support requires Pillow") from e
        img = np.clip(quantize_u8(as_image(image)), 0, 255).astype(np.uint8)
        PILImage.fromarray(img, mode="L").save(path)
    else:
        write_pgm(path, image)
