"""Persistence: GMMPRIOR v1 model files and class-library bundle manifests."""

from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DataError
from .gmm import GmmModel

__all__ = [
    "save_model",
    "load_model",
    "export_model_text",
    "ClassLibrary",
    "load_library",
    "save_manifest",
]

_MAGIC = b"GMMPRIOR v1\n"


def save_model(path, model: GmmModel) -> None:
    """Write a model as a GMMPRIOR v1 file.

    Layout after the header line: K, p, d, weights, means (row-major),
    covariances (K row-major d x d blocks), all little-endian float64,
    followed by a little-endian CRC-32 of the payload.
    """
    model.validate()
    K, d = model.n_components, model.dim
    payload = np.concatenate([
        np.array([K, model.patch_size, d], dtype=np.float64),
        np.ascontiguousarray(model.weights, dtype=np.float64).ravel(),
        np.ascontiguousarray(model.means, dtype=np.float64).ravel(),
        np.ascontiguousarray(model.covariances, dtype=np.float64).ravel(),
    ]).astype("<f8").tobytes()
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(payload)
        f.write(struct.pack("<I", zlib.crc32(payload)))


def load_model(path) -> GmmModel:
    """Load a GMMPRIOR v1 file, verifying the CRC and model invariants."""
    with open(path, "rb") as f:
        raw = f.read()
    if not raw.startswith(_MAGIC):
        raise DataError(f"{path}: not a GMMPRIOR v1 file")
    payload, tail = raw[len(_MAGIC):-4], raw[-4:]
    if len(raw) < len(_MAGIC) + 4 or struct.unpack("<I", tail)[0] != zlib.crc32(payload):
        raise DataError(f"{path}: CRC mismatch, file corrupt")
    vals = np.frombuffer(payload, dtype="<f8")
    if len(vals) < 3:
        raise DataError(f"{path}: truncated model file")
    K, p, d = int(vals[0]), int(vals[1]), int(vals[2])
    expected = 3 + K + K * d + K * d * d
    if len(vals) != expected:
        raise DataError(f"{path}: expected {expected} values, got {len(vals)}")
    off = 3
    weights = vals[off:off + K].copy(); off += K
    means = vals[off:off + K * d].reshape(K, d).copy(); off += K * d
    covs = vals[off:].reshape(K, d, d).copy()
    model = GmmModel(patch_size=p, weights=weights, means=means, covariances=covs)
    model.validate()
    return model


def export_model_text(path, model: GmmModel) -> None:
    """Plain-text dump of a model, for debugging only (not reloadable)."""
    with open(path, "w") as f:
        f.write(f"GMMPRIOR v1 text K={model.n_components} p={model.patch_size} d={model.dim}\n")
        f.write("weights: " + " ".join(repr(float(w)) for w in model.weights) + "\n")
        for m in range(model.n_components):
            f.write(f"component {m} mean: "
                    + " ".join(repr(float(v)) for v in model.means[m]) + "\n")
            f.write(f"component {m} covariance:\n")
            for row in model.covariances[m]:
                f.write("  " + " ".join(repr(float(v)) for v in row) + "\n")


@dataclass
class ClassLibrary:
    """Ordered set of named class models plus the designated generic model."""

    classes: list  # list of (name, GmmModel)
    generic_index: int

    def __post_init__(self):
        if not self.classes:
            raise ArgumentError("class library must contain at least one class")
        names = [name for name, _ in self.classes]
        if len(set(names)) != len(names):
            raise ArgumentError(f"duplicate class names in library: {names}")
        sizes = {model.patch_size for _, model in self.classes}
        if len(sizes) != 1:
            raise ArgumentError(f"library mixes patch sizes: {sorted(sizes)}")
        if not 0 <= self.generic_index < len(self.classes):
            raise ArgumentError(f"generic index {self.generic_index} out of range")

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def patch_size(self) -> int:
        return self.classes[0][1].patch_size

    @property
    def names(self) -> list:
        return [name for name, _ in self.classes]

    @property
    def models(self) -> list:
        return [model for _, model in self.classes]

    def replace_generic(self, model: GmmModel) -> "ClassLibrary":
        name = self.classes[self.generic_index][0]
        classes = list(self.classes)
        classes[self.generic_index] = (name, model)
        return ClassLibrary(classes=classes, generic_index=self.generic_index)


def load_library(manifest_path) -> ClassLibrary:
    """Load a bundle manifest: one "name = path [generic]" line per class.

    Relative model paths resolve against the manifest's directory. Exactly one
    class may carry the [generic] marker; without it the first class is generic.
    """
    base = os.path.dirname(os.path.abspath(manifest_path))
    classes = []
    generic = None
    with open(manifest_path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{manifest_path}:{lineno}: expected 'name = path'")
            name, rhs = (s.strip() for s in line.split("=", 1))
            is_generic = rhs.endswith("[generic]")
            if is_generic:
                rhs = rhs[: -len("[generic]")].strip()
            if is_generic:
                if generic is not None:
                    raise DataError(f"{manifest_path}:{lineno}: multiple [generic] markers")
                generic = len(classes)
            path = rhs if os.path.isabs(rhs) else os.path.join(base, rhs)
            classes.append((name, load_model(path)))
    return ClassLibrary(classes=classes, generic_index=0 if generic is None else generic)


def save_manifest(manifest_path, entries, generic_name) -> None:
    """Write a bundle manifest from (name, model_path) pairs."""
    with open(manifest_path, "w") as f:
        for name, path in entries:
            marker = " [generic]" if name == generic_name else ""
            f.write(f"{name} = {path}{marker}\n")
