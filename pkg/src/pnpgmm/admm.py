"""Plug-and-play ADMM restoration with the multi-class GMM patch denoiser.

The data subproblem has a closed form (per-pixel for denoising, an FFT solve
for periodic deconvolution); the prior subproblem is Gaussian denoising at
effective noise level sqrt(1/mu), handled by classifying each patch and
applying its class's GMM MMSE denoiser, with inverse-posterior-variance
aggregation of the overlapping estimates.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DivergenceError
from .gmm import denoise_patchset, em_fit_clean
from .imageops import (PatchMatrix, aggregate_patches, as_image,
                       extract_patches, transfer_function)
from .classify import LabelField, classify_patches
from .modelio import ClassLibrary

__all__ = [
    "DegradationModel",
    "AdmmState",
    "RestorationConfig",
    "x_update",
    "v_update",
    "dual_update",
    "gmm_switch",
    "restore",
    "write_diagnostics_csv",
]


@dataclass
class DegradationModel:
    """y = Ax + n with A the identity or periodic convolution by a kernel."""

    kernel: np.ndarray | None = None  # None means identity
    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ArgumentError(f"noise std must be nonnegative, got {self.sigma}")

    def apply(self, image: np.ndarray) -> np.ndarray:
        if self.kernel is None:
            return image.copy()
        from .imageops import convolve_periodic
        return convolve_periodic(image, self.kernel)


@dataclass
class AdmmState:
    x: np.ndarray
    v: np.ndarray
    d: np.ndarray
    mu: float
    k: int = 0

    def __post_init__(self):
        if not (self.x.shape == self.v.shape == self.d.shape):
            raise ArgumentError("ADMM state arrays must share one shape")
        if self.mu <= 0:
            raise ArgumentError(f"penalty mu must be positive, got {self.mu}")


@dataclass
class RestorationConfig:
    patch_size: int = 6
    mu: float = 0.05
    max_iters: int = 200
    rel_tol: float = 1e-4
    classify_mode: str = "ml"  # none | ml | alpha
    beta: float = 2.0
    switch_iteration: int | None = 100
    switch_k: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.patch_size < 2:
            raise ArgumentError("patch size must be at least 2")
        if self.max_iters < 1:
            raise ArgumentError("max_iters must be at least 1")
        if self.switch_iteration is not None and self.switch_iteration > self.max_iters:
            raise ArgumentError("switch_iteration exceeds max_iters")

    @property
    def sigma_eff(self) -> float:
        return float(np.sqrt(1.0 / self.mu))


def x_update(state: AdmmState, y: np.ndarray, model: DegradationModel,
             tf: np.ndarray | None = None) -> np.ndarray:
    """Closed-form solve of (A^T A + mu I) x = A^T y + mu (v + d).

    tf optionally carries the precomputed transfer function of the kernel.
    """
    mu = state.mu
    rhs = state.v + state.d
    if model.kernel is None:
        return (y + mu * rhs) / (1.0 + mu)
    if tf is None:
        tf = transfer_function(model.kernel, y.shape)
    Y = np.fft.fft2(y)
    X = (np.conj(tf) * Y + mu * np.fft.fft2(rhs)) / (np.abs(tf) ** 2 + mu)
    return np.real(np.fft.ifft2(X))


def multiclass_denoise(z: np.ndarray, library: ClassLibrary, sigma: float,
                       mode: str = "ml", beta: float = 2.0,
                       prev: LabelField | None = None):
    """Classify, per-class MMSE-denoise, and aggregate. Returns (image, labels)."""
    p = library.patch_size
    patches = extract_patches(z, p)
    labels = classify_patches(patches, library, sigma, mode=mode, beta=beta, prev=prev)
    flat = labels.flat()
    estimates = np.empty_like(patches.data)
    variances = np.empty(patches.count)
    for c, model in enumerate(library.models):
        sel = np.flatnonzero(flat == c)
        if len(sel) == 0:
            continue
        result = denoise_patchset(patches.data[:, sel], model, sigma)
        estimates[:, sel] = result.estimates
        variances[sel] = result.posterior_variances
    out = aggregate_patches(
        PatchMatrix(p, patches.grid_rows, patches.grid_cols, estimates),
        1.0 / variances, z.shape)
    return out, labels


def v_update(state: AdmmState, library: ClassLibrary, config: RestorationConfig,
             prev_labels: LabelField | None = None):
    """Denoise the pseudo-observation x - d at the effective noise level."""
    z = state.x - state.d
    return multiclass_denoise(z, library, config.sigma_eff,
                              mode=config.classify_mode, beta=config.beta,
                              prev=prev_labels)


def dual_update(state: AdmmState) -> np.ndarray:
    return state.d - (state.x - state.v)


def gmm_switch(state: AdmmState, library: ClassLibrary,
               config: RestorationConfig) -> ClassLibrary:
    """Retrain the generic model on patches of the current estimate."""
    patches = extract_patches(state.x, library.patch_size)
    model = em_fit_clean(patches, config.switch_k, seed=config.seed)
    return library.replace_generic(model)


def restore(y, model: DegradationModel, library: ClassLibrary,
            config: RestorationConfig, denoiser=None):
    """Run the full plug-and-play loop. Returns (image, labels, diagnostics).

    denoiser, when given, replaces the multi-class GMM prior step: a callable
    (z, sigma_eff) -> image used as the proximity operator (classification is
    skipped in that case). Diagnostics is a list of per-iteration dict rows.
    """
    y = as_image(y)
    x = y.copy()
    v = y.copy()
    d = np.zeros_like(y)
    labels = None
    diagnostics = []
    state = AdmmState(x=x, v=v, d=d, mu=config.mu, k=0)
    for k in range(1, config.max_iters + 1):
        t0 = time.perf_counter()
        x_prev = state.x
        state.x = x_update(state, y, model)
        if denoiser is not None:
            state.v = denoiser(state.x - state.d, config.sigma_eff)
            labels_new = labels
        else:
            state.v, labels_new = v_update(state, library, config, prev_labels=labels)
        state.d = dual_update(state)
        state.k = k

        if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.v))
                and np.all(np.isfinite(state.d))):
            raise DivergenceError(f"non-finite ADMM state at iteration {k}", iteration=k)

        changed = 0
        if labels is not None and labels_new is not None:
            changed = int(np.count_nonzero(labels.labels != labels_new.labels))
        labels = labels_new
        primal = float(np.linalg.norm(state.x - state.v))
        denom = max(float(np.linalg.norm(x_prev)), 1e-30)
        rel_change = float(np.linalg.norm(state.x - x_prev)) / denom
        diagnostics.append({
            "k": k,
            "primal_residual": primal,
            "rel_change": rel_change,
            "sigma_eff": config.sigma_eff,
            "labels_changed": changed,
            "wall_ms": (time.perf_counter() - t0) * 1e3,
        })

        if config.switch_iteration is not None and k == config.switch_iteration \
                and denoiser is None:
            library = gmm_switch(state, library, config)
        if rel_change < config.rel_tol:
            break

    if labels is None:
        grid = y.shape[0] - library.patch_size + 1, y.shape[1] - library.patch_size + 1
        labels = LabelField(labels=np.full(grid, library.generic_index, dtype=np.int64))
    return state.x, labels, diagnostics


def write_diagnostics_csv(path, diagnostics) -> None:
    """One CSV row per iteration: k, primal residual, relative change, ..."""
    fields = ["k", "primal_residual", "rel_change", "sigma_eff",
              "labels_changed", "wall_ms"]
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in diagnostics:
            writer.writerow(row)
