"""Gaussian mixture patch priors: EM training, MMSE denoising, log-likelihoods.

The mixture models the distribution of clean vectorized patches. Noisy
observations y = x + n with n ~ N(0, sigma^2 I) are handled in closed form:
likelihood evaluation adds sigma^2 to the component covariance eigenvalues,
and the per-component estimates are Wiener filters in the eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import ArgumentError, DataError
from .imageops import PatchMatrix

__all__ = [
    "EPS_FLOOR",
    "GmmModel",
    "DenoisedPatchSet",
    "em_fit_clean",
    "em_fit_noisy",
    "component_posteriors",
    "class_log_likelihood",
    "class_log_likelihood_batch",
    "mmse_denoise_patch",
    "denoise_patchset",
]

# covariance eigenvalue floor, on the [0, 255] intensity scale
EPS_FLOOR = 1e-4

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class GmmModel:
    """K-component Gaussian mixture over vectorized p x p patches."""

    patch_size: int
    weights: np.ndarray       # (K,), on the probability simplex
    means: np.ndarray         # (K, d)
    covariances: np.ndarray   # (K, d, d), symmetric, eigenvalues >= EPS_FLOOR
    log_likelihood_trace: np.ndarray | None = field(default=None, repr=False, compare=False)
    _eig: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def validate(self) -> None:
        K, d = self.n_components, self.dim
        if self.patch_size * self.patch_size != d:
            raise ArgumentError(f"patch_size {self.patch_size} inconsistent with d={d}")
        if self.means.shape != (K, d) or self.covariances.shape != (K, d, d):
            raise ArgumentError("inconsistent GMM parameter shapes")
        if abs(self.weights.sum() - 1.0) > 1e-12 or np.any(self.weights < 0):
            raise ArgumentError("mixture weights must lie on the probability simplex")
        asym = np.abs(self.covariances - self.covariances.transpose(0, 2, 1)).max()
        if asym >= 1e-10:
            raise ArgumentError(f"covariances not symmetric (max asymmetry {asym:.2e})")
        evals, _ = self.eig()
        # floored eigenvalues survive a reconstruct/re-decompose round trip
        # only up to ~||C|| * machine epsilon, so scale the slack accordingly
        slack = 1e-12 * max(1.0, float(np.abs(self.covariances).max()))
        if evals.min() < EPS_FLOOR - slack:
            raise ArgumentError(f"covariance eigenvalue {evals.min():.3e} below floor {EPS_FLOOR}")

    def eig(self):
        """Cached eigendecompositions: (evals (K, d), evecs (K, d, d))."""
        if self._eig is None:
            evals, evecs = np.linalg.eigh(self.covariances)
            self._eig = (evals, evecs)
        return self._eig


@dataclass
class DenoisedPatchSet:
    """MMSE patch estimates plus a scalar posterior variance per patch."""

    estimates: np.ndarray            # (d, N)
    posterior_variances: np.ndarray  # (N,), strictly positive


def _as_patch_data(patches) -> np.ndarray:
    if isinstance(patches, PatchMatrix):
        return patches.data
    return np.asarray(patches, dtype=np.float64)


def _weighted_log_densities(Y: np.ndarray, model: GmmModel, sigma: float) -> np.ndarray:
    """log alpha_m + log N(y; mu_m, C_m + sigma^2 I) for all components, (K, N)."""
    if sigma < 0:
        raise ArgumentError(f"sigma must be nonnegative, got {sigma}")
    d, n = Y.shape
    if d != model.dim:
        raise ArgumentError(f"patch dimension {d} does not match model dimension {model.dim}")
    evals, evecs = model.eig()
    lam = evals + sigma * sigma  # (K, d)
    out = np.empty((model.n_components, n))
    logw = np.log(model.weights)
    for m in range(model.n_components):
        z = evecs[m].T @ (Y - model.means[m][:, None])  # (d, N)
        maha = np.sum(z * z / lam[m][:, None], axis=0)
        out[m] = logw[m] - 0.5 * (d * _LOG_2PI + np.sum(np.log(lam[m])) + maha)
    return out


def component_posteriors(y_i, model: GmmModel, sigma: float) -> np.ndarray:
    """Posterior probability that each component generated the noisy patch y_i."""
    y = np.asarray(y_i, dtype=np.float64).reshape(-1, 1)
    logp = _weighted_log_densities(y, model, sigma)[:, 0]
    logp -= logsumexp(logp)
    return np.exp(logp)


def class_log_likelihood(y_i, model: GmmModel, sigma: float) -> float:
    """log p(y_i | model) under the noisy observation model."""
    y = np.asarray(y_i, dtype=np.float64).reshape(-1, 1)
    return float(logsumexp(_weighted_log_densities(y, model, sigma), axis=0)[0])


def class_log_likelihood_batch(patches, model: GmmModel, sigma: float) -> np.ndarray:
    """log p(y_i | model) for every column of a patch matrix, (N,)."""
    Y = _as_patch_data(patches)
    return logsumexp(_weighted_log_densities(Y, model, sigma), axis=0)


def _mmse_batch(Y: np.ndarray, model: GmmModel, sigma: float):
    """Vectorized MMSE denoising of the columns of Y. Returns (d, N), (N,)."""
    d, n = Y.shape
    if sigma == 0:
        return Y.copy(), np.full(n, EPS_FLOOR)
    logp = _weighted_log_densities(Y, model, sigma)  # (K, N)
    logp -= logsumexp(logp, axis=0, keepdims=True)
    beta = np.exp(logp)  # (K, N)

    evals, evecs = model.eig()
    s2 = sigma * sigma
    gain = evals / (evals + s2)                        # (K, d), Wiener gains
    resvar = s2 * np.sum(gain, axis=1)                 # (K,), tr(sigma^2 C (C+s2 I)^-1)

    xhat = np.zeros((d, n))
    comp_est = np.empty((model.n_components, d, n))
    for m in range(model.n_components):
        z = evecs[m].T @ (Y - model.means[m][:, None])
        v = model.means[m][:, None] + evecs[m] @ (gain[m][:, None] * z)
        comp_est[m] = v
        xhat += beta[m] * v
    # scalar posterior variance: mean over coordinates of the mixture
    # posterior covariance trace
    var = beta.T @ resvar  # (N,)
    for m in range(model.n_components):
        dev = comp_est[m] - xhat
        var += beta[m] * np.sum(dev * dev, axis=0)
    var = np.maximum(var / d, EPS_FLOOR)
    return xhat, var


def mmse_denoise_patch(y_i, model: GmmModel, sigma: float):
    """MMSE estimate of one clean patch plus its scalar posterior variance."""
    y = np.asarray(y_i, dtype=np.float64).reshape(-1, 1)
    est, var = _mmse_batch(y, model, sigma)
    return est[:, 0], float(var[0])


def denoise_patchset(patches, model: GmmModel, sigma: float) -> DenoisedPatchSet:
    """MMSE-denoise every column of a patch matrix."""
    Y = _as_patch_data(patches)
    est, var = _mmse_batch(Y, model, sigma)
    return DenoisedPatchSet(estimates=est, posterior_variances=var)


# ---------------------------------------------------------------------------
# EM training

def _kmeanspp_init(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding; X has one point per row."""
    n = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[int(rng.integers(n))]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers[k] = X[idx]
        d2 = np.minimum(d2, np.sum((X - centers[k]) ** 2, axis=1))
    return centers


def _floor_eigenvalues(S: np.ndarray, shift: float):
    """Symmetrize, subtract shift*I in the eigenbasis, floor at EPS_FLOOR."""
    S = 0.5 * (S + S.T)
    evals, evecs = np.linalg.eigh(S)
    evals = np.maximum(evals - shift, EPS_FLOOR)
    return (evecs * evals) @ evecs.T


def _em_fit(patches, K, sigma, seed, max_iters, tol) -> GmmModel:
    if isinstance(patches, PatchMatrix):
        p = patches.patch_size
        X = patches.data
    else:
        X = np.asarray(patches, dtype=np.float64)
        p = int(round(np.sqrt(X.shape[0])))
        if p * p != X.shape[0]:
            raise ArgumentError(f"patch dimension {X.shape[0]} is not a perfect square")
    if not np.all(np.isfinite(X)):
        raise DataError("patch data contains non-finite values")
    d, n = X.shape
    if K < 1 or K > n:
        raise ArgumentError(f"need 1 <= K <= N, got K={K}, N={n}")
    if d > n:
        raise ArgumentError(f"need at least d={d} patches, got {n}")
    if sigma < 0:
        raise ArgumentError(f"sigma must be nonnegative, got {sigma}")
    s2 = sigma * sigma

    rng = np.random.default_rng(seed)
    sub = X.T if n <= 50 * K else X[:, rng.choice(n, 50 * K, replace=False)].T
    centers = _kmeanspp_init(sub, K, rng)

    # one hard-assignment M-step on the subsample
    dist = np.sum((sub[:, None, :] - centers[None]) ** 2, axis=2)
    assign = np.argmin(dist, axis=1)
    weights = np.empty(K)
    means = np.empty((K, d))
    covs = np.empty((K, d, d))
    global_cov = np.cov(sub.T, bias=True).reshape(d, d)
    for k in range(K):
        members = sub[assign == k]
        if len(members) == 0:
            weights[k] = 1.0
            means[k] = centers[k]
            covs[k] = _floor_eigenvalues(global_cov, s2)
        else:
            weights[k] = len(members)
            means[k] = members.mean(axis=0)
            cc = members - means[k]
            covs[k] = _floor_eigenvalues(cc.T @ cc / len(members), s2)
    weights /= weights.sum()

    model = GmmModel(patch_size=p, weights=weights, means=means, covariances=covs)
    trace = []
    prev_ll = -np.inf
    for _ in range(max_iters):
        logp = _weighted_log_densities(X, model, sigma)  # (K, N)
        norm = logsumexp(logp, axis=0)
        ll = float(np.mean(norm))
        trace.append(ll)
        resp = np.exp(logp - norm[None, :])  # (K, N)

        nk = resp.sum(axis=1)
        nk = np.maximum(nk, 1e-300)
        weights = nk / n
        means = (resp @ X.T) / nk[:, None]
        covs = np.empty((K, d, d))
        for k in range(K):
            xc = X - means[k][:, None]
            covs[k] = _floor_eigenvalues((xc * resp[k]) @ xc.T / nk[k], s2)
        model = GmmModel(patch_size=p, weights=weights, means=means, covariances=covs)

        if np.isfinite(prev_ll) and abs(ll - prev_ll) < tol * max(abs(prev_ll), 1e-12):
            break
        prev_ll = ll

    model.log_likelihood_trace = np.array(trace)
    return model


def em_fit_clean(patches, K: int, seed: int = 0, max_iters: int = 100,
                 tol: float = 1e-6) -> GmmModel:
    """Fit a GMM to clean patches by EM with k-means++ initialization."""
    return _em_fit(patches, K, 0.0, seed, max_iters, tol)


def em_fit_noisy(patches, sigma: float, K: int, seed: int = 0, max_iters: int = 100,
                 tol: float = 1e-6) -> GmmModel:
    """Fit a clean-patch GMM directly to noisy patches.

    Responsibilities use the noisy covariances C + sigma^2 I; the M-step
    subtracts sigma^2 from the eigenvalues of the noisy-domain covariance and
    floors them. sigma = 0 reproduces em_fit_clean bit for bit.
    """
    return _em_fit(patches, K, float(sigma), seed, max_iters, tol)
