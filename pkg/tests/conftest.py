import numpy as np
import pytest

import pnpgmm as pg


def random_spd(d, rng, scale=1.0):
    A = rng.standard_normal((d, d))
    return A @ A.T * scale / d + 0.3 * np.eye(d)


def random_gmm(K, d, rng, mean_span=5.0, cov_scale=2.0, patch_size=None):
    """Random mixture; patch_size defaults to 1 for non-square d (test-only)."""
    if patch_size is None:
        r = int(round(np.sqrt(d)))
        patch_size = r if r * r == d else 1
    weights = rng.dirichlet(np.ones(K))
    means = rng.uniform(-mean_span, mean_span, (K, d))
    covs = np.array([random_spd(d, rng, cov_scale) for _ in range(K)])
    return pg.GmmModel(patch_size=patch_size, weights=weights, means=means,
                       covariances=covs)


def corpus_patches(generator, n_images, shape, p, rng, cap=12000):
    X = np.hstack([pg.extract_patches(generator(shape, rng), p).data
                   for _ in range(n_images)])
    idx = rng.choice(X.shape[1], min(cap, X.shape[1]), replace=False)
    return X[:, idx]


@pytest.fixture(scope="session")
def denoise_trend():
    """128x256 two-class composite at sigma=30 with p=8 libraries (criteria 6, 8)."""
    rng = np.random.default_rng(42)
    p, K = 8, 20
    Xb = corpus_patches(pg.blob_texture, 4, (96, 96), p, rng)
    Xt = corpus_patches(pg.text_texture, 4, (96, 96), p, rng)
    mb = pg.em_fit_clean(Xb, K, seed=0, max_iters=50)
    mt = pg.em_fit_clean(Xt, K, seed=0, max_iters=50)
    mg = pg.em_fit_clean(np.hstack([Xb[:, ::2], Xt[:, ::2]]), K, seed=0, max_iters=50)
    left = pg.blob_texture((128, 128), rng)
    right = pg.text_texture((128, 128), rng)
    composite, truth, _ = pg.make_composite([(left, "blobs"), (right, "text")], p)
    sigma = 30.0
    noisy = composite + pg.gaussian_noise(composite.shape, sigma, seed=123)
    multi = pg.ClassLibrary(classes=[("generic", mg), ("blobs", mb), ("text", mt)],
                            generic_index=0)
    single = pg.ClassLibrary(classes=[("generic", mg)], generic_index=0)
    return {
        "composite": composite, "noisy": noisy, "sigma": sigma,
        "truth": truth, "multi": multi, "single": single,
    }


@pytest.fixture(scope="session")
def deblur_trend():
    """Two-class composite with p=6 libraries for the deblurring trend (criterion 7)."""
    rng = np.random.default_rng(5)
    p, K = 6, 20
    Xb = corpus_patches(pg.blob_texture, 4, (96, 96), p, rng)
    Xt = corpus_patches(pg.text_texture, 4, (96, 96), p, rng)
    mb = pg.em_fit_clean(Xb, K, seed=0, max_iters=40)
    mt = pg.em_fit_clean(Xt, K, seed=0, max_iters=40)
    mg = pg.em_fit_clean(np.hstack([Xb[:, ::2], Xt[:, ::2]]), K, seed=0, max_iters=40)
    left = pg.blob_texture((128, 128), rng)
    right = pg.text_texture((128, 128), rng)
    composite, truth, _ = pg.make_composite([(left, "blobs"), (right, "text")], p)
    multi = pg.ClassLibrary(classes=[("generic", mg), ("blobs", mb), ("text", mt)],
                            generic_index=0)
    single = pg.ClassLibrary(classes=[("generic", mg)], generic_index=0)
    return {"composite": composite, "truth": truth, "multi": multi, "single": single,
            "patch_size": p}
