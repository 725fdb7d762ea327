"""Plug-and-play ADMM deconvolution with a class-adapted GMM prior.

Degrades a two-class composite with a 9x9 uniform blur at BSNR 40 dB, then
restores it three ways: generic prior only, per-patch ML classification, and
Potts-regularized alpha-expansion classification. Prints the ISNR of each and
writes the restored images, label maps, and per-iteration diagnostics.

Run:  python3 demos/demo_deblur.py [outdir]
"""

import os
import sys
import time

import numpy as np

import pnpgmm as pg
from demo_denoise import train_library


def main(outdir="demo_out"):
    os.makedirs(outdir, exist_ok=True)
    rng = np.random.default_rng(5)
    p = 6

    multi, single = train_library(rng, p=p, K=20)
    left = pg.blob_texture((128, 128), rng)
    right = pg.text_texture((128, 128), rng)
    clean, _, _ = pg.make_composite([(left, "blobs"), (right, "text")], p)

    spec = pg.experiment_spec("exp3", reference=clean, seed=11)
    observed = pg.degrade(clean, spec)
    print(f"BSNR of the degraded input: {pg.bsnr(pg.convolve_periodic(clean, spec.kernel), spec.noise_variance):.2f} dB")
    pg.write_pgm(os.path.join(outdir, "degraded.pgm"), observed)

    model = pg.DegradationModel(kernel=spec.kernel,
                                sigma=float(np.sqrt(spec.noise_variance)))
    for mode, lib in (("none", single), ("ml", multi), ("alpha", multi)):
        cfg = pg.RestorationConfig(patch_size=p, mu=0.05, max_iters=40,
                                   rel_tol=1e-5, classify_mode=mode, beta=2.0,
                                   switch_iteration=20, switch_k=20, seed=0)
        t0 = time.perf_counter()
        restored, labels, diag = pg.restore(observed, model, lib, cfg)
        dt = time.perf_counter() - t0
        tag = f"deblur_{mode}"
        pg.write_pgm(os.path.join(outdir, f"{tag}.pgm"), restored)
        from pnpgmm.admm import write_diagnostics_csv
        write_diagnostics_csv(os.path.join(outdir, f"{tag}_diag.csv"), diag)
        if mode != "none":
            pg.write_label_field(os.path.join(outdir, f"{tag}_labels.pgm"),
                                 os.path.join(outdir, f"{tag}_labels.txt"),
                                 labels, lib.names)
        print(f"mode {mode:5s}: ISNR {pg.isnr(observed, restored, clean):6.3f} dB"
              f"  ({len(diag)} iterations, {dt:.1f} s)")


if __name__ == "__main__":
    main(*sys.argv[1:2])
