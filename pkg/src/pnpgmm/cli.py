"""Command-line surface: train, denoise, deblur, segment, evaluate, bench."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .errors import ArgumentError, DataError, DivergenceError
from .imageops import extract_patches, load_kernel, read_image, write_image
from .gmm import em_fit_clean, em_fit_noisy
from .modelio import load_library, load_model, save_model, ClassLibrary
from .classify import classify_patches, write_label_field
from .admm import (DegradationModel, RestorationConfig, multiclass_denoise,
                   restore, write_diagnostics_csv)
from .metrics import MetricReport, bsnr, isnr, psnr, run_bench


def _add_restore_flags(sub, deblur: bool):
    sub.add_argument("--mode", choices=["none", "ml", "alpha"], default="ml",
                     help="patch classification mode")
    sub.add_argument("--beta", type=float, default=2.0, help="Potts smoothness weight")
    sub.add_argument("--seed", type=int, default=0)
    if deblur:
        sub.add_argument("--mu", type=float, default=0.05, help="ADMM penalty")
        sub.add_argument("--patch-size", type=int, default=None,
                         help="override the library patch size check (informational)")
        sub.add_argument("--max-iters", type=int, default=200)
        sub.add_argument("--rel-tol", type=float, default=1e-4)
        sub.add_argument("--switch-iter", type=int, default=100,
                         help="iteration at which the generic GMM is retrained; 0 disables")
        sub.add_argument("--switch-k", type=int, default=20)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnpgmm",
        description="Class-adapted plug-and-play image restoration with GMM patch priors")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a GMM patch prior from images")
    p.add_argument("images", nargs="+", help="training images (PGM/PNG)")
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.add_argument("-K", type=int, default=20, help="mixture components")
    p.add_argument("-p", "--patch-size", type=int, default=8)
    p.add_argument("--sigma", type=float, default=None,
                   help="train from noisy patches at this noise std")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("denoise", help="single-pass multi-class GMM denoising")
    p.add_argument("input")
    p.add_argument("--library", required=True, help="class-library manifest")
    p.add_argument("--sigma", type=float, required=True, help="noise std")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--labels", default=None, help="write the label map PGM here")
    p.add_argument("--self-train", action="store_true",
                   help="train a noisy-EM model on the input and use it as the generic class")
    p.add_argument("--self-train-k", type=int, default=20)
    _add_restore_flags(p, deblur=False)

    p = sub.add_parser("deblur", help="plug-and-play ADMM deconvolution")
    p.add_argument("input")
    p.add_argument("--kernel", required=True, help="plain-text kernel file")
    p.add_argument("--sigma", type=float, default=0.0, help="observation noise std")
    p.add_argument("--library", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--diagnostics", default=None, help="per-iteration CSV path")
    _add_restore_flags(p, deblur=True)

    p = sub.add_parser("segment", help="classification-only label map export")
    p.add_argument("input")
    p.add_argument("--library", required=True)
    p.add_argument("--sigma", type=float, default=1.0, help="effective noise std")
    p.add_argument("-o", "--output", required=True, help="label map PGM")
    p.add_argument("--legend", default=None, help="legend text path (default: output + .txt)")
    _add_restore_flags(p, deblur=False)

    p = sub.add_parser("evaluate", help="PSNR/ISNR/BSNR report")
    p.add_argument("reference")
    p.add_argument("estimate")
    p.add_argument("--observed", default=None, help="degraded input, enables ISNR")
    p.add_argument("--noise-variance", type=float, default=None, help="enables BSNR")

    p = sub.add_parser("bench", help="run a harness config of experiments")
    p.add_argument("config")
    return parser


def _self_trained_library(image, library: ClassLibrary, sigma, k, seed) -> ClassLibrary:
    patches = extract_patches(image, library.patch_size)
    model = em_fit_noisy(patches, sigma, k, seed=seed)
    return library.replace_generic(model)


def _fmt(v) -> str:
    return "inf" if np.isinf(v) else f"{v:.2f}"


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "train":
        all_patches = []
        p = args.patch_size
        for path in args.images:
            all_patches.append(extract_patches(read_image(path), p).data)
        data = np.hstack(all_patches)
        if args.sigma is None:
            model = em_fit_clean(data, args.K, seed=args.seed,
                                 max_iters=args.max_iters, tol=args.tol)
        else:
            model = em_fit_noisy(data, args.sigma, args.K, seed=args.seed,
                                 max_iters=args.max_iters, tol=args.tol)
        save_model(args.output, model)
        print(f"wrote {args.output}: K={model.n_components} p={model.patch_size} d={model.dim}")
        return 0

    if args.command == "denoise":
        if args.sigma <= 0:
            raise ArgumentError("denoise requires sigma > 0")
        img = read_image(args.input)
        library = load_library(args.library)
        if args.self_train:
            library = _self_trained_library(img, library, args.sigma,
                                            args.self_train_k, args.seed)
        out, labels = multiclass_denoise(img, library, args.sigma,
                                         mode=args.mode, beta=args.beta)
        write_image(args.output, out)
        if args.labels:
            write_label_field(args.labels, args.labels + ".txt", labels, library.names)
        print(f"wrote {args.output}")
        return 0

    if args.command == "deblur":
        img = read_image(args.input)
        kernel = load_kernel(args.kernel)
        library = load_library(args.library)
        config = RestorationConfig(
            patch_size=library.patch_size, mu=args.mu, max_iters=args.max_iters,
            rel_tol=args.rel_tol, classify_mode=args.mode, beta=args.beta,
            switch_iteration=args.switch_iter if args.switch_iter > 0 else None,
            switch_k=args.switch_k, seed=args.seed)
        model = DegradationModel(kernel=kernel, sigma=args.sigma)
        restored, labels, diagnostics = restore(img, model, library, config)
        write_image(args.output, restored)
        if args.labels:
            write_label_field(args.labels, args.labels + ".txt", labels, library.names)
        if args.diagnostics:
            write_diagnostics_csv(args.diagnostics, diagnostics)
        print(f"wrote {args.output} after {diagnostics[-1]['k']} iterations")
        return 0

    if args.command == "segment":
        img = read_image(args.input)
        library = load_library(args.library)
        patches = extract_patches(img, library.patch_size)
        labels = classify_patches(patches, library, args.sigma,
                                  mode=args.mode, beta=args.beta)
        legend = args.legend or args.output + ".txt"
        write_label_field(args.output, legend, labels, library.names)
        print(f"wrote {args.output}")
        return 0

    if args.command == "evaluate":
        ref = read_image(args.reference)
        est = read_image(args.estimate)
        out_psnr = psnr(est, ref)
        print(f"PSNR {_fmt(out_psnr)}")
        if args.observed:
            obs = read_image(args.observed)
            print(f"Input PSNR {_fmt(psnr(obs, ref))}")
            print(f"ISNR {_fmt(isnr(obs, est, ref))}")
            if args.noise_variance is not None:
                print(f"BSNR {_fmt(bsnr(obs, args.noise_variance))}")
        return 0

    if args.command == "bench":
        for stem, exp_name, report in run_bench(args.config):
            line = (f"{stem} {exp_name}: input {_fmt(report.psnr_in)} dB, "
                    f"output {_fmt(report.psnr_out)} dB, ISNR {_fmt(report.isnr)} dB, "
                    f"BSNR {_fmt(report.bsnr)} dB")
            print(line)
        return 0

    raise ArgumentError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    try:
        return run(argv)
    except ArgumentError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DataError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except DivergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
