"""End-to-end tests of the command-line interface (in-process via cli.main)."""

import numpy as np
import pytest

import pnpgmm as pg
from pnpgmm.cli import main
from pnpgmm.modelio import save_manifest


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A directory with training images, a library manifest, and a degraded input."""
    root = tmp_path_factory.mktemp("cli")
    rng = np.random.default_rng(0)

    blobs = pg.blob_texture((48, 48), rng)
    text = pg.text_texture((48, 48), rng)
    pg.write_pgm(root / "blobs.pgm", blobs)
    pg.write_pgm(root / "text.pgm", text)

    # train two small class models directly through the CLI
    for name in ("blobs", "text"):
        rc = main(["train", str(root / f"{name}.pgm"), "-o", str(root / f"{name}.gmm"),
                   "-K", "3", "-p", "4", "--max-iters", "15", "--seed", "0"])
        assert rc == 0
    save_manifest(root / "lib.txt",
                  [("blobs", "blobs.gmm"), ("text", "text.gmm")],
                  generic_name="blobs")

    clean = pg.read_pgm(root / "blobs.pgm").astype(float)
    noisy = clean + pg.gaussian_noise(clean.shape, 15.0, 7)
    pg.write_pgm(root / "noisy.pgm", noisy)

    kernel = pg.registry_kernel("exp4")
    pg.save_kernel(root / "kernel.txt", kernel)
    blurred = pg.convolve_periodic(clean, kernel) + pg.gaussian_noise(clean.shape, 2.0, 8)
    pg.write_pgm(root / "blurred.pgm", blurred)
    return root


class TestTrain:
    def test_model_dimensions(self, workdir, tmp_path):
        out = tmp_path / "m.gmm"
        rc = main(["train", str(workdir / "blobs.pgm"), "-o", str(out),
                   "-K", "2", "-p", "6", "--max-iters", "5"])
        assert rc == 0
        model = pg.load_model(out)
        assert model.patch_size == 6
        assert model.means.shape == (2, 36)

    def test_noisy_variant(self, workdir, tmp_path):
        out = tmp_path / "m.gmm"
        rc = main(["train", str(workdir / "noisy.pgm"), "-o", str(out),
                   "-K", "2", "-p", "4", "--sigma", "15", "--max-iters", "5"])
        assert rc == 0
        pg.load_model(out).validate()

    def test_missing_image_exit_3(self, workdir, tmp_path):
        rc = main(["train", str(workdir / "nope.pgm"),
                   "-o", str(tmp_path / "m.gmm")])
        assert rc == 3


class TestDenoise:
    def test_improves_psnr(self, workdir, tmp_path):
        out = tmp_path / "den.pgm"
        rc = main(["denoise", str(workdir / "noisy.pgm"),
                   "--library", str(workdir / "lib.txt"), "--sigma", "15",
                   "-o", str(out), "--mode", "ml"])
        assert rc == 0
        clean = pg.read_pgm(workdir / "blobs.pgm").astype(float)
        noisy = pg.read_pgm(workdir / "noisy.pgm").astype(float)
        den = pg.read_pgm(out).astype(float)
        assert pg.psnr(den, clean) > pg.psnr(noisy, clean)

    def test_deterministic(self, workdir, tmp_path):
        args = ["denoise", str(workdir / "noisy.pgm"),
                "--library", str(workdir / "lib.txt"), "--sigma", "15",
                "--mode", "alpha", "--beta", "1.0"]
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        assert main(args + ["-o", str(a)]) == 0
        assert main(args + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_label_output(self, workdir, tmp_path):
        lab = tmp_path / "lab.pgm"
        rc = main(["denoise", str(workdir / "noisy.pgm"),
                   "--library", str(workdir / "lib.txt"), "--sigma", "15",
                   "-o", str(tmp_path / "d.pgm"), "--labels", str(lab)])
        assert rc == 0
        assert lab.exists() and (tmp_path / "lab.pgm.txt").exists()

    def test_sigma_zero_exit_2(self, workdir, tmp_path):
        rc = main(["denoise", str(workdir / "noisy.pgm"),
                   "--library", str(workdir / "lib.txt"), "--sigma", "0",
                   "-o", str(tmp_path / "d.pgm")])
        assert rc == 2


class TestDeblur:
    def test_end_to_end_with_diagnostics(self, workdir, tmp_path):
        out = tmp_path / "deb.pgm"
        diag = tmp_path / "diag.csv"
        rc = main(["deblur", str(workdir / "blurred.pgm"),
                   "--kernel", str(workdir / "kernel.txt"),
                   "--library", str(workdir / "lib.txt"), "--sigma", "2",
                   "-o", str(out), "--diagnostics", str(diag),
                   "--mu", "0.1", "--max-iters", "4", "--rel-tol", "0",
                   "--switch-iter", "0", "--mode", "none"])
        assert rc == 0
        header = diag.read_text().splitlines()[0]
        assert header == "k,primal_residual,rel_change,sigma_eff,labels_changed,wall_ms"
        assert len(diag.read_text().splitlines()) == 5
        clean = pg.read_pgm(workdir / "blobs.pgm").astype(float)
        blurred = pg.read_pgm(workdir / "blurred.pgm").astype(float)
        deb = pg.read_pgm(out).astype(float)
        assert pg.psnr(deb, clean) > pg.psnr(blurred, clean)

    def test_deterministic(self, workdir, tmp_path):
        args = ["deblur", str(workdir / "blurred.pgm"),
                "--kernel", str(workdir / "kernel.txt"),
                "--library", str(workdir / "lib.txt"),
                "--mu", "0.1", "--max-iters", "3", "--rel-tol", "0",
                "--switch-iter", "2", "--switch-k", "2", "--seed", "1"]
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        assert main(args + ["-o", str(a)]) == 0
        assert main(args + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_kernel_exit_3(self, workdir, tmp_path):
        rc = main(["deblur", str(workdir / "blurred.pgm"),
                   "--kernel", str(workdir / "nokernel.txt"),
                   "--library", str(workdir / "lib.txt"),
                   "-o", str(tmp_path / "x.pgm")])
        assert rc == 3


class TestSegment:
    def test_writes_labels_and_legend(self, workdir, tmp_path):
        out = tmp_path / "seg.pgm"
        rc = main(["segment", str(workdir / "blobs.pgm"),
                   "--library", str(workdir / "lib.txt"), "--sigma", "5",
                   "-o", str(out), "--mode", "alpha", "--beta", "2.0"])
        assert rc == 0
        img = pg.read_pgm(out)
        assert set(np.unique(img)) <= {0, 255}
        legend = (tmp_path / "seg.pgm.txt").read_text().splitlines()
        assert legend[0].split()[2] == "blobs"
        assert legend[1].split()[2] == "text"


class TestEvaluate:
    def test_report_lines(self, workdir, capsys):
        rc = main(["evaluate", str(workdir / "blobs.pgm"), str(workdir / "noisy.pgm"),
                   "--observed", str(workdir / "noisy.pgm"),
                   "--noise-variance", "225"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.startswith("PSNR ")
        assert "ISNR 0.00" in out
        assert "BSNR" in out

    def test_self_psnr_inf(self, workdir, capsys):
        rc = main(["evaluate", str(workdir / "blobs.pgm"), str(workdir / "blobs.pgm")])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "PSNR inf"


class TestBench:
    def test_harness_run(self, workdir, tmp_path, capsys):
        cfg = tmp_path / "bench.cfg"
        cfg.write_text(
            f"reference = {workdir / 'blobs.pgm'}\n"
            f"library = {workdir / 'lib.txt'}\n"
            "experiments = exp4\n"
            "output = out\n"
            "mu = 0.1\nmax_iters = 3\nrel_tol = 0\nmode = none\n"
            "switch_iter = none\n")
        rc = main(["bench", str(cfg)])
        assert rc == 0
        line = capsys.readouterr().out.strip()
        assert line.startswith("blobs exp4:")
        rundir = tmp_path / "out" / "blobs_exp4"
        for name in ("restored.pgm", "labels.pgm", "diag.csv", "report.txt"):
            assert (rundir / name).exists()

    def test_missing_key_exit_3(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("reference = x.pgm\n")
        assert main(["bench", str(cfg)]) == 3


class TestArgumentErrors:
    def test_unknown_experiment_name_in_bench(self, workdir, tmp_path):
        cfg = tmp_path / "bench.cfg"
        cfg.write_text(
            f"reference = {workdir / 'blobs.pgm'}\n"
            f"library = {workdir / 'lib.txt'}\n"
            "experiments = exp99\noutput = out\n")
        assert main(["bench", str(cfg)]) == 2

    def test_bad_mode_rejected_by_argparse(self, workdir, tmp_path):
        with pytest.raises(SystemExit) as e:
            main(["segment", str(workdir / "blobs.pgm"),
                  "--library", str(workdir / "lib.txt"),
                  "-o", str(tmp_path / "s.pgm"), "--mode", "weird"])
        assert e.value.code == 2
