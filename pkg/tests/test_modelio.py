import numpy as np
import pytest

import pnpgmm as pg
from pnpgmm.errors import ArgumentError, DataError
from pnpgmm.modelio import save_manifest

from conftest import random_gmm


class TestModelFile:
    def test_roundtrip_bit_exact(self, tmp_path):
        m = random_gmm(3, 4, np.random.default_rng(0), patch_size=2)
        path = tmp_path / "m.gmm"
        pg.save_model(path, m)
        loaded = pg.load_model(path)
        assert loaded.patch_size == 2
        np.testing.assert_array_equal(loaded.weights, m.weights)
        np.testing.assert_array_equal(loaded.means, m.means)
        np.testing.assert_array_equal(loaded.covariances, m.covariances)

    def test_crc_detects_corruption(self, tmp_path):
        m = random_gmm(2, 4, np.random.default_rng(1), patch_size=2)
        path = tmp_path / "m.gmm"
        pg.save_model(path, m)
        raw = bytearray(path.read_bytes())
        raw[40] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(DataError):
            pg.load_model(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.gmm"
        path.write_bytes(b"NOTAMODEL\n" + b"\x00" * 32)
        with pytest.raises(DataError):
            pg.load_model(path)

    def test_text_export(self, tmp_path):
        m = random_gmm(2, 4, np.random.default_rng(2), patch_size=2)
        path = tmp_path / "m.txt"
        pg.export_model_text(path, m)
        text = path.read_text()
        assert "GMMPRIOR v1 text K=2 p=2 d=4" in text
        assert "weights:" in text


class TestClassLibrary:
    def make_lib(self, seed=3):
        rng = np.random.default_rng(seed)
        a = random_gmm(2, 4, rng, patch_size=2)
        b = random_gmm(2, 4, rng, patch_size=2)
        return pg.ClassLibrary(classes=[("generic", a), ("text", b)],
                               generic_index=0)

    def test_properties(self):
        lib = self.make_lib()
        assert lib.n_classes == 2
        assert lib.patch_size == 2
        assert lib.names == ["generic", "text"]

    def test_duplicate_names_rejected(self):
        rng = np.random.default_rng(4)
        a = random_gmm(1, 4, rng, patch_size=2)
        with pytest.raises(ArgumentError):
            pg.ClassLibrary(classes=[("x", a), ("x", a)], generic_index=0)

    def test_mixed_patch_sizes_rejected(self):
        rng = np.random.default_rng(5)
        a = random_gmm(1, 4, rng, patch_size=2)
        b = random_gmm(1, 9, rng, patch_size=3)
        with pytest.raises(ArgumentError):
            pg.ClassLibrary(classes=[("a", a), ("b", b)], generic_index=0)

    def test_empty_rejected(self):
        with pytest.raises(ArgumentError):
            pg.ClassLibrary(classes=[], generic_index=0)

    def test_replace_generic(self):
        lib = self.make_lib()
        new = random_gmm(3, 4, np.random.default_rng(6), patch_size=2)
        out = lib.replace_generic(new)
        assert out.models[0] is new
        assert out.models[1] is lib.models[1]
        assert lib.models[0] is not new  # original untouched


class TestManifest:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(7)
        a = random_gmm(2, 4, rng, patch_size=2)
        b = random_gmm(2, 4, rng, patch_size=2)
        pg.save_model(tmp_path / "a.gmm", a)
        pg.save_model(tmp_path / "b.gmm", b)
        manifest = tmp_path / "lib.txt"
        save_manifest(manifest, [("natural", "a.gmm"), ("text", "b.gmm")],
                      generic_name="natural")
        lib = pg.load_library(manifest)
        assert lib.names == ["natural", "text"]
        assert lib.generic_index == 0
        np.testing.assert_array_equal(lib.models[1].means, b.means)

    def test_generic_marker_position(self, tmp_path):
        rng = np.random.default_rng(8)
        a = random_gmm(1, 4, rng, patch_size=2)
        pg.save_model(tmp_path / "a.gmm", a)
        pg.save_model(tmp_path / "b.gmm", a)
        manifest = tmp_path / "lib.txt"
        manifest.write_text("first = a.gmm\nsecond = b.gmm [generic]\n")
        lib = pg.load_library(manifest)
        assert lib.generic_index == 1

    def test_comments_and_blanks(self, tmp_path):
        rng = np.random.default_rng(9)
        a = random_gmm(1, 4, rng, patch_size=2)
        pg.save_model(tmp_path / "a.gmm", a)
        manifest = tmp_path / "lib.txt"
        manifest.write_text("# comment\n\nonly = a.gmm\n")
        assert pg.load_library(manifest).names == ["only"]

    def test_mixed_patch_sizes_clear_error(self, tmp_path):
        rng = np.random.default_rng(10)
        a = random_gmm(1, 4, rng, patch_size=2)
        b = random_gmm(1, 9, rng, patch_size=3)
        pg.save_model(tmp_path / "a.gmm", a)
        pg.save_model(tmp_path / "b.gmm", b)
        manifest = tmp_path / "lib.txt"
        manifest.write_text("a = a.gmm\nb = b.gmm\n")
        with pytest.raises(ArgumentError, match="patch size"):
            pg.load_library(manifest)

    def test_malformed_line(self, tmp_path):
        manifest = tmp_path / "lib.txt"
        manifest.write_text("no separator here\n")
        with pytest.raises(DataError):
            pg.load_library(manifest)
