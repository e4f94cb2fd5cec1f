import json

import numpy as np
import pytest

from cyclevib.cli import main
from cyclevib.data import Dataset, LevelSetSpec, LiftMaps, generate, save_dataset
from cyclevib.model import CycleVibModel, ModelConfig, save_checkpoint


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def data_stem(tmp_path_factory):
    stem = tmp_path_factory.mktemp("data") / "ds"
    assert run("gen-data", "--shape", "ellipse", "--n", 400, "--seed", 1,
               "--out", stem) == 0
    return stem


class TestGenData:
    def test_files_and_row_count(self, tmp_path):
        stem = tmp_path / "ds"
        assert run("gen-data", "--shape", "ellipse", "--n", 200, "--seed", 3,
                   "--out", stem) == 0
        lines = (tmp_path / "ds.csv").read_text().strip().splitlines()
        assert len(lines) == 201
        assert (tmp_path / "ds.json").exists()

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run("gen-data", "--shape", "ellipse", "--n", 150, "--seed", 9, "--out", a)
        run("gen-data", "--shape", "ellipse", "--n", 150, "--seed", 9, "--out", b)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_ellipsoid_has_three_original_columns(self, tmp_path):
        stem = tmp_path / "e3"
        run("gen-data", "--shape", "ellipsoid", "--n", 100, "--seed", 2, "--out", stem)
        header = (tmp_path / "e3.csv").read_text().splitlines()[0].split(",")
        assert [c for c in header if c.startswith("xo")] == ["xo0", "xo1", "xo2"]

    def test_too_few_points_is_config_error(self, tmp_path):
        assert run("gen-data", "--shape", "ellipse", "--n", 5,
                   "--out", tmp_path / "bad") == 2


class TestTrain:
    def test_zero_epochs_writes_initialized_checkpoint(self, data_stem, tmp_path):
        out = tmp_path / "run0"
        assert run("train", "--data", data_stem, "--out", out, "--epochs", 0) == 0
        assert (out / "checkpoint.json").exists()
        assert (out / "checkpoint.bin").exists()
        curve = (out / "curve.csv").read_text().strip().splitlines()
        assert len(curve) == 1  # header only

    def test_baseline_curve_has_zero_cycle_columns(self, data_stem, tmp_path):
        out = tmp_path / "base"
        assert run("train", "--data", data_stem, "--out", out, "--epochs", 2,
                   "--batch-size", 64, "--log-every", 1, "--baseline", "beta-vae") == 0
        rows = (out / "curve.csv").read_text().strip().splitlines()[1:]
        assert rows, "expected logged steps"
        for row in rows:
            vals = row.split(",")
            assert float(vals[4]) == 0.0 and float(vals[5]) == 0.0 and float(vals[6]) == 0.0
        manifest = json.loads((out / "checkpoint.json").read_text())
        assert manifest["config"]["noise_mode"] == "learned_per_dim"

    def test_resolved_config_echoed(self, data_stem, tmp_path):
        out = tmp_path / "echo"
        run("train", "--data", data_stem, "--out", out, "--epochs", 0, "--lam", 7.5)
        text = (out / "resolved-train.ini").read_text()
        assert "lam = 7.5" in text

    def test_dim_mismatch_is_config_error(self, data_stem, tmp_path):
        assert run("train", "--data", data_stem, "--out", tmp_path / "bad",
                   "--epochs", 1, "--batch-size", 4096) == 2

    def test_reproducible_from_echoed_config(self, data_stem, tmp_path):
        first = tmp_path / "first"
        run("train", "--data", data_stem, "--out", first, "--epochs", 2,
            "--batch-size", 64, "--lam", 3.0, "--seed", 5)
        again = tmp_path / "again"
        assert run("train", "--config", first / "resolved-train.ini",
                   "--data", data_stem, "--out", again) == 0
        a = json.loads((first / "checkpoint.json").read_text())
        b = json.loads((again / "checkpoint.json").read_text())
        assert a["sha256"] == b["sha256"]

    def test_resume_continues_from_checkpoint(self, data_stem, tmp_path):
        first = tmp_path / "first"
        assert run("train", "--data", data_stem, "--out", first, "--epochs", 1,
                   "--batch-size", 64) == 0
        cont = tmp_path / "cont"
        assert run("train", "--data", data_stem, "--out", cont, "--epochs", 1,
                   "--batch-size", 64, "--resume", first / "checkpoint") == 0
        a = json.loads((first / "checkpoint.json").read_text())
        b = json.loads((cont / "checkpoint.json").read_text())
        assert a["sha256"] != b["sha256"]  # training moved the parameters


def perfect_pair(tmp_path):
    """A dataset with Y = X[:, :3] and a hand-built linear model solving it."""
    base = generate(LevelSetSpec(dim=2, n_points=60, seed=4))
    ds = Dataset(X=base.X, Y=base.X[:, :3], X_original=base.X_original,
                 Y_original=base.Y_original, lift=base.lift, spec=base.spec,
                 train_idx=base.train_idx, test_idx=base.test_idx)
    stem = tmp_path / "perfect-ds"
    save_dataset(ds, stem)

    cfg = ModelConfig(d_in=5, d_y=3, d_z0=3, d_z1=2, encoder_widths=(),
                      decx_widths=(), decy_widths=(), encoder_output_gain=1.0)
    model = CycleVibModel.create(cfg)
    model.encoder[0].weights.data = np.eye(5)
    model.encoder[0].bias.data = np.zeros(5)
    model.dec_y[0].weights.data = np.hstack([np.eye(3)])
    model.dec_y[0].bias.data = np.zeros(3)
    w = np.zeros((5, 5))  # input order is (z1, y): route y to cols 0-2, z1 to 3-4
    w[0, 2] = w[1, 3] = w[2, 4] = 1.0
    w[3, 0] = w[4, 1] = 1.0
    model.dec_x[0].weights.data = w
    model.dec_x[0].bias.data = np.zeros(5)
    ckpt = tmp_path / "perfect-ckpt"
    save_checkpoint(model, ckpt)
    return stem, ckpt


class TestEval:
    def test_perfect_checkpoint_scores_zero(self, tmp_path):
        stem, ckpt = perfect_pair(tmp_path)
        out = tmp_path / "eval"
        assert run("eval", "--data", stem, "--checkpoint", ckpt, "--out", out,
                   "--n-samples", 20, "--n-references", 5) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["mae_x"] == pytest.approx(0.0, abs=1e-12)
        assert report["mae_y"] == pytest.approx(0.0, abs=1e-12)
        assert report["invariance_mae"] == pytest.approx(0.0, abs=1e-12)

    def test_failing_assertion_exits_one(self, tmp_path):
        stem, ckpt = perfect_pair(tmp_path)
        out = tmp_path / "eval1"
        assert run("eval", "--data", stem, "--checkpoint", ckpt, "--out", out,
                   "--assert", "mae_x>0.5", "--n-samples", 5, "--n-references", 2) == 1

    def test_passing_assertions_exit_zero(self, tmp_path):
        stem, ckpt = perfect_pair(tmp_path)
        out = tmp_path / "eval2"
        assert run("eval", "--data", stem, "--checkpoint", ckpt, "--out", out,
                   "--assert", "invariance<=0.02", "--assert", "mae_y<=0.3",
                   "--n-samples", 5, "--n-references", 2) == 0

    def test_missing_checkpoint_is_io_error(self, tmp_path):
        stem, _ = perfect_pair(tmp_path)
        assert run("eval", "--data", stem, "--checkpoint", tmp_path / "nope",
                   "--out", tmp_path / "eval3") == 3

    def test_report_schema(self, tmp_path):
        stem, ckpt = perfect_pair(tmp_path)
        out = tmp_path / "eval4"
        run("eval", "--data", stem, "--checkpoint", ckpt, "--out", out,
            "--n-samples", 5, "--n-references", 2)
        report = json.loads((out / "report.json").read_text())
        assert set(report) == {"mae_x", "mae_y", "invariance_mae", "sigma_signal",
                               "sigma_noise", "selected_dims", "n_references",
                               "n_samples_per_reference", "d_z0"}
        assert len(report["sigma_signal"]) == 5
        sparsity = (out / "sparsity.csv").read_text().splitlines()
        assert sparsity[0] == "dim,sigma_signal,sigma_noise,selected,subspace"
        assert len(sparsity) == 6


class TestTraverse:
    def test_grid_rows_and_determinism(self, tmp_path):
        stem, ckpt = perfect_pair(tmp_path)
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run("traverse", "--data", stem, "--checkpoint", ckpt, "--out", out_a,
                   "--z0-values", "0.0,0.5", "--z1-dims", "0", "--steps", 4) == 0
        run("traverse", "--data", stem, "--checkpoint", ckpt, "--out", out_b,
            "--z0-values", "0.0,0.5", "--z1-dims", "0", "--steps", 4)
        assert out_a.read_bytes() == out_b.read_bytes()
        assert len(out_a.read_text().strip().splitlines()) == 1 + 2 * 4

    def test_bad_dim_is_config_error(self, tmp_path):
        stem, ckpt = perfect_pair(tmp_path)
        assert run("traverse", "--data", stem, "--checkpoint", ckpt,
                   "--out", tmp_path / "t.csv", "--z1-dims", "11") == 2


class TestSweep:
    def test_tiny_sweep_writes_reports(self, data_stem, tmp_path):
        out = tmp_path / "sweep"
        assert run("sweep", "--data", data_stem, "--out", out, "--lams", "10",
                   "--betas", "0.5", "--epochs", 1, "--batch-size", 64,
                   "--workers", 1) == 0
        rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(rows) == 2
        rec = json.loads((out / "recommended.json").read_text())
        assert rec["lam"] == 10.0 and rec["beta"] == 0.5
