import hashlib
from pathlib import Path

import pytest

from figures import FigureError, plot_sparsity, plot_traversal
from figures.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class TestSparsity:
    def test_eight_bar_groups_two_marked(self, tmp_path):
        out = tmp_path / "sparsity.png"
        summary = plot_sparsity(FIXTURES / "sparsity_8dim.csv", out)
        assert out.exists()
        assert summary["n_dims"] == 8
        assert summary["n_selected"] == 2
        assert summary["partition"] == 3

    def test_empty_body_errors_and_writes_nothing(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("dim,sigma_signal,sigma_noise,selected\n")
        out = tmp_path / "never.png"
        with pytest.raises(FigureError, match="no data rows"):
            plot_sparsity(empty, out)
        assert not out.exists()

    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("dim,sigma_signal\n0,1.0\n")
        with pytest.raises(FigureError, match="sigma_noise"):
            plot_sparsity(bad, tmp_path / "x.png")

    def test_malformed_cell_names_line(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("dim,sigma_signal,sigma_noise,selected\n"
                       "0,1.0,1.0,1\n1,oops,1.0,0\n")
        with pytest.raises(FigureError, match="line 3"):
            plot_sparsity(bad, tmp_path / "x.png")

    def test_rerender_checksum_stable(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        plot_sparsity(FIXTURES / "sparsity_8dim.csv", a, dpi=100)
        plot_sparsity(FIXTURES / "sparsity_8dim.csv", b, dpi=100)
        assert sha256(a) == sha256(b)

    def test_partition_override_without_subspace_column(self, tmp_path):
        bare = tmp_path / "bare.csv"
        lines = (FIXTURES / "sparsity_8dim.csv").read_text().strip().splitlines()
        bare.write_text("\n".join(",".join(l.split(",")[:4]) for l in lines) + "\n")
        summary = plot_sparsity(bare, tmp_path / "x.png", d_z0=3)
        assert summary["partition"] == 3


class TestTraversal:
    def test_two_dim_curve(self, tmp_path):
        out = tmp_path / "trav2.png"
        summary = plot_traversal(FIXTURES / "traversal_2d.csv", out)
        assert out.exists()
        assert summary["dims"] == 2
        assert summary["n_levels"] == 2
        assert summary["n_points"] == 20

    def test_three_dim_scatter_autodetected(self, tmp_path):
        out = tmp_path / "trav3.png"
        summary = plot_traversal(FIXTURES / "traversal_3d.csv", out)
        assert summary["dims"] == 3
        assert summary["n_points"] == 60

    def test_wrong_coordinate_count_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("z0_value,x_orig_0\n0.5,1.0\n")
        with pytest.raises(FigureError, match="x_orig"):
            plot_traversal(bad, tmp_path / "x.png")

    def test_rerender_checksum_stable(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        plot_traversal(FIXTURES / "traversal_3d.csv", a, dpi=90)
        plot_traversal(FIXTURES / "traversal_3d.csv", b, dpi=90)
        assert sha256(a) == sha256(b)

    def test_unknown_columns_ignored(self, tmp_path):
        src = (FIXTURES / "traversal_2d.csv").read_text().strip().splitlines()
        extended = tmp_path / "ext.csv"
        extended.write_text("\n".join(line + (",extra" if i == 0 else ",0.0")
                                      for i, line in enumerate(src)) + "\n")
        summary = plot_traversal(extended, tmp_path / "x.png")
        assert summary["dims"] == 2


class TestCli:
    def test_sparsity_subcommand(self, tmp_path):
        out = tmp_path / "s.png"
        assert main(["sparsity", str(FIXTURES / "sparsity_8dim.csv"), "-o", str(out)]) == 0
        assert out.exists()

    def test_traversal_subcommand(self, tmp_path):
        out = tmp_path / "t.png"
        assert main(["traversal", str(FIXTURES / "traversal_2d.csv"), "-o", str(out),
                     "--dpi", "80"]) == 0
        assert out.exists()

    def test_bad_input_exits_two(self, tmp_path):
        assert main(["sparsity", str(tmp_path / "missing.csv"),
                     "-o", str(tmp_path / "x.png")]) == 2
