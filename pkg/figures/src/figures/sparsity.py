"""Grouped signal-vs-noise bars per latent dimension."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import float_column, read_table

REQUIRED = ("dim", "sigma_signal", "sigma_noise", "selected")


def plot_sparsity(csv_path, out_path, dpi: int = 120, title: str | None = None,
                  d_z0: int | None = None) -> dict:
    """Render noise bars (grey, behind) and signal bars (orange, front) per
    dimension, marking selected dimensions and the subspace partition.

    The partition boundary comes from the optional `subspace` column (values
    z0/z1) or the `d_z0` argument. Returns a summary of what was drawn.
    """
    cols = read_table(csv_path, REQUIRED)
    dims = [int(v) for v in float_column(cols, "dim", csv_path)]
    signal = float_column(cols, "sigma_signal", csv_path)
    noise = float_column(cols, "sigma_noise", csv_path)
    selected = [bool(int(v)) for v in float_column(cols, "selected", csv_path)]

    partition = None
    if "subspace" in cols:
        labels = [v.strip().lower() for v in cols["subspace"]]
        partition = sum(1 for v in labels if v == "z0")
    if d_z0 is not None:
        partition = d_z0

    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.bar(dims, noise, width=0.8, color="0.75", label="sampling noise")
    ax.bar(dims, signal, width=0.45, color="tab:orange", label="signal")
    top = max(*signal, *noise)
    for d, sig, sel in zip(dims, signal, selected):
        if sel:
            ax.annotate("*", (d, sig), ha="center", va="bottom", fontsize=14)
    if partition and 0 < partition < len(dims):
        boundary = (dims[partition - 1] + dims[partition]) / 2.0
        ax.axvline(boundary, color="k", linestyle="--", linewidth=1)
        ax.text(boundary - 0.1, top * 1.08, "property", ha="right", fontsize=8)
        ax.text(boundary + 0.1, top * 1.08, "invariant", ha="left", fontsize=8)
    ax.set_xlabel("latent dimension")
    ax.set_ylabel("std")
    ax.set_xticks(dims)
    ax.set_ylim(0, top * 1.2)
    ax.legend(loc="upper right", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)
    return {
        "n_dims": len(dims),
        "n_selected": sum(selected),
        "partition": partition,
        "out": str(out_path),
    }
