"""Original-space traversal plots: 2-D curves or 3-D scatter per fixed value."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import FigureError
from .io import float_column, read_table

REQUIRED = ("z0_value",)


def plot_traversal(csv_path, out_path, dpi: int = 120, title: str | None = None) -> dict:
    """One color per fixed property value; 2 original coordinates draw
    connected curves, 3 draw a scatter in a 3-D projection."""
    cols = read_table(csv_path, REQUIRED)
    coord_names = sorted((c for c in cols if c.startswith("x_orig_")),
                         key=lambda c: int(c.split("_")[-1]))
    if len(coord_names) not in (2, 3):
        raise FigureError(f"{csv_path}: expected 2 or 3 x_orig_* columns, "
                          f"found {coord_names}")
    z0 = float_column(cols, "z0_value", csv_path)
    coords = [float_column(cols, c, csv_path) for c in coord_names]

    levels = sorted(set(z0))
    cmap = plt.get_cmap("viridis")
    fig = plt.figure(figsize=(5, 4.4))
    if len(coord_names) == 2:
        ax = fig.add_subplot()
        for i, level in enumerate(levels):
            rows = [j for j, v in enumerate(z0) if v == level]
            ax.plot([coords[0][j] for j in rows], [coords[1][j] for j in rows],
                    marker=".", markersize=3, linewidth=1,
                    color=cmap(i / max(1, len(levels) - 1)))
        ax.set_xlabel("x0")
        ax.set_ylabel("x1")
        ax.set_aspect("equal", adjustable="datalim")
    else:
        ax = fig.add_subplot(projection="3d")
        for i, level in enumerate(levels):
            rows = [j for j, v in enumerate(z0) if v == level]
            ax.scatter([coords[0][j] for j in rows], [coords[1][j] for j in rows],
                       [coords[2][j] for j in rows], s=6,
                       color=cmap(i / max(1, len(levels) - 1)))
        ax.set_xlabel("x0")
        ax.set_ylabel("x1")
        ax.set_zlabel("x2")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)
    return {
        "n_levels": len(levels),
        "n_points": len(z0),
        "dims": len(coord_names),
        "out": str(out_path),
    }
