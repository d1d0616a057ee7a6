"""Render the nine standard figures from the CSV files the CLI emits.

Pure file-to-file: each figure reads its CSVs from a data directory and
writes one image. Input schemas are validated up front (filename plus a
column diagnostic on mismatch), and the bound-gap figure additionally
asserts that the lower series never exceeds the upper one before anything
is drawn. Rendering uses explicit Figure objects, so repeated runs on the
same data produce images of identical dimensions with identical series.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

FIGURE_INPUTS = {
    1: ["fig1.csv"],
    2: ["fig2.csv"],
    3: ["fig3.csv"],
    4: ["fig4_u0.4.csv", "fig4_u0.7.csv"],
    5: ["fig5_u0.4.csv", "fig5_u0.7.csv"],
    6: ["fig6_a.csv", "fig6_b.csv"],
    7: ["fig7.csv"],
    8: ["fig8.csv"],
    9: ["fig9.csv"],
}

FIGURE_COLUMNS = {
    1: ("u", "ratio", "value"),
    2: ("ratio", "u", "value"),
    3: ("ratio", "u", "value"),
    4: ("x", "psi", "psi_dagger"),
    5: ("x", "phi", "phi_dagger"),
    6: ("ratio", "lower", "upper"),
    7: ("B", "u", "ir"),
    8: ("ratio", "u", "value"),
    9: ("D", "c", "value", "u_star", "B_star", "unused"),
}


class RenderError(Exception):
    """Raised when an input file is missing, empty, or has the wrong columns."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: figure id, its input CSVs, the output image, styling."""

    figure: int
    inputs: tuple[Path, ...]
    output: Path
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.figure not in FIGURE_INPUTS:
            raise RenderError(f"figure id must be in 1..9, got {self.figure}")


def spec_for(figure: int, data_dir: str | Path, out_dir: str | Path, **style) -> FigureSpec:
    """Standard spec: inputs named as the CLI writes them, one image per figure."""
    if figure not in FIGURE_INPUTS:
        raise RenderError(f"figure id must be in 1..9, got {figure}")
    data_dir, out_dir = Path(data_dir), Path(out_dir)
    fmt = style.get("format", "png")
    inputs = tuple(data_dir / name for name in FIGURE_INPUTS[figure])
    return FigureSpec(figure, inputs, out_dir / f"fig{figure}.{fmt}", dict(style))


def load_columns(path: Path, expected: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read a CSV into float columns, enforcing the documented schema."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise RenderError(f"{path}: file is empty, expected columns {list(expected)}")
            if tuple(header) != expected:
                raise RenderError(
                    f"{path}: expected columns {list(expected)}, found {header}"
                )
            rows = [[float(v) for v in row] for row in reader if row]
    except OSError as exc:
        raise RenderError(f"{path}: cannot read ({exc})") from exc
    except ValueError as exc:
        raise RenderError(f"{path}: non-numeric data ({exc})") from exc
    if not rows:
        raise RenderError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(expected)}


def _pivot(outer: np.ndarray, inner: np.ndarray, values: np.ndarray):
    """Rebuild the rectangular grid behind outer-major (outer, inner, value) rows."""
    xs, ys = np.unique(outer), np.unique(inner)
    if xs.size * ys.size != values.size:
        raise RenderError("grid data is not rectangular")
    return xs, ys, values.reshape(xs.size, ys.size)


def _series_by_key(key: np.ndarray, *cols: np.ndarray):
    for k in np.unique(key):
        mask = key == k
        yield float(k), [c[mask] for c in cols]


def _new_figure(spec: FigureSpec, nrows=1, ncols=1, width=6.4, height=4.8):
    fig = Figure(figsize=(width * ncols, height * nrows), dpi=spec.style.get("dpi", 125))
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, ncols, squeeze=False)
    return fig, axes


def _heatmap(ax, fig, xs, ys, grid, labels, cmap, vmax=None):
    mesh = ax.pcolormesh(xs, ys, grid.T, cmap=cmap, shading="nearest", vmax=vmax)
    fig.colorbar(mesh, ax=ax, label=labels[2])
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written image path."""
    cols = FIGURE_COLUMNS[spec.figure]
    tables = [load_columns(path, cols) for path in spec.inputs]
    cmap = spec.style.get("cmap", "viridis")

    if spec.figure in (1, 2):
        data = tables[0]
        family, axis = ("u", "ratio") if spec.figure == 1 else ("ratio", "u")
        fig, axes = _new_figure(spec)
        ax = axes[0][0]
        for k, (xs, vals) in _series_by_key(data[family], data[axis], data["value"]):
            ax.plot(xs, vals, label=f"{family} = {k:g}")
        ax.set_xlabel("B/R" if axis == "ratio" else "detection probability u")
        ax.set_ylabel("game value")
        ax.legend()
    elif spec.figure == 3:
        data = tables[0]
        xs, ys, grid = _pivot(data["ratio"], data["u"], data["value"])
        fig, axes = _new_figure(spec)
        _heatmap(axes[0][0], fig, xs, ys, grid, ("B/R", "u", "game value"), cmap)
    elif spec.figure in (4, 5):
        base = "psi" if spec.figure == 4 else "phi"
        fig, axes = _new_figure(spec, ncols=len(tables))
        for ax, path, data in zip(axes[0], spec.inputs, tables):
            ax.plot(data["x"], data[base], label=base)
            ax.plot(data["x"], data[f"{base}_dagger"], "--", label=f"{base} envelope")
            ax.set_xlabel("x")
            ax.set_title(path.stem.split("_", 1)[-1])
            ax.legend()
    elif spec.figure == 6:
        for path, data in zip(spec.inputs, tables):
            gap = data["lower"] - data["upper"]
            if np.any(gap > 1e-12):
                worst = float(np.max(gap))
                raise RenderError(
                    f"{path}: lower bound exceeds upper bound (worst gap {worst:.3g})"
                )
        fig, axes = _new_figure(spec, ncols=len(tables))
        for ax, path, data in zip(axes[0], spec.inputs, tables):
            ax.plot(data["ratio"], data["upper"], label="upper bound")
            ax.plot(data["ratio"], data["lower"], "--", label="lower bound")
            ax.set_xlabel("B/R")
            ax.set_ylabel("game value bounds")
            ax.set_title(path.stem)
            ax.legend()
    elif spec.figure == 7:
        data = tables[0]
        xs, ys, grid = _pivot(data["B"], data["u"], data["ir"])
        fig, axes = _new_figure(spec)
        vmax = spec.style.get("ir_vmax", 20.0)
        _heatmap(axes[0][0], fig, xs, ys, grid, ("B", "u", "influence ratio"), cmap, vmax=vmax)
    elif spec.figure == 8:
        data = tables[0]
        xs, ys, grid = _pivot(data["ratio"], data["u"], data["value"])
        fig, axes = _new_figure(spec)
        ax = axes[0][0]
        levels = spec.style.get("levels", np.linspace(0.1, 0.9, 9))
        cs = ax.contour(xs, ys, grid.T, levels=levels, cmap=cmap)
        ax.clabel(cs, inline=True, fontsize=7)
        # Steepest-ascent arrows from the sampled value surface.
        gx = np.gradient(grid, xs, axis=0)
        gy = np.gradient(grid, ys, axis=1)
        norm = np.hypot(gx, gy)
        norm[norm == 0.0] = 1.0
        step = max(1, xs.size // 12)
        sl = (slice(step // 2, None, step), slice(step // 2, None, step))
        ax.quiver(
            xs[sl[0]], ys[sl[1]], (gx / norm)[sl].T, (gy / norm)[sl].T,
            angles="xy", color="gray", width=2.5e-3,
        )
        ax.set_xlabel("B/R")
        ax.set_ylabel("u")
    elif spec.figure == 9:
        data = tables[0]
        fig, axes = _new_figure(spec, nrows=2, ncols=2, width=4.8, height=3.4)
        panels = [("value", "game value"), ("u_star", "information bought"),
                  ("B_star", "resources bought"), ("unused", "unused budget")]
        for ax, (col, label) in zip(axes.ravel(), panels):
            for c, (ds, vals) in _series_by_key(data["c"], data["D"], data[col]):
                ax.plot(ds, vals, label=f"c = {c:g}")
            ax.set_xlabel("budget D")
            ax.set_ylabel(label)
        axes[0][0].legend(fontsize=8)
    else:  # pragma: no cover - guarded by FigureSpec validation
        raise RenderError(f"figure id must be in 1..9, got {spec.figure}")

    fig.tight_layout()
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output)
    return spec.output


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lotto-figures",
        description="Render the standard lotto-scouts figures from figure-data CSVs.",
    )
    parser.add_argument("--figure", required=True, help="figure id 1..9, or 'all'")
    parser.add_argument("--data-dir", required=True, help="directory with the CLI's CSV files")
    parser.add_argument("--out", required=True, help="directory for the rendered images")
    parser.add_argument("--format", default="png", choices=("png", "svg"))
    parser.add_argument("--cmap", default="viridis")
    parser.add_argument("--dpi", type=int, default=125)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    ids = range(1, 10) if args.figure == "all" else [args.figure]
    try:
        ids = [int(i) for i in ids]
    except ValueError:
        print(f"error: --figure must be 1..9 or 'all', got {args.figure!r}", file=sys.stderr)
        return 2
    style = {"format": args.format, "cmap": args.cmap, "dpi": args.dpi}
    try:
        for fid in ids:
            path = render(spec_for(fid, args.data_dir, args.out, **style))
            print(path)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
