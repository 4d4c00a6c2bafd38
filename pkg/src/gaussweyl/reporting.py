"""CSV and manifest writers, plus the figures drawn next to CSV output."""

from __future__ import annotations

import csv
import io
import json
import platform
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

FIG_STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def figsize(scale: float = 1.0, ratio: float | None = None) -> tuple[float, float]:
    width = 6.0 * scale
    if ratio is None:
        ratio = (np.sqrt(5.0) - 1.0) / 2.0
    return width, width * ratio


def versions() -> dict:
    out = {"python": platform.python_version()}
    for name in ("artifact", "numpy", "sympy", "matplotlib"):
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = None
    return out


def write_csv(rows: list[dict], fields: list[str], path: str | None):
    """Rows to ``path`` (or stdout when None)."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fields})
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def write_manifest(manifest: dict, path: str | None, out_path: str | None):
    """Manifest next to the output file, at ``path``, or on stderr."""
    text = json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n"
    if path is None and out_path is not None:
        path = str(Path(out_path).with_suffix(".manifest.json"))
    if path is None:
        sys.stderr.write(text)
    else:
        Path(path).write_text(text)
    return path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_weyl_series(reports, path: str, title: str | None = None):
    """|Sigma_m| against m on a log scale, with the fitted bound where defined."""
    plt = _pyplot()
    with plt.rc_context(FIG_STYLE):
        fig, ax = plt.subplots(figsize=figsize(0.8))
        by_c: dict = {}
        for rep in reports:
            if rep.sigma is not None:
                by_c.setdefault(rep.c, []).append(rep)
        for c, reps in sorted(by_c.items()):
            ms = [rep.m for rep in reps]
            (line,) = ax.semilogy(ms, [max(rep.abs_sigma, 1e-300) for rep in reps], "o-", label=f"c={c}")
            bounded = [rep for rep in reps if rep.rhs is not None]
            if bounded:
                ax.semilogy([rep.m for rep in bounded], [rep.rhs for rep in bounded], "--",
                            color=line.get_color(), label=f"bound c={c}")
        ax.set_xlabel("m")
        ax.set_ylabel(r"$|\Sigma_m|$")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)


def plot_sweep(rows, path: str):
    """|Sigma_1| sqrt(q) against q, with the median band."""
    plt = _pyplot()
    with plt.rc_context(FIG_STYLE):
        fig, ax = plt.subplots(figsize=figsize(0.8))
        qs = [row["q"] for row in rows]
        scaled = [float(row["scaled"]) for row in rows]
        ax.plot(qs, scaled, "o-")
        med = float(np.median(scaled))
        ax.axhline(med, color="0.5", lw=0.8, label="median")
        ax.axhline(4 * med, color="k", ls="--", lw=0.8, label="4 x median")
        ax.set_xlabel("q")
        ax.set_ylabel(r"$|\Sigma_1|\,q^{1/2}$")
        ax.legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)


def plot_unit_circle(values, path: str, title: str | None = None):
    """Points of S^1 (one coordinate) on the unit circle."""
    plt = _pyplot()
    values = np.asarray(values).ravel()
    with plt.rc_context(FIG_STYLE):
        fig, ax = plt.subplots(figsize=figsize(0.6, 1.0))
        theta = np.linspace(0, 2 * np.pi, 361)
        ax.plot(np.cos(theta), np.sin(theta), color="0.7", lw=0.8)
        ax.plot(values.real, values.imag, ".", ms=2)
        ax.set_aspect("equal")
        ax.set_xlim(-1.1, 1.1)
        ax.set_ylim(-1.1, 1.1)
        if title:
            ax.set_title(title)
        fig.savefig(path)
        plt.close(fig)
