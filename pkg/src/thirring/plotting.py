"""SVG heatmaps, time slices and extrapolation plots with reproducible bytes."""

from __future__ import annotations

import csv
import io
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from .observables import ObservableSeries

_LABELS = {
    "delta_density": ("site", "vacuum-subtracted density"),
    "S1": ("cut", "excess entropy over vacuum"),
    "S2": ("cut", "excess entropy over single packets"),
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "thirring"
    matplotlib.rcParams["svg.fonttype"] = "none"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def emit_plots(
    series: ObservableSeries,
    path: str | Path,
    slices: Sequence[float] | None = None,
) -> list[Path]:
    """Heatmap of ``series`` (time on the vertical axis); optional line plots at ``slices``."""
    path = Path(path)
    if series.times.size == 0 or series.values.size == 0:
        warnings.warn(f"empty series, no plot written for {path.name}")
        return []
    plt = _pyplot()
    xlabel, clabel = _LABELS[series.kind]
    cols = series.axis_labels()
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    t = series.times
    dt = (t[1] - t[0]) / 2 if t.size > 1 else 0.5
    vmax = float(np.max(np.abs(series.values))) or 1.0
    cmap = "RdBu_r" if series.kind == "delta_density" else "viridis"
    vmin = -vmax if series.kind == "delta_density" else None
    im = ax.imshow(
        series.values, origin="lower", aspect="auto", cmap=cmap, vmin=vmin, vmax=vmax,
        extent=(cols[0] - 0.5, cols[-1] + 0.5, t[0] - dt, t[-1] + dt), interpolation="nearest",
    )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("t")
    fig.colorbar(im, ax=ax, label=clabel)
    fig.tight_layout()
    out = [_save(fig, path)]
    plt.close(fig)
    if slices:
        out.append(emit_slices(series, path.with_name(path.stem + "_slices.svg"), slices))
    return out


def emit_slices(series: ObservableSeries, path: str | Path, slices: Sequence[float]) -> Path:
    plt = _pyplot()
    cols = series.axis_labels()
    fig, axes = plt.subplots(1, len(slices), figsize=(2.2 * len(slices), 2.4), sharey=True)
    axes = np.atleast_1d(axes)
    for ax, ts in zip(axes, slices):
        i = int(np.argmin(np.abs(series.times - ts)))
        ax.plot(cols, series.values[i], marker="D", ms=3)
        ax.axhline(0.0, color="grey", ls="--", lw=0.8)
        ax.set_title(f"t = {series.times[i]:g}")
        ax.set_xlabel(_LABELS[series.kind][0])
    fig.tight_layout()
    _save(fig, Path(path))
    plt.close(fig)
    return Path(path)


def emit_zne_plot(csv_text: str, path: str | Path) -> Path:
    """Gain-resolved means with both fitted models, one panel per observable."""
    from .noise import _exponential, _linear, zne_extrapolate

    rows = [r for r in csv.DictReader(io.StringIO("\n".join(
        ln for ln in csv_text.splitlines() if not ln.startswith("#"))))]
    names = sorted({r["observable"] for r in rows})
    plt = _pyplot()
    fig, axes = plt.subplots(1, len(names), figsize=(2.6 * len(names), 2.6), squeeze=False)
    grid = np.linspace(0.0, 2.7, 60)
    for ax, name in zip(axes[0], names):
        sel = [r for r in rows if r["observable"] == name]
        g = np.array([float(r["gain"]) for r in sel])
        y = np.array([float(r["mean"]) for r in sel])
        e = np.array([float(r["stderr"]) for r in sel])
        ax.errorbar(g, y, yerr=e, fmt="o", ms=3)
        fit = zne_extrapolate(g, y, e)
        func = _linear if fit.model == "linear" else _exponential
        ax.plot(grid, func(grid, *fit.params), ls="-." if fit.model == "linear" else "--")
        ax.errorbar([0.0], [fit.value], yerr=[fit.stderr], fmt="s", ms=3)
        ax.set_title(f"{name} ({fit.model})")
        ax.set_xlabel("gain")
    fig.tight_layout()
    _save(fig, Path(path))
    plt.close(fig)
    return Path(path)


def series_from_csv(text: str) -> list[ObservableSeries]:
    """Rebuild series from a density or entropy CSV."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        return []
    head = list(rows[0])
    col = "site" if "site" in head else "cut"
    times = sorted({float(r["t"]) for r in rows}, key=float)
    cols = sorted({int(r[col]) for r in rows})
    t_index = {t: i for i, t in enumerate(times)}
    offset = cols[0]

    def grid(key):
        arr = np.zeros((len(times), len(cols)))
        for r in rows:
            arr[t_index[float(r["t"])], int(r[col]) - offset] = float(r[key])
        return arr

    if "delta_density" in head:
        return [ObservableSeries(np.array(times), grid("delta_density"), "delta_density")]
    if "S1" in head:
        return [
            ObservableSeries(np.array(times), grid("S1"), "S1"),
            ObservableSeries(np.array(times), grid("S2"), "S2"),
        ]
    raise ValueError(f"unrecognized CSV columns {head}")


def plot_csv(path: str | Path, slices: Sequence[float] | None = None) -> list[Path]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    first = text.splitlines()[0] if text else ""
    if first.startswith("observable,gain"):
        return [emit_zne_plot(text, path.with_suffix(".svg"))]
    out = []
    series = series_from_csv(text)
    for s in series:
        suffix = "" if len(series) == 1 else f"_{s.kind}"
        out.extend(emit_plots(s, path.with_name(path.stem + suffix + ".svg"), slices))
    return out
