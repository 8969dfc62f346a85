"""The five figure kinds rendered from sweep directories.

overlay    spectra across absorber strengths, one labeled curve per run
semilog    same overlay on a log ordinate; non-positive samples are
           dropped from the curve and the dropped-negative count is
           reported per curve
negcontent integrated negative spectral content against gamma0
extent     grid extent and run duration against gamma0, two panels
heatmap    absorbed fraction against time and gamma0

Rendering is read-only: figures are derived from the text files alone,
and identical inputs with identical options give identical images.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import RunData, SchemaError, discover_runs, load_summary

SPECTRUM_COLUMNS = ("dP2_dE", "dP1_dE")


@dataclass
class PlotJob:
    kind: str
    input_dir: str
    out_path: str
    column: str = "dP2_dE"
    logx: bool = False


def _column(run: RunData, name: str) -> np.ndarray:
    if name not in SPECTRUM_COLUMNS:
        raise SchemaError(
            f"{run.path / 'spectrum.txt'}: unknown column '{name}', "
            f"expected one of {', '.join(SPECTRUM_COLUMNS)}")
    return getattr(run, name)


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    return fig, ax


def _overlay(job: PlotJob, log_y: bool) -> dict:
    runs = discover_runs(job.input_dir)
    fig, ax = _new_axes()
    omitted: dict[float, int] = {}
    for run in runs:
        d = _column(run, job.column)
        label = f"gamma0={run.gamma0:g}"
        if log_y:
            n_neg = int(np.sum(d < 0.0))
            omitted[run.gamma0] = n_neg
            keep = d > 0.0
            if n_neg:
                label += f" [{n_neg} neg omitted]"
            ax.semilogy(run.energy[keep], d[keep], label=label)
        else:
            ax.plot(run.energy, d, label=label)
    if log_y:
        total = sum(omitted.values())
        if total:
            ax.set_title(f"{total} negative samples omitted")
    if job.logx:
        ax.set_xscale("log")
    ax.set_xlabel("energy")
    ax.set_ylabel(job.column)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(job.out_path)
    plt.close(fig)
    return {"out": job.out_path, "curves": len(runs),
            "omitted_negative": omitted if log_y else None}


def _negcontent(job: PlotJob) -> dict:
    table = load_summary(Path(job.input_dir) / "summary.csv")
    fig, ax = _new_axes()
    ax.loglog(table["gamma0"], table["neg_content"], "o-")
    ax.set_xlabel("gamma0")
    ax.set_ylabel("negative spectral content")
    fig.tight_layout()
    fig.savefig(job.out_path)
    plt.close(fig)
    return {"out": job.out_path, "curves": 1, "omitted_negative": None}


def _extent(job: PlotJob) -> dict:
    table = load_summary(Path(job.input_dir) / "summary.csv")
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 5.0), dpi=120,
                                   sharex=True)
    ax1.semilogx(table["gamma0"], table["extent"], "o-")
    ax1.set_ylabel("extent")
    ax2.semilogx(table["gamma0"], table["duration"], "s-")
    ax2.set_ylabel("duration")
    ax2.set_xlabel("gamma0")
    fig.tight_layout()
    fig.savefig(job.out_path)
    plt.close(fig)
    return {"out": job.out_path, "curves": 2, "omitted_negative": None}


def _heatmap(job: PlotJob) -> dict:
    runs = discover_runs(job.input_dir)
    t_end = max(run.meta["ledger"]["t"][-1] for run in runs)
    t_edges = np.linspace(0.0, t_end, 401)
    t_grid = 0.5 * (t_edges[:-1] + t_edges[1:])
    rows = []
    for run in runs:
        led = run.meta["ledger"]
        t = np.asarray(led["t"], dtype=float)
        absorbed = 1.0 - np.asarray(led["norm2_psi"], dtype=float)
        rows.append(np.interp(t_grid, t, absorbed))
    z = np.vstack(rows)
    fig, ax = _new_axes()
    mesh = ax.pcolormesh(t_edges, np.arange(len(runs) + 1), z,
                         shading="flat")
    ax.set_yticks(np.arange(len(runs)) + 0.5)
    ax.set_yticklabels([f"{run.gamma0:g}" for run in runs], fontsize=8)
    ax.set_xlabel("time")
    ax.set_ylabel("gamma0")
    fig.colorbar(mesh, ax=ax, label="absorbed fraction")
    fig.tight_layout()
    fig.savefig(job.out_path)
    plt.close(fig)
    return {"out": job.out_path, "curves": len(runs),
            "omitted_negative": None}


KINDS = ("overlay", "semilog", "negcontent", "extent", "heatmap")


def render(job: PlotJob) -> dict:
    """Render one figure; returns a small stats dict for callers/tests."""
    if job.kind == "overlay":
        return _overlay(job, log_y=False)
    if job.kind == "semilog":
        return _overlay(job, log_y=True)
    if job.kind == "negcontent":
        return _negcontent(job)
    if job.kind == "extent":
        return _extent(job)
    if job.kind == "heatmap":
        return _heatmap(job)
    raise ValueError(f"unknown figure kind '{job.kind}', "
                     f"expected one of {', '.join(KINDS)}")
