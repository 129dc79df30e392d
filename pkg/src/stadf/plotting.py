"""Matplotlib figure rendering for the CLI report paths.

All figures are written to files (no interactive backends) and are
deterministic: the SVG hash salt is pinned and date metadata stripped, so
identical inputs produce identical bytes.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .montecarlo import RejectionTable  # noqa: E402
from .series import TimeSeries  # noqa: E402
from .varprofile import VarianceProfile  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "stadf"

_SAVE_KW = {"svg": {"metadata": {"Date": None}}, "png": {"dpi": 150}}


def _save(fig, base: Path, formats):
    paths = []
    for fmt in formats:
        out = base.with_suffix(f".{fmt}")
        fig.savefig(out, format=fmt, **_SAVE_KW.get(fmt, {}))
        paths.append(out)
    plt.close(fig)
    return paths


def plot_series_with_profile(series: TimeSeries, profile: VarianceProfile,
                             base: Path, formats=("svg",), title: str = None):
    """Two panels: the series, and the estimated variance profile vs the diagonal."""
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    x = range(len(series.values))
    ax0.plot(x, series.values, lw=1.0, color="tab:blue")
    ax0.set_xlabel("t")
    ax0.set_ylabel("y")
    if title:
        ax0.set_title(title)
    T = profile.source_length
    ax1.plot(profile.knots_x / T, profile.knots_eta, lw=1.2, color="tab:red",
             label="variance profile")
    ax1.plot([0, 1], [0, 1], lw=0.8, ls="--", color="gray", label="homoskedastic")
    ax1.set_xlabel("s")
    ax1.set_ylabel("cumulative variance share")
    ax1.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(base), formats)


def plot_rejection_curves(table: RejectionTable, base: Path, formats=("svg",)):
    """Rejection frequency against delta1, one panel per (volatility, T)."""
    cfg = table.config
    nrows = len(cfg.vol_specs)
    ncols = len(cfg.T_list)
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.6 * ncols, 2.6 * nrows),
                             squeeze=False, sharey=True)
    deltas = sorted(cfg.delta1_grid)
    for i, (label, _) in enumerate(cfg.vol_specs):
        for j, T in enumerate(cfg.T_list):
            ax = axes[i][j]
            for test in cfg.tests:
                freqs = [table.cell(label, d, T, test).frequency for d in deltas]
                ax.plot(deltas, freqs, marker="o", ms=3, lw=1.0, label=test)
            ax.axhline(cfg.level, color="gray", lw=0.6, ls="--")
            ax.set_title(f"{label}, T={T}", fontsize=9)
            ax.set_xlabel("delta1", fontsize=8)
            if j == 0:
                ax.set_ylabel("rejection frequency", fontsize=8)
    axes[0][0].legend(frameon=False, fontsize=7)
    fig.tight_layout()
    return _save(fig, Path(base), formats)


def plot_timing(rows: list, base: Path, formats=("svg",)):
    """Median runtime against T on log scale, one line per test."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    tests = sorted({r.test for r in rows}, key=lambda t: [r.test for r in rows].index(t))
    for test in tests:
        pts = sorted((r.T, r.median_seconds) for r in rows if r.test == test)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=4,
                lw=1.2, label=test)
    ax.set_yscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel("median seconds per test")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(base), formats)
