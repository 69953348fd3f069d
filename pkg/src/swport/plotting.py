"""Figures for the CLI report paths.  Everything renders off-screen to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KIND_COLORS = {"dGPU": "#1f77b4", "iGPU": "#2ca02c", "CPU": "#d62728"}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _bar_labels(ax, bars, fmt):
    for b in bars:
        ax.annotate(fmt(b.get_height()), (b.get_x() + b.get_width() / 2, b.get_height()),
                    ha="center", va="bottom", fontsize=7, xytext=(0, 2), textcoords="offset points")


def peak_figure(rows, path):
    """``rows``: (model, kind, peak_gcups)."""
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(rows)), 4))
    names = [r[0] for r in rows]
    bars = ax.bar(range(len(rows)), [r[2] for r in rows],
                  color=[KIND_COLORS.get(r[1], "grey") for r in rows])
    _bar_labels(ax, bars, lambda v: f"{v:.1f}")
    ax.set_xticks(range(len(rows)), names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("theoretical peak (GCUPS)")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in KIND_COLORS.values()]
    ax.legend(handles, KIND_COLORS.keys(), frameon=False, fontsize=8)
    _save(fig, path)


def efficiency_figure(platforms, series: dict, pp_values: dict, path):
    """Grouped bars of efficiency per platform; dashed lines mark each P value.

    ``series`` maps implementation -> list of efficiencies (None = unsupported),
    ``pp_values`` maps a label -> fraction or None.
    """
    n = max(1, len(series))
    width = 0.8 / n
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(platforms)), 4))
    for k, (impl, values) in enumerate(series.items()):
        xs = [p + (k - (n - 1) / 2) * width for p in range(len(platforms))]
        heights = [100 * v if v is not None else 0 for v in values]
        ax.bar(xs, heights, width, label=impl or "all")
    for k, (label, v) in enumerate(pp_values.items()):
        if v is not None:
            ax.axhline(100 * v, ls="--", lw=1, color=f"C{(k + n) % 10}", label=f"P {label}: {100 * v:.1f}%")
    ax.set_xticks(range(len(platforms)), platforms, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("architectural efficiency (%)")
    ax.legend(frameon=False, fontsize=7)
    _save(fig, path)


def makespan_figure(strategies: dict, path):
    """``strategies``: name -> {worker: seconds}; one panel per strategy."""
    fig, axes = plt.subplots(1, len(strategies), figsize=(4 * len(strategies), 3.5), sharey=True, squeeze=False)
    for ax, (name, seconds) in zip(axes[0], strategies.items()):
        bars = ax.bar(list(seconds), list(seconds.values()), color="#7f7f7f")
        _bar_labels(ax, bars, lambda v: f"{v:.3g}")
        ax.set_title(name, fontsize=9)
        ax.tick_params(axis="x", labelrotation=45, labelsize=8)
    axes[0][0].set_ylabel("estimated time (s)")
    _save(fig, path)


def bench_figure(rows, path):
    """``rows``: (label, achieved_gcups, peak_gcups)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    labels = [r[0] for r in rows]
    bars = ax.bar(labels, [r[1] for r in rows], color="#1f77b4", label="achieved")
    ax.plot(labels, [r[2] for r in rows], "k_", ms=30, mew=2, label="peak")
    _bar_labels(ax, bars, lambda v: f"{v:.3f}")
    ax.set_yscale("log")
    ax.set_ylabel("GCUPS")
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
