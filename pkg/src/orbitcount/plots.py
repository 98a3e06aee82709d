"""Figure rendering for the report pipeline.

Every figure lands next to the delimited report it illustrates, same stem,
``.png`` suffix.  Rendering is headless (Agg) and strips the writer
metadata so repeated runs of the same configuration produce stable files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150
_META = {"Software": None}  # drop the version stamp for reproducible bytes


def _save(fig, path):
    fig.savefig(path, dpi=_DPI, metadata=_META)
    plt.close(fig)


def save_series_figure(series, fit, path):
    """Step plot of log N(t) with the fitted line over its window."""
    uniq = np.unique(series.values)
    counts = series.count(uniq)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.step(uniq, np.log(counts), where="post", lw=1.0, label="log N(t)")
    t_lo, t_hi = fit.window
    ts = np.linspace(t_lo, t_hi, 64)
    ax.plot(ts, fit.h_hat * ts + fit.intercept, "r--", lw=1.2,
            label="fit h=%.5f" % fit.h_hat)
    ax.axvspan(t_lo, t_hi, color="0.9", zorder=0)
    ax.axvline(series.t_max, color="0.6", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("log N(t)")
    ax.set_title("%s series, L=%d" % (series.kind, series.L))
    ax.legend(loc="lower right")
    fig.tight_layout()
    _save(fig, path)


def save_ratio_figure(curve, h, path):
    """Prime-orbit normalization h t e^{-ht} N(t) against its limit 1."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(curve[:, 0], curve[:, 1], "o-", ms=3, lw=0.9)
    ax.axhline(1.0, color="0.5", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("h t exp(-h t) N(t)")
    ax.set_title("prime-orbit ratio, h=%.5f" % h)
    fig.tight_layout()
    _save(fig, path)


def save_pairs_figure(measure, gen_set, path, deficit=None):
    """Heatmap of the pair measure over (inverse-prefix, prefix) cells."""
    a_cells = sorted({a for a, _ in measure.cells})
    b_cells = sorted({b for _, b in measure.cells})
    grid = np.zeros((len(a_cells), len(b_cells)))
    for i, a in enumerate(a_cells):
        for j, b in enumerate(b_cells):
            grid[i, j] = measure.cells.get((a, b), 0)
    fig, ax = plt.subplots(figsize=(6.0, 5.2))
    im = ax.imshow(grid / max(measure.total, 1), cmap="viridis")
    ax.set_xticks(range(len(b_cells)),
                  [gen_set.format(b) for b in b_cells], rotation=90, fontsize=7)
    ax.set_yticks(range(len(a_cells)),
                  [gen_set.format(a) for a in a_cells], fontsize=7)
    ax.set_xlabel("cylinder of word")
    ax.set_ylabel("cylinder of inverse word")
    title = "pair measure, depth %d, t=%.3f" % (measure.depth, measure.threshold)
    if deficit is not None:
        title += ", deficit %.2e" % deficit
    ax.set_title(title, fontsize=9)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    _save(fig, path)


def save_cone_figure(sample, path):
    """Limit-cone rays as parallel coordinates over the Cartan indices."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if len(sample.rays):
        xs = np.arange(sample.rays.shape[1]) + 1
        for ray in sample.rays:
            ax.plot(xs, ray, color="tab:blue", alpha=0.25, lw=0.8)
        ax.set_xticks(xs)
    ax.axhline(0.0, color="0.5", lw=0.8)
    ax.set_xlabel("coordinate")
    ax.set_ylabel("unit ray component")
    ax.set_title("limit-cone rays (%d classes)" % len(sample.rays))
    fig.tight_layout()
    _save(fig, path)


def save_pressure_figure(shift, pot, root, path, pressure_fn):
    """Pressure curve s -> P(-s * pot) with the located root."""
    s_hi = max(2.0 * root, root + 0.5, 1.0)
    ss = np.linspace(0.0, s_hi, 80)
    ps = [pressure_fn(shift, pot, s) for s in ss]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(ss, ps, lw=1.2)
    ax.axhline(0.0, color="0.5", lw=0.8)
    ax.plot([root], [0.0], "ro", ms=5, label="root h=%.6f" % root)
    ax.set_xlabel("s")
    ax.set_ylabel("pressure")
    ax.set_title("pressure equation, depth %d" % pot.depth)
    ax.legend(loc="upper right")
    fig.tight_layout()
    _save(fig, path)
