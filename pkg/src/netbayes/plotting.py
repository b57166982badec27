"""SVG figures: MCMC diagnostics, latent positions and GoF boxplots."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy.stats import gaussian_kde  # noqa: E402

# fixed ids and no timestamp so repeated runs give identical files
matplotlib.rcParams["svg.hashsalt"] = "netbayes"
_SVG_META = {"Date": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def mcmc_panels(draws, names, path, max_lag=200):
    """Pooled density, trace and mean-over-chains ACF per parameter.

    ``draws`` has shape (n_chains, n_iters, p).
    """
    from .ergm import autocorrelation

    draws = np.asarray(draws, dtype=float)
    p = draws.shape[2]
    fig, axes = plt.subplots(p, 3, figsize=(10, 2.6 * p), squeeze=False)
    for j in range(p):
        ax_d, ax_t, ax_a = axes[j]
        for chain in draws[:, :, j]:
            ax_t.plot(chain, lw=0.5)
        ax_t.set_title(f"trace: {names[j]}", fontsize=9)
        pooled = draws[:, :, j].ravel()
        if np.ptp(pooled) > 0:
            grid = np.linspace(pooled.min(), pooled.max(), 200)
            ax_d.plot(grid, gaussian_kde(pooled)(grid), color="k")
        ax_d.set_title(f"density: {names[j]}", fontsize=9)
        lag = min(max_lag, draws.shape[1] - 1)
        if lag >= 1:
            acf = np.nanmean([autocorrelation(c, lag) for c in draws[:, :, j]], axis=0)
            ax_a.vlines(np.arange(acf.size), 0, acf)
        ax_a.axhline(0, color="grey", lw=0.5)
        ax_a.set_title(f"autocorrelation: {names[j]}", fontsize=9)
    return _save(fig, path)


def latent_positions(Z, g, path, labels=None, title=None):
    """Nodes at ``Z[:, :2]`` with edges between connected nodes, coloured by ``labels``."""
    Z = np.asarray(Z, dtype=float)
    if Z.shape[1] == 1:
        Z = np.column_stack([Z[:, 0], np.zeros(len(Z))])
    fig, ax = plt.subplots(figsize=(6, 6))
    for i, j in g.edges():
        ax.plot(Z[[i, j], 0], Z[[i, j], 1], color="0.7", lw=0.6, zorder=1)
    colours = None if labels is None else np.asarray(labels)
    ax.scatter(Z[:, 0], Z[:, 1], c=colours, cmap="tab10" if colours is not None else None,
               s=25, zorder=2, edgecolors="k", linewidths=0.4)
    ax.set_aspect("equal", adjustable="datalim")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def gof_panel(fam, path):
    """Boxplots of simulated counts per bin with the observed counts as a line."""
    fig, ax = plt.subplots(figsize=(max(5, 0.4 * len(fam.bins)), 4))
    ax.boxplot(fam.simulated, positions=np.arange(len(fam.bins)), widths=0.6, whis=(0, 100))
    ax.plot(np.arange(len(fam.bins)), fam.observed, color="k", lw=1.5)
    ax.set_xticks(np.arange(len(fam.bins)))
    ax.set_xticklabels(fam.bins, fontsize=7, rotation=45)
    ax.set_title(fam.name)
    ax.set_ylabel("count")
    return _save(fig, path)


def elbo_trace(trace, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(np.arange(len(trace)), trace, marker=".")
    ax.set_xlabel("iteration")
    ax.set_ylabel("lower bound")
    return _save(fig, path)
