"""Latent space likelihood: logistic(alpha - d_ij) edge probabilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

__all__ = ["METRICS", "LatentConfig", "check_metric", "edge_prob", "distances", "loglik", "dyad_weights"]

METRICS = ("ed", "sed", "bilinear")


def check_metric(metric, directed=None):
    metric = str(metric).lower()
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return metric


@dataclass
class LatentConfig:
    """Latent positions ``Z`` (n x d) and intercept ``alpha``."""

    Z: np.ndarray
    alpha: float

    def __post_init__(self):
        self.Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        if self.Z.ndim != 2 or self.Z.shape[1] < 1:
            raise ValueError("Z must have shape (n, d) with d >= 1")
        self.alpha = float(self.alpha)
        if not (np.all(np.isfinite(self.Z)) and np.isfinite(self.alpha)):
            raise ValueError("latent configuration must be finite")


def edge_prob(alpha, d):
    """P(y_ij = 1) = logistic(alpha - d); stable for large |alpha - d|."""
    return expit(np.asarray(alpha, dtype=float) - np.asarray(d, dtype=float))


def distances(Z, metric):
    """Pairwise d_ij. For the bilinear metric d_ij = -z_i'z_j, so a larger
    inner product raises the edge probability."""
    Z = np.asarray(Z, dtype=float)
    if metric == "bilinear":
        return -(Z @ Z.T)
    diff = Z[:, None, :] - Z[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    if metric == "sed":
        return sq
    return np.sqrt(sq)


def dyad_weights(g):
    """Boolean mask of the dyads entering the likelihood: unordered pairs
    for undirected graphs, ordered pairs for directed ones."""
    if g.directed:
        return ~np.eye(g.n, dtype=bool)
    return np.triu(np.ones((g.n, g.n), dtype=bool), 1)


def loglik(y, cfg, metric="ed"):
    """Sum over dyads of y_ij (alpha - d_ij) - log(1 + exp(alpha - d_ij))."""
    metric = check_metric(metric)
    if cfg.Z.shape[0] != y.n:
        raise ValueError(f"Z has {cfg.Z.shape[0]} rows but the graph has {y.n} nodes")
    eta = cfg.alpha - distances(cfg.Z, metric)
    mask = dyad_weights(y)
    a = y.adjacency
    return float(np.sum((a * eta - np.logaddexp(0.0, eta))[mask]))
