"""Starting latent positions."""

import numpy as np

from ..netstats import _geodesics
from ..validation import rng_from

INIT_METHODS = ("fruchterman_reingold", "random", "geodesic_mds")

_ALIASES = {"fr": "fruchterman_reingold", "mds": "geodesic_mds"}


def _fruchterman_reingold(y, d, seed):
    import networkx as nx

    g = nx.from_numpy_array(np.asarray(y.adjacency))
    # the layout needs at least two dimensions; one-dimensional starts take
    # the leading principal axis of the planar layout
    pos = nx.spring_layout(g, dim=max(d, 2), seed=seed)
    P = np.array([pos[i] for i in range(y.n)], dtype=float)
    if d == 1:
        P -= P.mean(axis=0)
        P = P @ np.linalg.svd(P, full_matrices=False)[2][:1].T
    return P


def _geodesic_mds(y, d):
    dist = _geodesics(y)
    if y.directed:
        dist = np.minimum(dist, dist.T)
    finite = np.isfinite(dist)
    dist = np.where(finite, dist, dist[finite].max() + 1 if finite.any() else 1.0)
    n = y.n
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (dist**2) @ J
    vals, vecs = np.linalg.eigh(B)
    order = np.argsort(vals)[::-1][:d]
    coords = vecs[:, order] * np.sqrt(np.clip(vals[order], 0.0, None))
    if coords.shape[1] < d:
        coords = np.hstack([coords, np.zeros((n, d - coords.shape[1]))])
    return coords


def initial_positions(y, d=2, method="fruchterman_reingold", seed=None):
    """Centred n x d starting configuration.

    ``seed`` may be an int or a Generator; the force-directed layout needs
    an integer seed, so a Generator is reduced to one.
    """
    if d < 1:
        raise ValueError("latent dimension must be >= 1")
    method = _ALIASES.get(method, method)
    if method == "random":
        Z = rng_from(seed).normal(size=(y.n, d))
    elif method == "fruchterman_reingold":
        if isinstance(seed, np.random.Generator):
            seed = int(seed.integers(0, 2**31 - 1))
        Z = _fruchterman_reingold(y, d, seed)
    elif method == "geodesic_mds":
        Z = _geodesic_mds(y, d)
    else:
        raise ValueError(f"unknown init method {method!r}; expected one of {INIT_METHODS}")
    return Z - Z.mean(axis=0)
