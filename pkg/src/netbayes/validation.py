"""Input validation and RNG helpers shared by the estimators."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .graph import Graph


def check_graph(y, directed=None):
    """Coerce ``y`` to a :class:`Graph`.

    Accepts a Graph, a square 0/1 array-like, or anything exposing a
    ``to_numpy_array``-compatible networkx interface.
    """
    if isinstance(y, Graph):
        if directed is not None and y.directed != bool(directed):
            raise ValueError("graph directedness does not match the estimator")
        return y
    if hasattr(y, "is_directed") and hasattr(y, "nodes"):
        import networkx as nx

        adj = nx.to_numpy_array(y, dtype=np.uint8)
        return Graph(adj, directed=y.is_directed() if directed is None else directed)
    adj = check_array(y, dtype=None, ensure_2d=True, ensure_min_samples=1)
    if directed is None:
        directed = not np.array_equal(adj, adj.T)
    return Graph(adj, directed=bool(directed))


def check_theta(theta, model):
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if theta.size != len(model):
        raise ValueError(f"theta has {theta.size} entries but the model has {len(model)} terms")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    return theta


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def rng_from(seed):
    """A ``numpy.random.Generator`` from a seed, an existing Generator, or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def stream(seed, stream_id):
    """Independent, reproducible generator for worker ``stream_id`` under ``seed``."""
    if seed is None:
        return np.random.default_rng()
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(0, 2**63 - 1))
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream_id)]))
