import os

import numpy as np
import pytest

from netbayes.graph import Graph, read_matrix

# The bottlenose dolphin network is not redistributed with the package.
# Point NETBAYES_DOLPHIN_DATA at the 62-node adjacency-matrix file to enable
# the data-dependent checks; NETBAYES_DOLPHIN_SKIP sets its header length.
DOLPHIN_ENV = "NETBAYES_DOLPHIN_DATA"
DOLPHIN_SKIP_ENV = "NETBAYES_DOLPHIN_SKIP"


def dolphin_path():
    path = os.environ.get(DOLPHIN_ENV)
    return path if path and os.path.exists(path) else None


def load_dolphins():
    path = dolphin_path()
    if path is None:
        return None
    return read_matrix(path, skip_lines=int(os.environ.get(DOLPHIN_SKIP_ENV, "130")))


@pytest.fixture(scope="session")
def dolphins():
    g = load_dolphins()
    if g is None:
        pytest.skip(f"dolphin data not available (set {DOLPHIN_ENV})")
    return g


def complete(n):
    return Graph(np.ones((n, n), dtype=np.uint8) - np.eye(n, dtype=np.uint8))


def cycle(n):
    A = np.zeros((n, n), dtype=np.uint8)
    for i in range(n):
        A[i, (i + 1) % n] = A[(i + 1) % n, i] = 1
    return Graph(A)


def path(n):
    A = np.zeros((n, n), dtype=np.uint8)
    for i in range(n - 1):
        A[i, i + 1] = A[i + 1, i] = 1
    return Graph(A)


def random_graph(n, p, rng, directed=False):
    U = rng.random((n, n)) < p
    if directed:
        A = U.astype(np.uint8)
        np.fill_diagonal(A, 0)
    else:
        A = np.triu(U, 1).astype(np.uint8)
        A = A + A.T
    return Graph(A, directed=directed)


def two_cliques():
    """Two K5 blocks joined by one bridge edge; nodes 0-4 and 5-9."""
    A = np.zeros((10, 10), dtype=np.uint8)
    A[:5, :5] = 1
    A[5:, 5:] = 1
    np.fill_diagonal(A, 0)
    A[4, 5] = A[5, 4] = 1
    return Graph(A)
