"""Binary graphs stored as bit-packed adjacency rows.

Node indices are 0-based in the Python API and 1-based in every text
format (matrix rows are positional, edge lists use ``i j`` with i, j >= 1).
"""

from __future__ import annotations

import io
import os

import numpy as np

__all__ = [
    "Graph",
    "GraphFormatError",
    "from_matrix_text",
    "from_edge_list",
    "read_matrix",
    "read_edge_list",
    "read_graph",
    "toggle",
    "edge_count",
    "degree",
    "neighbors",
    "density",
]


class GraphFormatError(ValueError):
    """Raised when graph input text or arrays violate the binary-graph contract."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _pack_rows(adj):
    n = adj.shape[0]
    n_words = max(1, (n + 63) // 64)
    padded = np.zeros((n, n_words * 64), dtype=np.uint8)
    padded[:, :n] = adj
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def _unpack_rows(rows, n):
    as_bytes = np.ascontiguousarray(rows.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little", count=n)


class Graph:
    """Undirected or directed binary graph without self-loops.

    Graphs are treated as immutable values: :meth:`toggle` returns a new
    graph, and the packed rows are exposed read-only.

    Parameters
    ----------
    adjacency : array-like of shape (n, n)
        0/1 matrix. Must have a zero diagonal, and be symmetric when
        ``directed`` is False.
    directed : bool, default=False
    """

    __slots__ = ("n", "directed", "_rows", "_dense")

    def __init__(self, adjacency, directed=False):
        adj = np.asarray(adjacency)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphFormatError(f"adjacency must be square, got shape {adj.shape}")
        if adj.shape[0] < 1:
            raise GraphFormatError("graph needs at least one node")
        if not np.all((adj == 0) | (adj == 1)):
            raise GraphFormatError("adjacency entries must be 0 or 1")
        adj = adj.astype(np.uint8)
        if np.any(np.diag(adj)):
            raise GraphFormatError("self-loops are not allowed (nonzero diagonal)")
        if not directed and not np.array_equal(adj, adj.T):
            raise GraphFormatError("asymmetric adjacency for an undirected graph")
        self.n = int(adj.shape[0])
        self.directed = bool(directed)
        self._rows = _pack_rows(adj)
        self._rows.setflags(write=False)
        self._dense = adj
        self._dense.setflags(write=False)

    @classmethod
    def _from_rows(cls, rows, n, directed):
        g = cls.__new__(cls)
        g.n = int(n)
        g.directed = bool(directed)
        g._rows = np.array(rows, dtype=np.uint64)
        g._rows.setflags(write=False)
        g._dense = None
        return g

    @classmethod
    def empty(cls, n, directed=False):
        return cls(np.zeros((n, n), dtype=np.uint8), directed=directed)

    @property
    def rows(self):
        """Bit-packed adjacency, shape (n, ceil(n / 64)), bit j of row i is y_ij."""
        return self._rows

    @property
    def adjacency(self):
        if self._dense is None:
            dense = _unpack_rows(self._rows, self.n)
            dense.setflags(write=False)
            self._dense = dense
        return self._dense

    @property
    def n_dyads(self):
        return self.n * (self.n - 1) if self.directed else self.n * (self.n - 1) // 2

    def has_edge(self, i, j):
        return bool((int(self._rows[i, j >> 6]) >> (j & 63)) & 1)

    def edges(self):
        """0-based (i, j) pairs; i < j for undirected graphs."""
        adj = self.adjacency
        if not self.directed:
            adj = np.triu(adj, 1)
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(adj))]

    def toggle(self, i, j):
        return toggle(self, i, j)

    def edge_count(self):
        return edge_count(self)

    def degree(self, i=None):
        if i is None:
            return self.adjacency.sum(axis=1).astype(np.int64)
        return degree(self, i)

    def neighbors(self, i):
        return neighbors(self, i)

    def density(self):
        return density(self)

    def copy_rows(self):
        return np.array(self._rows, dtype=np.uint64)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.directed == other.directed
            and np.array_equal(self._rows, other._rows)
        )

    def __hash__(self):
        return hash((self.n, self.directed, self._rows.tobytes()))

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, edges={self.edge_count()}, {kind})"

    def to_matrix_text(self):
        """Serialize as whitespace-separated 0/1 rows, no header."""
        return "".join(" ".join(map(str, row)) + "\n" for row in self.adjacency)

    def to_edge_list_text(self, header=True):
        """One 1-based ``i j`` pair per line.

        The optional ``# n=<n> directed=<0|1>`` comment keeps isolated
        trailing nodes and directedness through a round trip.
        """
        head = f"# n={self.n} directed={int(self.directed)}\n" if header else ""
        return head + "".join(f"{i + 1} {j + 1}\n" for i, j in self.edges())


def _check_node(g, i):
    if not 0 <= i < g.n:
        raise IndexError(f"node index {i} out of range for n={g.n}")


def toggle(g, i, j):
    """Return a copy of ``g`` with dyad (i, j) flipped (and (j, i) if undirected)."""
    _check_node(g, i)
    _check_node(g, j)
    if i == j:
        raise ValueError("cannot toggle a self-loop")
    rows = g.copy_rows()
    rows[i, j >> 6] ^= np.uint64(1) << np.uint64(j & 63)
    if not g.directed:
        rows[j, i >> 6] ^= np.uint64(1) << np.uint64(i & 63)
    return Graph._from_rows(rows, g.n, g.directed)


def edge_count(g):
    total = int(g.adjacency.sum())
    return total if g.directed else total // 2


def degree(g, i):
    """Out-degree for directed graphs."""
    _check_node(g, i)
    return int(g.adjacency[i].sum())


def neighbors(g, i):
    """Out-neighbours for directed graphs."""
    _check_node(g, i)
    return set(int(k) for k in np.flatnonzero(g.adjacency[i]))


def density(g):
    if g.n_dyads == 0:
        return 0.0
    return edge_count(g) / g.n_dyads


def from_matrix_text(text, skip_lines=0, directed=False):
    """Parse whitespace-separated 0/1 rows after dropping ``skip_lines`` lines.

    Blank lines after the header are ignored. Errors carry the 1-based line
    number of the offending input line.
    """
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in text]
    if skip_lines < 0:
        raise ValueError("skip_lines must be >= 0")
    rows = []
    row_lines = []
    for lineno, line in enumerate(lines[skip_lines:], start=skip_lines + 1):
        tokens = line.split()
        if not tokens:
            continue
        row = []
        for tok in tokens:
            if tok not in ("0", "1"):
                raise GraphFormatError(f"non-binary entry {tok!r}", line=lineno)
            row.append(int(tok))
        rows.append(row)
        row_lines.append(lineno)
    if not rows:
        raise GraphFormatError("no matrix rows after header")
    n = len(rows)
    for row, lineno in zip(rows, row_lines):
        if len(row) != n:
            raise GraphFormatError(
                f"non-square matrix: expected {n} entries, got {len(row)}", line=lineno
            )
    adj = np.array(rows, dtype=np.uint8)
    diag = np.flatnonzero(np.diag(adj))
    if diag.size:
        raise GraphFormatError("nonzero diagonal (self-loop)", line=row_lines[diag[0]])
    if not directed and not np.array_equal(adj, adj.T):
        i, j = np.argwhere(adj != adj.T)[0]
        raise GraphFormatError(
            f"asymmetric entry ({i + 1}, {j + 1}) but undirected graph requested",
            line=row_lines[i],
        )
    return Graph(adj, directed=directed)


def from_edge_list(pairs, n, directed=False, one_based=True):
    """Build a graph from (i, j) pairs; duplicate pairs are accepted."""
    if n < 1:
        raise ValueError("n must be >= 1")
    offset = 1 if one_based else 0
    adj = np.zeros((n, n), dtype=np.uint8)
    for i, j in pairs:
        i, j = int(i) - offset, int(j) - offset
        if not (0 <= i < n and 0 <= j < n):
            raise GraphFormatError(
                f"edge ({i + offset}, {j + offset}) out of range for n={n}"
            )
        if i == j:
            raise GraphFormatError(f"self-loop ({i + offset}, {j + offset})")
        adj[i, j] = 1
        if not directed:
            adj[j, i] = 1
    return Graph(adj, directed=directed)


def _parse_header(line):
    fields = dict(tok.split("=", 1) for tok in line.lstrip("#").split() if "=" in tok)
    return fields


def _parse_edge_list_text(text, n=None, directed=None):
    pairs = []
    header = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#") and not pairs and "n=" in line:
            header = _parse_header(line)
            continue
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'i j', got {line!r}", line=lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer node index in {line!r}", line=lineno)
        if i < 1 or j < 1:
            raise GraphFormatError("node indices are 1-based", line=lineno)
        if i == j:
            raise GraphFormatError(f"self-loop ({i}, {j})", line=lineno)
        pairs.append((i, j))
    if n is None and "n" in header:
        n = int(header["n"])
    if directed is None:
        directed = bool(int(header.get("directed", 0)))
    if n is None:
        n = max((max(p) for p in pairs), default=0)
        if n == 0:
            raise GraphFormatError("empty edge list and no node count given")
    return from_edge_list(pairs, n, directed=directed)


def _read_text(source):
    if isinstance(source, io.TextIOBase):
        return source.read()
    with open(os.fspath(source)) as fh:
        return fh.read()


def read_matrix(path, skip_lines=0, directed=False):
    return from_matrix_text(_read_text(path), skip_lines=skip_lines, directed=directed)


def read_edge_list(path, n=None, directed=None):
    return _parse_edge_list_text(_read_text(path), n=n, directed=directed)


def read_graph(path, fmt="matrix", skip_lines=0, directed=None, n=None):
    if fmt == "matrix":
        return read_matrix(path, skip_lines=skip_lines, directed=bool(directed))
    if fmt == "edgelist":
        return read_edge_list(path, n=n, directed=directed)
    raise ValueError(f"unknown graph format {fmt!r}")
