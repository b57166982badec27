"""ERGM sufficient statistics and the distributional statistics used for GoF.

Two independent routes compute the model statistics: :func:`stat_vector`
recomputes from the dense adjacency (shared partners via ``A @ A``), while
:func:`change_stats` works locally on the bit-packed rows around one dyad.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from . import _kernels
from .graph import Graph

__all__ = [
    "StatTerm",
    "ModelSpec",
    "shared_partners",
    "esp_counts",
    "nsp_counts",
    "gw_weights",
    "gwesp",
    "gwnsp",
    "stat_vector",
    "change_stats",
    "degree_distribution",
    "geodesic_distribution",
]

_TERM_CODES = {"edges": _kernels.EDGES, "gwesp": _kernels.GWESP, "gwnsp": _kernels.GWNSP}


@dataclass(frozen=True)
class StatTerm:
    kind: str
    phi: float | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in _TERM_CODES:
            raise ValueError(f"unknown term {self.kind!r}; expected one of {sorted(_TERM_CODES)}")
        object.__setattr__(self, "kind", kind)
        if kind == "edges":
            object.__setattr__(self, "phi", None)
            return
        phi = 0.6 if self.phi is None else float(self.phi)
        if not np.isfinite(phi) or phi < 0:
            raise ValueError(f"decay parameter must be finite and >= 0, got {phi}")
        object.__setattr__(self, "phi", phi)

    @property
    def code(self):
        return _TERM_CODES[self.kind]

    @property
    def name(self):
        if self.kind == "edges":
            return "edges"
        return f"{self.kind}.fixed.{self.phi:g}"

    def to_dict(self):
        if self.kind == "edges":
            return {"term": "edges"}
        return {"term": self.kind, "phi": self.phi}


@dataclass(frozen=True)
class ModelSpec:
    """Ordered ERGM terms; the order fixes the layout of s(y) and theta."""

    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(t if isinstance(t, StatTerm) else StatTerm(**t) for t in self.terms)
        if not terms:
            raise ValueError("a model needs at least one term")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_terms(cls, *specs):
        """``ModelSpec.from_terms("edges", ("gwesp", 0.6))``."""
        terms = []
        for s in specs:
            if isinstance(s, StatTerm):
                terms.append(s)
            elif isinstance(s, str):
                terms.append(StatTerm(s))
            else:
                terms.append(StatTerm(*s))
        return cls(tuple(terms))

    @classmethod
    def from_config(cls, items):
        if isinstance(items, dict):
            items = items.get("terms", items.get("model"))
        if not isinstance(items, list):
            raise ValueError("model config must be a list of {'term': ..., 'phi': ...} objects")
        terms = []
        for k, item in enumerate(items):
            if not isinstance(item, dict) or "term" not in item:
                raise ValueError(f"model term #{k}: expected an object with a 'term' field")
            terms.append(StatTerm(item["term"], item.get("phi")))
        return cls(tuple(terms))

    @classmethod
    def from_json(cls, text):
        return cls.from_config(json.loads(text))

    def to_config(self):
        return [t.to_dict() for t in self.terms]

    def to_json(self):
        return json.dumps(self.to_config())

    def __len__(self):
        return len(self.terms)

    @property
    def names(self):
        return [t.name for t in self.terms]

    @property
    def codes(self):
        return np.array([t.code for t in self.terms], dtype=np.int64)

    @property
    def needs_undirected(self):
        return any(t.kind != "edges" for t in self.terms)

    def weight_table(self, n):
        table = np.zeros((len(self.terms), n + 1))
        for t, term in enumerate(self.terms):
            if term.kind != "edges":
                table[t] = gw_weights(term.phi, n)
        return table

    def check_graph(self, g):
        if g.directed and self.needs_undirected:
            raise ValueError("gwesp/gwnsp terms are defined for undirected graphs only")


def _require_undirected(g):
    if g.directed:
        raise ValueError("shared-partner statistics are defined for undirected graphs only")


def shared_partners(g, i, j):
    _require_undirected(g)
    if i == j:
        raise ValueError("shared partners need two distinct nodes")
    return int(_kernels.shared_partners(g.rows, i, j))


def _sp_matrix(g):
    a = g.adjacency.astype(np.int64)
    return a, a @ a


def esp_counts(g):
    """EP_k for k = 0..n-2: edges whose endpoints share exactly k partners."""
    _require_undirected(g)
    a, sp = _sp_matrix(g)
    iu = np.triu_indices(g.n, 1)
    vals = sp[iu][a[iu] == 1]
    return np.bincount(vals, minlength=max(g.n - 1, 1))


def nsp_counts(g):
    """NEP_k for k = 0..n-2: non-adjacent dyads sharing exactly k partners."""
    _require_undirected(g)
    a, sp = _sp_matrix(g)
    iu = np.triu_indices(g.n, 1)
    vals = sp[iu][a[iu] == 0]
    return np.bincount(vals, minlength=max(g.n - 1, 1))


def gw_weights(phi, n):
    """Weights w_k = e^phi (1 - (1 - e^-phi)^k) for k = 0..n."""
    k = np.arange(n + 1)
    return np.exp(phi) * (1.0 - (1.0 - np.exp(-phi)) ** k)


def _gw_from_counts(counts, phi):
    w = gw_weights(phi, counts.size - 1)
    return float(np.dot(w[1:], counts[1:]))


def gwesp(g, phi):
    return _gw_from_counts(esp_counts(g), phi)


def gwnsp(g, phi):
    return _gw_from_counts(nsp_counts(g), phi)


def stat_vector(g, model):
    """Full recompute of s(y) in term order."""
    model.check_graph(g)
    out = np.empty(len(model))
    esp = nsp = None
    for t, term in enumerate(model.terms):
        if term.kind == "edges":
            out[t] = g.edge_count()
        elif term.kind == "gwesp":
            esp = esp_counts(g) if esp is None else esp
            out[t] = _gw_from_counts(esp, term.phi)
        else:
            nsp = nsp_counts(g) if nsp is None else nsp
            out[t] = _gw_from_counts(nsp, term.phi)
    return out


def change_stats(g, model, dyad):
    """s(y with ``dyad`` toggled) - s(y), from the local neighbourhood only."""
    i, j = dyad
    if i == j:
        raise ValueError("cannot toggle a self-loop")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise IndexError(f"dyad {dyad} out of range for n={g.n}")
    model.check_graph(g)
    out = np.zeros(len(model))
    _kernels.change_stats(g.rows, i, j, model.codes, model.weight_table(g.n), out)
    return out


def degree_distribution(g):
    """counts[k] = number of nodes with (out-)degree k, k = 0..n-1."""
    return np.bincount(g.degree(), minlength=g.n).astype(np.int64)


def _geodesics(g):
    if g.n == 1:
        return np.zeros((1, 1))
    return shortest_path(
        csr_matrix(g.adjacency), method="D", directed=g.directed, unweighted=True
    )


def geodesic_distribution(g):
    """Shortest-path length counts over pairs (unordered when undirected).

    Returns ``(counts, unreachable)`` where ``counts`` maps each finite
    distance to its number of pairs.
    """
    dist = _geodesics(g)
    if g.directed:
        mask = ~np.eye(g.n, dtype=bool)
        vals = dist[mask]
    else:
        vals = dist[np.triu_indices(g.n, 1)]
    finite = vals[np.isfinite(vals)].astype(np.int64)
    uniq, cnt = np.unique(finite, return_counts=True)
    counts = {int(d): int(c) for d, c in zip(uniq, cnt)}
    return counts, int(np.sum(~np.isfinite(vals)))
