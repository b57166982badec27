"""Simulation of graphs from the ERGM likelihood at a fixed parameter."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .graph import Graph
from .netstats import ModelSpec, stat_vector
from .validation import check_theta, rng_from

__all__ = ["SimConfig", "simulate_ergm", "sample_stats", "sample_graph_codes"]

_PROPOSALS = {
    "tnt": _kernels.PROPOSAL_TIE_NO_TIE,
    "tie_no_tie": _kernels.PROPOSAL_TIE_NO_TIE,
    "random": _kernels.PROPOSAL_RANDOM_DYAD,
    "random_dyad": _kernels.PROPOSAL_RANDOM_DYAD,
}


@dataclass
class SimConfig:
    """Settings for one auxiliary chain.

    ``start`` is a :class:`Graph` (the observed network or any given one)
    or the string ``"empty"``.
    """

    aux_iters: int = 3000
    proposal: str = "tnt"
    seed: Union[int, np.random.Generator, None] = None
    start: Union[Graph, str] = "empty"

    def __post_init__(self):
        if int(self.aux_iters) <= 0:
            raise ValueError(f"aux_iters must be > 0, got {self.aux_iters}")
        self.aux_iters = int(self.aux_iters)
        if self.proposal not in _PROPOSALS:
            raise ValueError(f"unknown proposal {self.proposal!r}; use 'tnt' or 'random'")
        if not isinstance(self.start, Graph) and self.start != "empty":
            raise ValueError("start must be a Graph or 'empty'")

    @property
    def proposal_code(self):
        return _PROPOSALS[self.proposal]


def _start_graph(cfg, n=None, directed=False):
    if isinstance(cfg.start, Graph):
        return cfg.start
    if n is None:
        raise ValueError("an empty start graph needs the node count n")
    return Graph.empty(n, directed=directed)


class _Chain:
    """Mutable auxiliary-chain state: packed rows plus running statistics."""

    def __init__(self, g, model):
        model.check_graph(g)
        self.g0 = g
        self.model = model
        self.codes = model.codes
        self.wtab = model.weight_table(g.n)
        self.rows = g.copy_rows()
        self.stats = stat_vector(g, model)

    def run(self, theta, burn, n_records, thin, proposal, rng, record_codes=False):
        p = len(self.model)
        rec_stats = np.zeros((n_records, p))
        rec_codes = np.zeros(n_records if record_codes else 0, dtype=np.int64)
        _kernels.run_chain(
            self.rows, self.g0.directed, np.asarray(theta, dtype=np.float64),
            self.codes, self.wtab, self.stats, burn, n_records, max(thin, 1),
            proposal, rng, rec_stats, rec_codes, record_codes,
        )
        return rec_stats, rec_codes

    def graph(self):
        return Graph._from_rows(self.rows, self.g0.n, self.g0.directed)


def simulate_ergm(theta, model, cfg, n=None, directed=False):
    """Run ``cfg.aux_iters`` toggle proposals and return ``(graph, stats)``.

    ``n``/``directed`` are only needed when ``cfg.start == "empty"``.
    The returned statistics are a full recompute on the final graph; the
    incrementally accumulated vector is checked against it.
    """
    theta = check_theta(theta, model)
    chain = _Chain(_start_graph(cfg, n, directed), model)
    chain.run(theta, cfg.aux_iters, 0, 1, cfg.proposal_code, rng_from(cfg.seed))
    g = chain.graph()
    exact = stat_vector(g, model)
    scale = max(1.0, float(np.max(np.abs(exact))))
    if np.max(np.abs(exact - chain.stats)) > 1e-8 * scale:
        raise RuntimeError("incremental statistics drifted from the full recompute")
    return g, exact


def sample_stats(theta, model, cfg, n_samples, thin=1, n=None, directed=False):
    """``n_samples`` statistic vectors, one every ``thin`` proposals after a
    burn-in of ``cfg.aux_iters`` proposals. Returns shape (n_samples, p)."""
    theta = check_theta(theta, model)
    if n_samples <= 0:
        raise ValueError("n_samples must be > 0")
    if thin <= 0:
        raise ValueError("thin must be > 0")
    chain = _Chain(_start_graph(cfg, n, directed), model)
    stats, _ = chain.run(theta, cfg.aux_iters, n_samples, thin, cfg.proposal_code, rng_from(cfg.seed))
    return stats


def sample_graph_codes(theta, model, cfg, n_samples, thin=1, n=None, directed=False):
    """Like :func:`sample_stats` but also returns an integer code per sampled
    graph (bit b set iff the b-th dyad in row-major order is a tie). Only
    meaningful for small n."""
    theta = check_theta(theta, model)
    g0 = _start_graph(cfg, n, directed)
    if g0.n_dyads > 62:
        raise ValueError("graph codes need at most 62 dyads")
    chain = _Chain(g0, model)
    return chain.run(
        theta, cfg.aux_iters, n_samples, thin, cfg.proposal_code, rng_from(cfg.seed), record_codes=True
    )
