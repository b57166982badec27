"""Posterior-predictive goodness of fit for ERGM and latent space fits.

Three statistic families are compared between the observed graph and graphs
simulated at posterior draws: degree counts, edgewise shared partner counts
and geodesic distance counts. Each family is truncated at a limit with one
overflow bin; geodesics additionally keep unreachable pairs in their own
``inf`` bin.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .ergm import PosteriorDraws
from .graph import Graph
from .lsm.likelihood import LatentConfig, check_metric, distances, edge_prob
from .lsm.mcmc import LsmDraws
from .lsm.vb import VariationalState
from .netstats import ModelSpec, _geodesics, esp_counts
from .simulate import SimConfig, simulate_ergm
from .validation import check_positive_int, stream

__all__ = [
    "FAMILIES", "GofConfig", "GofFamily", "GofSummary", "gof_ergm", "gof_lsm", "gof_vectors",
    "emit_gof", "read_gof_csv",
]

FAMILIES = ("degree", "esp", "dist")
QUANTILES = ("min", "q25", "median", "q75", "max")
COVERAGE_THRESHOLD = 0.8


@dataclass
class GofConfig:
    n_sim: int = 100
    aux_iters: int = 10000
    n_deg: int = 20
    n_esp: int = 15
    n_dist: int = 15
    seed: int | None = None
    n_jobs: int | None = None

    def __post_init__(self):
        for name in ("n_sim", "aux_iters", "n_deg", "n_esp", "n_dist"):
            setattr(self, name, check_positive_int(getattr(self, name), name))


def _bin_labels(cfg):
    return {
        "degree": [str(k) for k in range(cfg.n_deg)] + [f">={cfg.n_deg}"],
        "esp": [str(k) for k in range(cfg.n_esp)] + [f">={cfg.n_esp}"],
        "dist": [str(k) for k in range(1, cfg.n_dist)] + [f">={cfg.n_dist}", "inf"],
    }


def _truncate(counts, limit):
    out = np.zeros(limit + 1)
    head = counts[:limit]
    out[: head.size] = head
    out[limit] = counts[limit:].sum()
    return out


def gof_vectors(g, cfg):
    """Truncated degree, esp and geodesic count vectors of one graph.

    For directed graphs degrees are out-degrees and shared partners are
    counted on the undirected skeleton.
    """
    deg = _truncate(np.bincount(g.degree(), minlength=1), cfg.n_deg)
    skel = g if not g.directed else Graph(np.maximum(g.adjacency, g.adjacency.T))
    esp = _truncate(esp_counts(skel) if g.n > 1 else np.zeros(1), cfg.n_esp)
    dist = _geodesics(g)
    vals = dist[~np.eye(g.n, dtype=bool)] if g.directed else dist[np.triu_indices(g.n, 1)]
    finite = np.isfinite(vals)
    dcounts = np.bincount(vals[finite].astype(np.int64), minlength=1)
    geo = np.zeros(cfg.n_dist + 1)
    geo[: cfg.n_dist] = _truncate(dcounts, cfg.n_dist)[1:]
    geo[cfg.n_dist] = np.sum(~finite)
    return {"degree": deg, "esp": esp, "dist": geo}


@dataclass
class GofFamily:
    name: str
    bins: list
    observed: np.ndarray
    simulated: np.ndarray

    def quantiles(self):
        """(5, bins) array of min, q25, median, q75, max over simulations."""
        return np.quantile(self.simulated, [0.0, 0.25, 0.5, 0.75, 1.0], axis=0)

    def coverage(self):
        """(covered, eligible) bins with nonzero observed count inside [min, max]."""
        q = self.quantiles()
        mask = self.observed > 0
        inside = (self.observed >= q[0]) & (self.observed <= q[4])
        return int(np.sum(inside & mask)), int(np.sum(mask))


@dataclass
class GofSummary:
    degree: GofFamily
    esp: GofFamily
    dist: GofFamily
    meta: dict = field(default_factory=dict)

    def families(self):
        return [self.degree, self.esp, self.dist]

    def coverage(self):
        """Fraction of nonzero-observed bins, over all families, inside the envelope."""
        hit = tot = 0
        for fam in self.families():
            h, t = fam.coverage()
            hit, tot = hit + h, tot + t
        return hit / tot if tot else 1.0

    def report(self, threshold=COVERAGE_THRESHOLD):
        out = {f.name: dict(zip(("covered", "eligible"), f.coverage())) for f in self.families()}
        cov = self.coverage()
        out["overall"] = {"coverage": cov, "threshold": threshold, "agrees": bool(cov >= threshold)}
        return out


def _assemble(y, sims, cfg, meta):
    labels = _bin_labels(cfg)
    obs = gof_vectors(y, cfg)
    fams = {
        name: GofFamily(name, labels[name], obs[name], np.array([s[name] for s in sims]))
        for name in FAMILIES
    }
    return GofSummary(**fams, meta=meta)


def _pick(n_avail, n_sim, rng):
    return rng.choice(n_avail, size=n_sim, replace=n_sim > n_avail)


def _ergm_one(theta, y, model, cfg, k):
    g, _ = simulate_ergm(theta, model, SimConfig(cfg.aux_iters, seed=stream(cfg.seed, k), start=y))
    return gof_vectors(g, cfg)


def gof_ergm(d, y, model=None, cfg=None):
    """GoF summary from ``cfg.n_sim`` graphs simulated at pooled posterior draws.

    Draws are picked without replacement (with replacement when ``n_sim``
    exceeds the number of draws); each simulation starts from ``y``.
    """
    cfg = GofConfig() if cfg is None else cfg
    if isinstance(d, PosteriorDraws):
        model = d.model if model is None else model
        pool = d.pooled()
    else:
        pool = np.atleast_2d(np.asarray(d, dtype=float))
    if model is None:
        raise ValueError("a model is needed when draws are given as an array")
    if not isinstance(model, ModelSpec):
        model = ModelSpec.from_config(model)
    if pool.size == 0:
        raise ValueError("no posterior draws")
    idx = _pick(pool.shape[0], cfg.n_sim, stream(cfg.seed, cfg.n_sim))
    sims = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_ergm_one)(pool[i], y, model, cfg, k) for k, i in enumerate(idx)
    )
    return _assemble(y, sims, cfg, {"source": "ergm", "draws": idx.tolist()})


def _bernoulli_graph(Z, alpha, metric, directed, rng):
    n = Z.shape[0]
    P = edge_prob(alpha, distances(Z, metric))
    U = rng.random((n, n))
    if directed:
        A = (U < P).astype(np.uint8)
    else:
        A = np.triu(U < P, 1).astype(np.uint8)
        A = A + A.T
    np.fill_diagonal(A, 0)
    return Graph(A, directed=directed)


def _lsm_one(Z, alpha, metric, y, cfg, k):
    return gof_vectors(_bernoulli_graph(Z, alpha, metric, y.directed, stream(cfg.seed, k)), cfg)


def gof_lsm(source, y, metric=None, cfg=None):
    """GoF summary for a latent space fit.

    ``source`` is an :class:`LsmDraws` (draws picked as in :func:`gof_ergm`),
    a :class:`VariationalState` (one (Z, alpha) drawn from the variational
    factors per simulation), or a :class:`LatentConfig` point mass. Each
    parameter draw yields one graph of independent Bernoulli dyads.
    """
    cfg = GofConfig() if cfg is None else cfg
    pick_rng = stream(cfg.seed, cfg.n_sim)
    if isinstance(source, LsmDraws):
        metric = source.metric if metric is None else check_metric(metric)
        if source.n_draws == 0:
            raise ValueError("no posterior draws")
        idx = _pick(source.n_draws, cfg.n_sim, pick_rng)
        params = [(source.Z[i], source.alpha[i]) for i in idx]
    elif isinstance(source, VariationalState):
        metric = "sed" if metric is None else check_metric(metric)
        if metric != "sed":
            raise ValueError("variational fits use the 'sed' metric")
        params = [source.sample(pick_rng) for _ in range(cfg.n_sim)]
    elif isinstance(source, LatentConfig):
        metric = "ed" if metric is None else check_metric(metric)
        params = [(source.Z, source.alpha)] * cfg.n_sim
    else:
        raise TypeError("source must be LsmDraws, VariationalState or LatentConfig")
    if metric == "bilinear" and not y.directed:
        raise ValueError("the bilinear metric is intended for directed graphs")
    if params[0][0].shape[0] != y.n:
        raise ValueError("latent positions do not match the graph size")
    sims = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_lsm_one)(Z, a, metric, y, cfg, k) for k, (Z, a) in enumerate(params)
    )
    return _assemble(y, sims, cfg, {"source": "lsm", "metric": metric})


_CSV_NAMES = {"degree": "gof_degree.csv", "esp": "gof_esp.csv", "dist": "gof_dist.csv"}
_HEADER = ["bin", "observed", *QUANTILES]


def emit_gof(s, out_dir, plots=True):
    """Write one CSV per family (and SVG boxplots when ``plots``); returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for fam in s.families():
        path = os.path.join(out_dir, _CSV_NAMES[fam.name])
        q = fam.quantiles()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_HEADER)
            for b, label in enumerate(fam.bins):
                w.writerow([label, repr(float(fam.observed[b]))] + [repr(float(v)) for v in q[:, b]])
        paths.append(path)
    if plots:
        from .plotting import gof_panel

        for fam in s.families():
            path = os.path.join(out_dir, f"gof_{fam.name}.svg")
            gof_panel(fam, path)
            paths.append(path)
    return paths


def read_gof_csv(path):
    """(bins, observed, quantiles (5, bins)) from a file written by :func:`emit_gof`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != _HEADER:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    bins = [r[0] for r in rows[1:]]
    vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return bins, vals[:, 0], vals[:, 1:].T
