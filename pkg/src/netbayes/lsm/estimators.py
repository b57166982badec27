"""Scikit-learn style wrappers around the latent space samplers."""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .likelihood import LatentConfig, check_metric, distances, edge_prob, loglik
from .lpcm import fit_lpcm_mcmc
from .mcmc import fit_lsm_mcmc
from .prior import LsmPrior
from .vb import fit_lsm_vb
from ..validation import check_graph


class LatentSpaceModel(BaseEstimator):
    """Latent space model fitted by MCMC or variational Bayes.

    ``fit`` accepts a :class:`~netbayes.graph.Graph` or a square 0/1
    array. ``method="vb"`` forces the squared-Euclidean metric.

    Attributes
    ----------
    positions_ : (n, d) posterior mean (MCMC) or variational mean of Z.
    alpha_ : posterior mean of the intercept.
    result_ : LsmDraws or VariationalState.
    """

    def __init__(self, d=2, method="mcmc", metric="ed", prior=None, iters=50000, burn_in=10000, thin=10,
                 proposal_sds=(0.2, 0.1), max_iters=500, tol=1e-6, n_starts=1, random_z=False,
                 init="fruchterman_reingold", random_state=None):
        self.d = d
        self.method = method
        self.metric = metric
        self.prior = prior
        self.iters = iters
        self.burn_in = burn_in
        self.thin = thin
        self.proposal_sds = proposal_sds
        self.max_iters = max_iters
        self.tol = tol
        self.n_starts = n_starts
        self.random_z = random_z
        self.init = init
        self.random_state = random_state

    def fit(self, y, yy=None):
        g = check_graph(y)
        prior = LsmPrior() if self.prior is None else self.prior
        if self.method == "mcmc":
            res = fit_lsm_mcmc(g, self.d, self.metric, prior, self.iters, self.burn_in, self.proposal_sds,
                               self.random_state, self.thin, self.init)
            self.metric_ = res.metric
            self.positions_ = res.mean_positions()
            self.alpha_ = res.mean_alpha()
        elif self.method == "vb":
            if check_metric(self.metric) != "sed":
                raise ValueError("variational fitting supports the 'sed' metric only")
            res = fit_lsm_vb(g, self.d, prior, self.max_iters, self.tol, self.n_starts, self.random_z,
                             self.random_state)
            self.metric_ = "sed"
            self.positions_ = res.Zmean
            self.alpha_ = float(res.xi)
        else:
            raise ValueError(f"method must be 'mcmc' or 'vb', got {self.method!r}")
        self.result_ = res
        self.graph_ = g
        return self

    def predict_proba(self, y=None):
        """n x n matrix of edge probabilities at the point estimates."""
        check_is_fitted(self, "positions_")
        P = edge_prob(self.alpha_, distances(self.positions_, self.metric_))
        np.fill_diagonal(P, 0.0)
        return P

    def score(self, y=None, yy=None):
        """Log-likelihood of ``y`` (default: the training graph) at the point estimates."""
        check_is_fitted(self, "positions_")
        g = self.graph_ if y is None else check_graph(y, directed=self.graph_.directed)
        return loglik(g, LatentConfig(self.positions_, self.alpha_), self.metric_)


class LatentPositionClusterModel(ClusterMixin, BaseEstimator):
    """Latent position cluster model fitted by MCMC.

    ``labels_`` is the per-node majority vote over relabelled draws.
    """

    def __init__(self, n_clusters=2, d=2, prior=None, iters=50000, burn_in=10000, thin=10,
                 proposal_sds=(0.2, 0.1), init="fruchterman_reingold", random_state=None):
        self.n_clusters = n_clusters
        self.d = d
        self.prior = prior
        self.iters = iters
        self.burn_in = burn_in
        self.thin = thin
        self.proposal_sds = proposal_sds
        self.init = init
        self.random_state = random_state

    def fit(self, y, yy=None):
        g = check_graph(y)
        prior = LsmPrior() if self.prior is None else self.prior
        res = fit_lpcm_mcmc(g, self.d, self.n_clusters, prior, self.iters, self.burn_in, self.proposal_sds,
                            self.random_state, self.thin, self.init)
        self.result_ = res
        self.graph_ = g
        self.positions_ = res.mean_positions()
        self.alpha_ = res.mean_alpha()
        self.labels_ = res.modal_labels()
        self.membership_ = res.membership_probabilities()
        return self
