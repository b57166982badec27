"""Latent position cluster model: Gaussian mixture prior on the positions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp
from sklearn.cluster import KMeans

from .init import initial_positions
from .mcmc import LsmDraws, _check_run, _run_sampler, fit_lsm_mcmc, initial_alpha
from .prior import LsmPrior
from .procrustes import procrustes_fit
from ..validation import rng_from

__all__ = ["LpcmDraws", "fit_lpcm_mcmc", "relabel"]


@dataclass
class LpcmDraws(LsmDraws):
    """Position draws plus per-draw labels (0-based) and component parameters."""

    labels: np.ndarray = None
    mu: np.ndarray = None
    sigma2: np.ndarray = None
    weights: np.ndarray = None

    @property
    def n_clusters(self):
        return self.weights.shape[1]

    def modal_labels(self):
        """Majority vote over draws for each node."""
        counts = np.apply_along_axis(np.bincount, 0, self.labels, minlength=self.n_clusters)
        return counts.argmax(axis=0)

    def membership_probabilities(self):
        """n x G matrix of posterior label frequencies."""
        onehot = self.labels[:, :, None] == np.arange(self.n_clusters)
        return onehot.mean(axis=0)


def relabel(labels, reference, G):
    """Permutation of 0..G-1 mapping ``labels`` onto ``reference`` with most agreement."""
    overlap = np.zeros((G, G))
    np.add.at(overlap, (labels, reference), 1)
    rows, cols = linear_sum_assignment(-overlap)
    perm = np.empty(G, dtype=int)
    perm[rows] = cols
    return perm


class _MixtureGibbs:
    """Conjugate updates of labels, component means/variances and weights."""

    def __init__(self, Z, G, prior, rng, kept):
        n, d = Z.shape
        self.G, self.prior, self.rng = G, prior, rng
        km = KMeans(n_clusters=G, n_init=10, random_state=int(rng.integers(0, 2**31 - 1))).fit(Z)
        self.labels = km.labels_.astype(np.int64)
        self.mu = km.cluster_centers_.copy()
        self.sigma2 = np.full(G, max(float(np.mean((Z - self.mu[self.labels]) ** 2)), 1e-2))
        self.weights = np.bincount(self.labels, minlength=G) / n
        self.rec_labels = np.empty((kept, n), dtype=np.int64)
        self.rec_mu = np.empty((kept, G, d))
        self.rec_sigma2 = np.empty((kept, G))
        self.rec_weights = np.empty((kept, G))

    def prior_moments(self):
        return np.ascontiguousarray(self.mu[self.labels]), np.ascontiguousarray(self.sigma2[self.labels])

    def __call__(self, Z, rec):
        rng, p, G = self.rng, self.prior, self.G
        n, d = Z.shape
        sq = ((Z[:, None, :] - self.mu[None]) ** 2).sum(axis=2)
        logr = np.log(self.weights) - 0.5 * d * np.log(self.sigma2) - sq / (2 * self.sigma2)
        prob = np.exp(logr - logsumexp(logr, axis=1, keepdims=True))
        u = rng.random(n)[:, None]
        self.labels = np.minimum((np.cumsum(prob, axis=1) < u).sum(axis=1), G - 1)
        counts = np.bincount(self.labels, minlength=G)
        for g in range(G):
            zg = Z[self.labels == g]
            prec = counts[g] / self.sigma2[g] + 1.0 / p.mu_var
            mean = zg.sum(axis=0) / self.sigma2[g] / prec
            self.mu[g] = mean + rng.normal(size=d) / np.sqrt(prec)
            ss = float(((zg - self.mu[g]) ** 2).sum())
            shape = p.sigma2_shape + 0.5 * counts[g] * d
            self.sigma2[g] = (p.sigma2_scale + 0.5 * ss) / rng.gamma(shape)
        self.weights = np.maximum(rng.dirichlet(p.dirichlet + counts), 1e-300)
        if rec >= 0:
            self.rec_labels[rec] = self.labels
            self.rec_mu[rec] = self.mu
            self.rec_sigma2[rec] = self.sigma2
            self.rec_weights[rec] = self.weights


def fit_lpcm_mcmc(y, d=2, G=2, prior=None, iters=50000, burn_in=10000, proposal_sds=(0.2, 0.1), seed=None,
                  thin=10, init="fruchterman_reingold", adapt=True):
    """Posterior draws for the Euclidean latent position cluster model.

    Each iteration runs the position and intercept updates of
    :func:`fit_lsm_mcmc` with z_i ~ N(mu_{K_i}, sigma2_{K_i} I) as prior,
    then Gibbs updates of labels, component parameters and weights. Kept
    draws are relabelled and Procrustes-aligned to the highest-likelihood
    draw. With ``G == 1`` the plain sampler is run.
    """
    if not isinstance(G, (int, np.integer)) or G < 1:
        raise ValueError("G must be an integer >= 1")
    if G > y.n:
        raise ValueError(f"G = {G} exceeds the number of nodes ({y.n})")
    prior = LsmPrior() if prior is None else prior
    if G == 1:
        base = fit_lsm_mcmc(y, d, "ed", prior, iters, burn_in, proposal_sds, seed, thin, init, adapt)
        k = base.n_draws
        centre = base.Z.mean(axis=1)
        spread = ((base.Z - centre[:, None]) ** 2).mean(axis=(1, 2))
        return LpcmDraws(**vars(base), labels=np.zeros((k, y.n), dtype=np.int64),
                         mu=centre[:, None, :], sigma2=spread[:, None], weights=np.ones((k, 1)))
    sd_z, sd_a = _check_run(iters, burn_in, thin, proposal_sds)
    rng = rng_from(seed)
    Z = initial_positions(y, d, init, seed=rng)
    alpha = initial_alpha(y, Z, "ed")
    A = np.ascontiguousarray(y.adjacency, dtype=np.float64)
    kept = (iters - burn_in) // thin
    gibbs = _MixtureGibbs(Z, G, prior, rng, kept)
    Zs, alphas, lls, acc_z, acc_a, sds, _ = _run_sampler(
        A, y.directed, Z, alpha, "ed", gibbs.prior_moments, prior, iters, burn_in, thin,
        sd_z, sd_a, rng, True, extra_step=gibbs, adapt=adapt,
    )
    ref = int(np.argmax(lls))
    Z_ref = Zs[ref].copy()
    labels, mu = gibbs.rec_labels, gibbs.rec_mu
    ref_labels = labels[ref].copy()
    sigma2, weights = gibbs.rec_sigma2, gibbs.rec_weights
    for t in range(kept):
        perm = relabel(labels[t], ref_labels, G)
        inv = np.argsort(perm)
        labels[t] = perm[labels[t]]
        mu[t], sigma2[t], weights[t] = mu[t][inv], sigma2[t][inv], weights[t][inv]
        R, shift = procrustes_fit(Zs[t], Z_ref)
        Zs[t] = Zs[t] @ R + shift
        mu[t] = mu[t] @ R + shift
    return LpcmDraws(Z=Zs, alpha=alphas, loglik=lls, metric="ed", reference=ref, accept_z=acc_z,
                     accept_alpha=acc_a, proposal_sds=sds, labels=labels, mu=mu, sigma2=sigma2,
                     weights=weights)
