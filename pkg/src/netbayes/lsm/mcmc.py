"""Metropolis-within-Gibbs sampling for latent space models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .init import initial_positions
from .likelihood import check_metric, distances, edge_prob
from .prior import LsmPrior
from .procrustes import procrustes_rotate
from ..validation import rng_from

__all__ = ["LsmDraws", "fit_lsm_mcmc", "initial_alpha"]

_ADAPT_EVERY = 100
_TARGET_ACCEPT = 0.25
# recompute cached predictors to stop accumulated alpha shifts drifting
_REFRESH_EVERY = 1000


@dataclass
class LsmDraws:
    """Kept draws: Z (k, n, d) Procrustes-aligned to draw ``reference``."""

    Z: np.ndarray
    alpha: np.ndarray
    loglik: np.ndarray
    metric: str
    reference: int
    accept_z: float
    accept_alpha: float
    proposal_sds: tuple

    @property
    def n_draws(self):
        return self.alpha.size

    def mean_positions(self):
        return self.Z.mean(axis=0)

    def mean_alpha(self):
        return float(self.alpha.mean())

    def edge_probabilities(self):
        """Posterior mean of P(y_ij = 1)."""
        total = np.zeros(self.Z.shape[1:2] * 2)
        for Z, a in zip(self.Z, self.alpha):
            total += edge_prob(a, distances(Z, self.metric))
        P = total / self.n_draws
        np.fill_diagonal(P, 0.0)
        return P


def initial_alpha(y, Z, metric):
    """Intercept matching the observed density at the starting positions."""
    dens = min(max(y.density(), 1e-3), 1 - 1e-3)
    iu = np.triu_indices(y.n, 1)
    return float(np.log(dens / (1 - dens)) + distances(Z, metric)[iu].mean())


def _adapt(sd, rate):
    return float(np.clip(sd * np.exp(2.0 * (rate - _TARGET_ACCEPT)), 1e-4, 10.0))


def _align(Z, alpha, loglik, metric):
    ref = int(np.argmax(loglik))
    if metric != "bilinear":
        Z = np.array([procrustes_rotate(z, Z[ref]) for z in Z])
    else:
        # no translation invariance for inner products: rotate only
        aligned = []
        for z in Z:
            u, _, vt = np.linalg.svd(z.T @ Z[ref])
            aligned.append(z @ (u @ vt))
        Z = np.array(aligned)
    return Z, ref


def _run_sampler(A, directed, Z, alpha, metric, prior_mean_fn, prior, iters, burn_in, thin,
                 sd_z, sd_a, rng, use_lik, extra_step=None, adapt=True):
    """Shared driver for the plain and clustered samplers.

    ``prior_mean_fn()`` returns the current per-node prior means/variances;
    ``extra_step(Z, keep)`` runs the cluster Gibbs updates and records them.
    """
    mcode = _kernels.METRIC_CODES[metric]
    n, d = Z.shape
    kept = (iters - burn_in) // thin
    Zs = np.empty((kept, n, d))
    alphas = np.empty(kept)
    lls = np.empty(kept)
    win_z = win_a = 0
    post_z = post_a = 0
    rec = 0
    eta = np.empty((n, n))
    soft = np.empty((n, n))
    _kernels.init_cache(Z, alpha, mcode, eta, soft)
    for t in range(iters):
        if t % _REFRESH_EVERY == 0:
            _kernels.init_cache(Z, alpha, mcode, eta, soft)
        mean, var = prior_mean_fn()
        k = _kernels.sweep_positions(
            A, directed, Z, alpha, mcode, mean, var, sd_z, rng, use_lik, eta, soft
        )
        alpha, ok = _kernels.update_alpha(
            A, directed, Z, alpha, mcode, prior.alpha_mean, prior.alpha_var, sd_a, rng, use_lik,
            eta, soft,
        )
        win_z += k
        win_a += ok
        if t >= burn_in:
            post_z += k
            post_a += ok
        keep = t >= burn_in and (t - burn_in + 1) % thin == 0 and rec < kept
        if extra_step is not None:
            extra_step(Z, rec if keep else -1)
        if keep:
            Zs[rec] = Z
            alphas[rec] = alpha
            lls[rec] = _kernels.full_loglik(A, directed, Z, alpha, mcode)
            rec += 1
        if adapt and t < burn_in and (t + 1) % _ADAPT_EVERY == 0:
            sd_z = _adapt(sd_z, win_z / (_ADAPT_EVERY * n))
            sd_a = _adapt(sd_a, win_a / _ADAPT_EVERY)
            win_z = win_a = 0
    n_post = max(iters - burn_in, 1)
    return Zs, alphas, lls, post_z / (n_post * n), post_a / n_post, (sd_z, sd_a), alpha


def _check_run(iters, burn_in, thin, proposal_sds):
    if not iters > burn_in >= 0:
        raise ValueError("need iters > burn_in >= 0")
    if thin < 1:
        raise ValueError("thin must be >= 1")
    if (iters - burn_in) // thin < 1:
        raise ValueError("no draws would be kept; lower thin or burn_in")
    sd_z, sd_a = proposal_sds
    if not (sd_z > 0 and sd_a > 0):
        raise ValueError("proposal sds must be > 0")
    return float(sd_z), float(sd_a)


def fit_lsm_mcmc(y, d=2, metric="ed", prior=None, iters=50000, burn_in=10000, proposal_sds=(0.2, 0.1),
                 seed=None, thin=10, init="fruchterman_reingold", adapt=True, use_likelihood=True):
    """Posterior draws of (Z, alpha) for a latent space model.

    Each iteration updates every z_i by a Gaussian random walk, then alpha.
    Proposal sds are tuned toward 25% acceptance during burn-in when
    ``adapt`` is set, then frozen. ``use_likelihood=False`` samples the
    prior, for diagnostics.
    """
    metric = check_metric(metric)
    if metric == "bilinear" and not y.directed:
        raise ValueError("the bilinear metric is intended for directed graphs")
    prior = LsmPrior() if prior is None else prior
    sd_z, sd_a = _check_run(iters, burn_in, thin, proposal_sds)
    rng = rng_from(seed)
    Z = initial_positions(y, d, init, seed=rng)
    alpha = initial_alpha(y, Z, metric)
    A = np.ascontiguousarray(y.adjacency, dtype=np.float64)
    mean = np.zeros((y.n, d))
    var = np.full(y.n, prior.z_var)
    Zs, alphas, lls, acc_z, acc_a, sds, _ = _run_sampler(
        A, y.directed, Z, alpha, metric, lambda: (mean, var), prior, iters, burn_in, thin,
        sd_z, sd_a, rng, use_likelihood, adapt=adapt,
    )
    Zs, ref = _align(Zs, alphas, lls, metric)
    return LsmDraws(Z=Zs, alpha=alphas, loglik=lls, metric=metric, reference=ref,
                    accept_z=acc_z, accept_alpha=acc_a, proposal_sds=sds)
