"""Compiled Metropolis updates for latent space models.

Metric codes: 0 = ED, 1 = SED, 2 = bilinear (d_ij = -z_i'z_j).
For directed graphs both (i, j) and (j, i) enter with the same linear
predictor, since every supported metric is symmetric.
"""

import numpy as np
from numba import njit

METRIC_CODES = {"ed": 0, "sed": 1, "bilinear": 2}


@njit(cache=True, inline="always")
def _log1pexp(x):
    if x > 0:
        return x + np.log1p(np.exp(-x))
    return np.log1p(np.exp(x))


@njit(cache=True)
def _dist(zi, zj, metric):
    if metric == 2:
        s = 0.0
        for k in range(zi.shape[0]):
            s += zi[k] * zj[k]
        return -s
    s = 0.0
    for k in range(zi.shape[0]):
        t = zi[k] - zj[k]
        s += t * t
    if metric == 0:
        return np.sqrt(s)
    return s


@njit(cache=True)
def full_loglik(A, directed, Z, alpha, metric):
    n = A.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            eta = alpha - _dist(Z[i], Z[j], metric)
            if directed:
                total += (A[i, j] + A[j, i]) * eta - 2.0 * _log1pexp(eta)
            else:
                total += A[i, j] * eta - _log1pexp(eta)
    return total


@njit(cache=True)
def init_cache(Z, alpha, metric, eta, soft):
    """Fill eta[i, j] = alpha - d_ij and soft[i, j] = log(1 + exp(eta[i, j]))."""
    n = Z.shape[0]
    for i in range(n):
        eta[i, i] = 0.0
        soft[i, i] = 0.0
        for j in range(i + 1, n):
            e = alpha - _dist(Z[i], Z[j], metric)
            eta[i, j] = e
            eta[j, i] = e
            sp = _log1pexp(e)
            soft[i, j] = sp
            soft[j, i] = sp


@njit(cache=True)
def sweep_positions(A, directed, Z, alpha, metric, prior_mean, prior_var, sd, rng, use_lik, eta, soft):
    """Random-walk update of every z_i in turn; returns the acceptance count.

    ``eta``/``soft`` must describe the current state (see :func:`init_cache`)
    and are kept in sync.
    """
    n, d = Z.shape
    accepted = 0
    prop = np.empty(d)
    new_eta = np.empty(n)
    new_soft = np.empty(n)
    mult = 2.0 if directed else 1.0
    for i in range(n):
        for k in range(d):
            prop[k] = Z[i, k] + sd * rng.normal()
        log_r = 0.0
        v = prior_var[i]
        for k in range(d):
            a = prop[k] - prior_mean[i, k]
            b = Z[i, k] - prior_mean[i, k]
            log_r -= (a * a - b * b) / (2.0 * v)
        if use_lik:
            for j in range(n):
                if j == i:
                    continue
                e = alpha - _dist(prop, Z[j], metric)
                sp = _log1pexp(e)
                new_eta[j] = e
                new_soft[j] = sp
                y = A[i, j] + A[j, i] if directed else A[i, j]
                log_r += y * (e - eta[i, j]) - mult * (sp - soft[i, j])
        if log_r >= 0.0 or np.log(rng.random()) < log_r:
            for k in range(d):
                Z[i, k] = prop[k]
            if use_lik:
                for j in range(n):
                    if j != i:
                        eta[i, j] = new_eta[j]
                        eta[j, i] = new_eta[j]
                        soft[i, j] = new_soft[j]
                        soft[j, i] = new_soft[j]
            accepted += 1
    if not use_lik:
        init_cache(Z, alpha, metric, eta, soft)
    return accepted


@njit(cache=True)
def update_alpha(A, directed, Z, alpha, metric, a_mean, a_var, sd, rng, use_lik, eta, soft):
    """Random-walk update of the intercept; returns (alpha, accepted)."""
    n = Z.shape[0]
    prop = alpha + sd * rng.normal()
    shift = prop - alpha
    log_r = -((prop - a_mean) ** 2 - (alpha - a_mean) ** 2) / (2.0 * a_var)
    mult = 2.0 if directed else 1.0
    if use_lik:
        for i in range(n):
            for j in range(i + 1, n):
                y = A[i, j] + A[j, i] if directed else A[i, j]
                log_r += y * shift - mult * (_log1pexp(eta[i, j] + shift) - soft[i, j])
    if log_r >= 0.0 or np.log(rng.random()) < log_r:
        for i in range(n):
            for j in range(i + 1, n):
                e = eta[i, j] + shift
                sp = _log1pexp(e)
                eta[i, j] = e
                eta[j, i] = e
                soft[i, j] = sp
                soft[j, i] = sp
        return prop, True
    return alpha, False
