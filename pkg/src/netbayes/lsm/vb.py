"""Variational Bayes for the squared-Euclidean latent space model.

The variational family is q(alpha) = N(xi, psi2) times q(z_i) = N(zbar_i, S)
with one diagonal S shared by all nodes. Every expectation in the bound is
closed form under SED except E[log(1 + exp(alpha - d_ij))], which is bounded
above by log(1 + E[exp(alpha)] E[exp(-d_ij)]) (Jensen), so the objective is
a lower bound on the usual ELBO and hence on log p(y). The quantities used:

    E[d_ij]         = |zbar_i - zbar_j|^2 + 2 tr(S)
    E[exp(-d_ij)]   = prod_k (1 + 4 s_k)^(-1/2) exp(-(zbar_ik - zbar_jk)^2 / (1 + 4 s_k))
    E[exp(alpha)]   = exp(xi + psi2 / 2)

The bound is maximised by block coordinate ascent over (xi, psi2), the
means, and S, followed by a joint polishing step per sweep; each step is an
L-BFGS solve that is kept only if it raises the bound, so the recorded
trace is non-decreasing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize
from sklearn.exceptions import ConvergenceWarning

from .init import initial_positions
from .mcmc import initial_alpha
from .prior import LsmPrior
from ..validation import stream

__all__ = ["VariationalState", "elbo", "fit_lsm_vb"]

_LOG2PI = np.log(2 * np.pi)


@dataclass
class VariationalState:
    xi: float
    psi2: float
    Zmean: np.ndarray
    Sigma: np.ndarray
    elbo_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    converged: bool = False
    n_iter: int = 0
    start_elbos: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.Zmean = np.atleast_2d(np.asarray(self.Zmean, dtype=float))
        self.Sigma = np.atleast_2d(np.asarray(self.Sigma, dtype=float))
        if not self.psi2 > 0:
            raise ValueError("psi2 must be > 0")
        if np.any(np.linalg.eigvalsh(self.Sigma) <= 0):
            raise ValueError("Sigma must be positive definite")

    @property
    def s(self):
        return np.diag(self.Sigma).copy()

    @property
    def elbo(self):
        return float(self.elbo_trace[-1]) if self.elbo_trace.size else float("nan")

    def sample(self, rng):
        """One joint draw (Z, alpha) from the variational factors."""
        alpha = rng.normal(self.xi, np.sqrt(self.psi2))
        Z = self.Zmean + rng.normal(size=self.Zmean.shape) * np.sqrt(self.s)
        return Z, alpha

    def to_dict(self):
        return {
            "xi": float(self.xi),
            "psi2": float(self.psi2),
            "Sigma": self.Sigma.tolist(),
            "elbo": self.elbo,
            "converged": bool(self.converged),
            "n_iter": int(self.n_iter),
            "start_elbos": [float(v) for v in self.start_elbos],
        }


class _Bound:
    """Evaluates the bound and its block gradients for one graph."""

    def __init__(self, y, prior):
        A = np.asarray(y.adjacency, dtype=float)
        self.Y = A + A.T if y.directed else A
        self.trials = 2.0 if y.directed else 1.0
        self.n = y.n
        self.offdiag = ~np.eye(y.n, dtype=bool)
        self.prior = prior

    def _pair_terms(self, xi, psi2, Z, s):
        denom = 1.0 + 4.0 * s
        diff = Z[:, None, :] - Z[None, :, :]
        mu2 = diff**2
        log_e_neg_d = -0.5 * np.sum(np.log(denom)) - np.sum(mu2 / denom, axis=2)
        log_a = xi + 0.5 * psi2 + log_e_neg_d
        ed = mu2.sum(axis=2) + 2.0 * s.sum()
        return diff, mu2, denom, log_a, ed

    def value(self, xi, psi2, Z, s):
        p = self.prior
        n, d = Z.shape
        _, _, _, log_a, ed = self._pair_terms(xi, psi2, Z, s)
        pair = self.Y * (xi - ed) - self.trials * np.logaddexp(0.0, log_a)
        lik = 0.5 * np.sum(pair[self.offdiag])
        prior_alpha = -0.5 * np.log(2 * np.pi * p.alpha_var) - ((xi - p.alpha_mean) ** 2 + psi2) / (2 * p.alpha_var)
        prior_z = -0.5 * n * d * np.log(2 * np.pi * p.z_var) - (np.sum(Z**2) + n * s.sum()) / (2 * p.z_var)
        ent = 0.5 * (np.log(psi2) + 1 + _LOG2PI) + 0.5 * n * np.sum(np.log(s) + 1 + _LOG2PI)
        return float(lik + prior_alpha + prior_z + ent)

    def grads(self, xi, psi2, Z, s):
        """Gradients with respect to xi, psi2, Z and s."""
        p = self.prior
        n, d = Z.shape
        diff, mu2, denom, log_a, _ = self._pair_terms(xi, psi2, Z, s)
        r = self.trials * np.exp(log_a - np.logaddexp(0.0, log_a))
        np.fill_diagonal(r, 0.0)
        Y = self.Y
        g_xi = 0.5 * np.sum((Y - r)[self.offdiag]) - (xi - p.alpha_mean) / p.alpha_var
        g_psi2 = -0.25 * np.sum(r[self.offdiag]) - 1 / (2 * p.alpha_var) + 1 / (2 * psi2)
        coef = -2.0 * Y[:, :, None] + 2.0 * r[:, :, None] / denom
        g_Z = np.sum(coef * diff, axis=1) - Z / p.z_var
        ds = -2.0 * Y[:, :, None] - r[:, :, None] * (-2.0 / denom + 4.0 * mu2 / denom**2)
        g_s = 0.5 * ds[self.offdiag].sum(axis=0) - n / (2 * p.z_var) + n / (2 * s)
        return g_xi, g_psi2, g_Z, g_s


def elbo(y, state, prior=None):
    """Value of the variational bound at ``state``."""
    prior = LsmPrior() if prior is None else prior
    return _Bound(y, prior).value(state.xi, state.psi2, state.Zmean, state.s)


def _block_step(f, x0, current, maxiter):
    res = minimize(f, x0, jac=True, method="L-BFGS-B", options={"maxiter": maxiter})
    new = -float(res.fun)
    if np.isfinite(new) and new > current and np.all(np.isfinite(res.x)):
        return res.x, new
    return x0, current


def _ascend(bound, xi, psi2, Z, s, max_iters, tol, inner_iters):
    n, d = Z.shape
    current = bound.value(xi, psi2, Z, s)
    trace = [current]
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        start = current

        def f_alpha(x):
            ps = np.exp(x[1])
            v = bound.value(x[0], ps, Z, s)
            g_xi, g_ps, _, _ = bound.grads(x[0], ps, Z, s)
            return -v, -np.array([g_xi, g_ps * ps])

        x, current = _block_step(f_alpha, np.array([xi, np.log(psi2)]), current, inner_iters)
        xi, psi2 = float(x[0]), float(np.exp(x[1]))

        def f_z(x):
            Zx = x.reshape(n, d)
            v = bound.value(xi, psi2, Zx, s)
            _, _, g_Z, _ = bound.grads(xi, psi2, Zx, s)
            return -v, -g_Z.ravel()

        x, current = _block_step(f_z, Z.ravel(), current, inner_iters)
        Z = x.reshape(n, d)

        def f_s(x):
            sx = np.exp(x)
            v = bound.value(xi, psi2, Z, sx)
            _, _, _, g_s = bound.grads(xi, psi2, Z, sx)
            return -v, -(g_s * sx)

        x, current = _block_step(f_s, np.log(s), current, inner_iters)
        s = np.exp(x)

        def f_joint(x):
            ps, Zx, sx = np.exp(x[1]), x[2:2 + n * d].reshape(n, d), np.exp(x[2 + n * d:])
            v = bound.value(x[0], ps, Zx, sx)
            g_xi, g_ps, g_Z, g_s = bound.grads(x[0], ps, Zx, sx)
            return -v, -np.concatenate([[g_xi, g_ps * ps], g_Z.ravel(), g_s * sx])

        x0 = np.concatenate([[xi, np.log(psi2)], Z.ravel(), np.log(s)])
        x, current = _block_step(f_joint, x0, current, inner_iters)
        xi, psi2 = float(x[0]), float(np.exp(x[1]))
        Z, s = x[2:2 + n * d].reshape(n, d), np.exp(x[2 + n * d:])
        trace.append(current)
        if current - start < tol:
            converged = True
            break
    return xi, psi2, Z, s, np.array(trace), converged, it


def _one_start(y, d, prior, k, seed, random_z, max_iters, tol, inner_iters):
    rng = stream(seed, k)
    method = "random" if random_z else "fruchterman_reingold"
    Z0 = initial_positions(y, d, method, seed=rng)
    xi0 = initial_alpha(y, Z0, "sed")
    bound = _Bound(y, prior)
    return _ascend(bound, xi0, 0.1, Z0, np.full(d, 0.1), max_iters, tol, inner_iters)


def fit_lsm_vb(y, d=2, prior=None, max_iters=500, tol=1e-6, n_starts=1, random_z=False, seed=None,
               inner_iters=25, n_jobs=None):
    """Variational fit of the SED latent space model.

    With ``n_starts > 1`` independent starts run (optionally in parallel via
    joblib) and the one reaching the largest bound is returned; all final
    bounds are kept in ``start_elbos``. Starts use the force-directed layout
    unless ``random_z`` is set. A :class:`ConvergenceWarning` is issued when
    the best start stops at ``max_iters``.
    """
    prior = LsmPrior() if prior is None else prior
    if n_starts < 1 or max_iters < 1 or d < 1:
        raise ValueError("n_starts, max_iters and d must be >= 1")
    runs = Parallel(n_jobs=n_jobs)(
        delayed(_one_start)(y, d, prior, k, seed, random_z, max_iters, tol, inner_iters)
        for k in range(n_starts)
    )
    finals = np.array([r[4][-1] for r in runs])
    best = int(np.argmax(finals))
    xi, psi2, Z, s, trace, converged, it = runs[best]
    state = VariationalState(
        xi=xi, psi2=psi2, Zmean=Z, Sigma=np.diag(s), elbo_trace=trace,
        converged=converged, n_iter=it, start_elbos=finals,
    )
    if not converged:
        warnings.warn(
            f"variational fit did not converge in {max_iters} iterations "
            f"(last improvement {trace[-1] - trace[-2]:.3g}); see elbo_trace",
            ConvergenceWarning,
        )
    return state
