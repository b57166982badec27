"""Bayesian ERGM inference with the approximate exchange algorithm.

Several chains move in lockstep. At every iteration each chain proposes
with an adaptive-direction move built from two other chains' states
(plain difference move, no snooker projection), draws auxiliary statistics
from the likelihood at the proposal, and accepts on the statistic
difference so that the normalising constant cancels.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator

from . import _kernels
from .graph import Graph
from .netstats import ModelSpec, gw_weights, stat_vector
from .simulate import _PROPOSALS, SimConfig, simulate_ergm
from .validation import check_graph, check_theta, rng_from, stream

__all__ = [
    "Prior",
    "FitConfig",
    "PosteriorDraws",
    "PosteriorSummary",
    "log_acceptance",
    "exchange_step",
    "fit_ergm",
    "summarize",
    "autocorrelation",
    "effective_sample_size",
    "exact_posterior_oracle",
    "OraclePosterior",
    "BayesianERGM",
]


@dataclass
class Prior:
    """Flat (improper) or Gaussian prior on theta.

    A Gaussian prior with ``mean``/``cov`` left as None is N(0, scale * I)
    in whatever dimension it is evaluated.
    """

    kind: str = "gaussian"
    mean: np.ndarray | None = None
    cov: np.ndarray | None = None
    scale: float = 100.0

    def __post_init__(self):
        if self.kind not in ("flat", "gaussian"):
            raise ValueError(f"prior kind must be 'flat' or 'gaussian', got {self.kind!r}")
        if self.cov is not None:
            cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
            if not np.allclose(cov, cov.T):
                raise ValueError("prior covariance must be symmetric")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValueError("prior covariance must be positive definite") from None
            self.cov = cov
        if self.mean is not None:
            self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if self.scale <= 0:
            raise ValueError("prior scale must be > 0")

    @classmethod
    def flat(cls):
        return cls(kind="flat")

    @classmethod
    def gaussian(cls, mean=None, cov=None, scale=100.0):
        return cls(kind="gaussian", mean=mean, cov=cov, scale=scale)

    def _params(self, p):
        mean = np.zeros(p) if self.mean is None else self.mean
        cov = self.scale * np.eye(p) if self.cov is None else self.cov
        if mean.shape != (p,) or cov.shape != (p, p):
            raise ValueError(f"prior dimension does not match {p} parameters")
        return mean, cov

    def _factor(self, p):
        cache = self.__dict__.setdefault("_cache", {})
        if p not in cache:
            mean, cov = self._params(p)
            chol = np.linalg.cholesky(cov)
            log_norm = -0.5 * p * np.log(2 * np.pi) - np.sum(np.log(np.diag(chol)))
            cache[p] = (mean, np.linalg.inv(chol), log_norm)
        return cache[p]

    def logpdf(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if self.kind == "flat":
            return 0.0
        mean, chol_inv, log_norm = self._factor(theta.size)
        r = chol_inv @ (theta - mean)
        return float(log_norm - 0.5 * np.dot(r, r))

    def to_dict(self):
        out = {"kind": self.kind, "scale": float(self.scale)}
        if self.mean is not None:
            out["mean"] = self.mean.tolist()
        if self.cov is not None:
            out["cov"] = self.cov.tolist()
        return out


@dataclass
class FitConfig:
    main_iters: int = 1200
    aux_iters: int = 3000
    n_chains: int = 9
    ads_gamma: float = 0.5
    ads_noise_sd: float = 0.05
    burn_in: int | None = None
    init_sd: float = 0.1
    proposal: str = "tnt"
    seed: int | None = None

    def __post_init__(self):
        if self.burn_in is None:
            self.burn_in = self.main_iters // 4
        if self.n_chains < 3:
            raise ValueError("adaptive direction sampling needs n_chains >= 3")
        if self.aux_iters <= 0:
            raise ValueError("aux_iters must be > 0")
        if not self.main_iters > self.burn_in >= 0:
            raise ValueError("need main_iters > burn_in >= 0")
        if self.ads_gamma <= 0 or self.ads_noise_sd <= 0:
            raise ValueError("ads_gamma and ads_noise_sd must be > 0")
        if self.init_sd < 0:
            raise ValueError("init_sd must be >= 0")
        if self.proposal not in _PROPOSALS:
            raise ValueError(f"unknown proposal {self.proposal!r}")


@dataclass
class PosteriorDraws:
    """Post-burn-in draws, shape (n_chains, kept_iters, p)."""

    draws: np.ndarray
    accept_count: np.ndarray
    model: ModelSpec
    config: FitConfig
    prior: Prior = field(default_factory=Prior)

    @property
    def n_chains(self):
        return self.draws.shape[0]

    @property
    def acceptance_rate(self):
        return self.accept_count / self.config.main_iters

    def pooled(self):
        return self.draws.reshape(-1, self.draws.shape[-1])


def log_acceptance(theta, theta_prop, s_obs, s_aux, prior):
    """min(0, (theta - theta')^t (s(y') - s(y)) + log p(theta') - log p(theta))."""
    theta = np.asarray(theta, dtype=float)
    theta_prop = np.asarray(theta_prop, dtype=float)
    value = float(np.dot(theta - theta_prop, np.asarray(s_aux) - np.asarray(s_obs)))
    value += prior.logpdf(theta_prop) - prior.logpdf(theta)
    return min(0.0, value)


class _AuxSampler:
    """Reusable auxiliary-draw machinery started from the observed graph."""

    def __init__(self, y, model, aux_iters, proposal):
        model.check_graph(y)
        self.y = y
        self.rows0 = y.copy_rows()
        self.s_obs = stat_vector(y, model)
        self.codes = model.codes
        self.wtab = model.weight_table(y.n)
        self.aux_iters = aux_iters
        self.proposal = _PROPOSALS[proposal]
        self._empty_stats = np.zeros((0, len(model)))
        self._empty_codes = np.zeros(0, dtype=np.int64)

    def draw(self, theta, rng):
        rows = self.rows0.copy()
        stats = self.s_obs.copy()
        _kernels.run_chain(
            rows, self.y.directed, theta, self.codes, self.wtab, stats,
            self.aux_iters, 0, 1, self.proposal, rng,
            self._empty_stats, self._empty_codes, False,
        )
        return stats


def _ads_proposal(theta_h, others, gamma, noise_sd, rng):
    if len(others) < 2:
        raise ValueError("adaptive direction proposals need at least two other chains")
    a = int(rng.integers(0, len(others)))
    b = int(rng.integers(0, len(others) - 1))
    b += b >= a
    eps = rng.normal(0.0, noise_sd, size=theta_h.size) if noise_sd > 0 else np.zeros(theta_h.size)
    with np.errstate(over="ignore", invalid="ignore"):
        prop = theta_h + gamma * (others[a] - others[b]) + eps
    if not np.all(np.isfinite(prop)):
        raise FloatingPointError("non-finite proposal")
    return prop


def _exchange(theta_h, others, sampler, prior, gamma, noise_sd, rng):
    prop = _ads_proposal(theta_h, others, gamma, noise_sd, rng)
    s_aux = sampler.draw(prop, rng)
    log_a = log_acceptance(theta_h, prop, sampler.s_obs, s_aux, prior)
    if log_a >= 0.0 or np.log(rng.random()) < log_a:
        return prop, True
    return theta_h, False


def exchange_step(theta_h, others, y, model, prior=None, aux_iters=3000, rng=None,
                  gamma=0.5, noise_sd=0.05, proposal="tnt"):
    """One exchange-algorithm update of a single chain.

    ``others`` holds the current states of the other chains; two distinct
    ones are picked uniformly to build the proposal direction.
    Returns ``(theta_new, accepted)``.
    """
    prior = Prior() if prior is None else prior
    theta_h = check_theta(theta_h, model)
    others = [check_theta(o, model) for o in others]
    sampler = _AuxSampler(y, model, aux_iters, proposal)
    return _exchange(theta_h, others, sampler, prior, gamma, noise_sd, rng_from(rng))


def fit_ergm(y, model, prior=None, cfg=None, callback=None):
    """Sample the ERGM posterior with lockstep parallel ADS exchange chains."""
    prior = Prior() if prior is None else prior
    cfg = FitConfig() if cfg is None else cfg
    if not isinstance(y, Graph):
        y = check_graph(y)
    p = len(model)
    sampler = _AuxSampler(y, model, cfg.aux_iters, cfg.proposal)
    rngs = [stream(cfg.seed, h) for h in range(cfg.n_chains)]
    init_rng = stream(cfg.seed, cfg.n_chains)
    state = init_rng.normal(0.0, cfg.init_sd, size=(cfg.n_chains, p))
    trace = np.empty((cfg.n_chains, cfg.main_iters, p))
    accept = np.zeros(cfg.n_chains, dtype=np.int64)
    for t in range(cfg.main_iters):
        published = state.copy()
        for h in range(cfg.n_chains):
            others = [published[k] for k in range(cfg.n_chains) if k != h]
            new, ok = _exchange(
                published[h], others, sampler, prior, cfg.ads_gamma, cfg.ads_noise_sd, rngs[h]
            )
            state[h] = new
            accept[h] += ok
        trace[:, t] = state
        if callback is not None:
            callback(t, state)
    return PosteriorDraws(
        draws=trace[:, cfg.burn_in:].copy(), accept_count=accept, model=model, config=cfg, prior=prior
    )


def autocorrelation(x, max_lag):
    """Sample ACF of a 1-d series at lags 0..max_lag; NaN for constant series."""
    x = np.asarray(x, dtype=float)
    max_lag = min(max_lag, x.size - 1)
    constant = np.ptp(x) == 0
    x = x - x.mean()
    denom = np.dot(x, x)
    if constant or denom == 0:
        return np.full(max_lag + 1, np.nan)
    return np.array([np.dot(x[: x.size - k], x[k:]) / denom for k in range(max_lag + 1)])


def effective_sample_size(chains):
    """ESS of one parameter over chains of shape (n_chains, n_iter).

    Per-chain Geyer initial monotone sequence estimator, summed over chains.
    """
    total = 0.0
    for x in np.atleast_2d(chains):
        n = x.size
        acf = autocorrelation(x, n - 1)
        if np.isnan(acf[0]):
            total += n
            continue
        pairs = acf[: 2 * ((n - 1) // 2) + 1]
        gam = pairs[0:-1:2] + pairs[1::2]
        tau_sum = 0.0
        prev = np.inf
        for g in gam:
            if g <= 0:
                break
            g = min(g, prev)
            tau_sum += g
            prev = g
        tau = max(-1.0 + 2.0 * tau_sum, 1.0 / n)
        total += n / tau
    return total


@dataclass
class PosteriorSummary:
    names: list
    chain_mean: np.ndarray
    chain_sd: np.ndarray
    chain_acceptance: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    acceptance: float
    acf: np.ndarray
    acf_defined: np.ndarray
    ess: np.ndarray
    mcse: np.ndarray

    def to_dict(self):
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, np.ndarray):
                out[k] = np.where(np.isnan(v), None, v).tolist() if v.dtype.kind == "f" else v.tolist()
        out.pop("acf")
        return out

    def __str__(self):
        header = " " * 12 + "".join(f"{nm:>22}" for nm in self.names)
        lines = ["Posterior mean:", header]
        for c, row in enumerate(self.chain_mean):
            lines.append(f"Chain {c + 1:<6}" + "".join(f"{v:>22.7f}" for v in row))
        lines += ["", "Posterior sd:", header]
        for c, row in enumerate(self.chain_sd):
            lines.append(f"Chain {c + 1:<6}" + "".join(f"{v:>22.7f}" for v in row))
        lines += ["", "Acceptance rate:"]
        for c, a in enumerate(self.chain_acceptance):
            lines.append(f"Chain {c + 1:<6}{a:>12.7f}")
        lines += ["", "Overall posterior density estimate:", header]
        lines.append("Post. mean  " + "".join(f"{v:>22.7f}" for v in self.mean))
        lines.append("Post. sd    " + "".join(f"{v:>22.7f}" for v in self.sd))
        lines += ["", f"Overall acceptance rate: {self.acceptance:.2f}"]
        return "\n".join(lines)


def summarize(d, lag=200):
    """Per-chain and pooled means, sds, acceptance, ACF (averaged over chains),
    effective sample sizes and Monte Carlo standard errors."""
    draws = d.draws
    if draws.size == 0:
        raise ValueError("no posterior draws to summarize")
    n_chains, kept, p = draws.shape
    if lag >= kept:
        raise ValueError(f"lag {lag} must be smaller than the {kept} kept iterations")
    ddof = 1 if kept > 1 else 0
    pooled = draws.reshape(-1, p)
    acf = np.empty((p, lag + 1))
    defined = np.ones(p, dtype=bool)
    ess = np.empty(p)
    for k in range(p):
        per_chain = [autocorrelation(draws[c, :, k], lag) for c in range(n_chains)]
        stacked = np.array(per_chain)
        ok = ~np.isnan(stacked[:, 0])
        defined[k] = bool(ok.any())
        acf[k] = stacked[ok].mean(axis=0) if ok.any() else np.nan
        ess[k] = effective_sample_size(draws[:, :, k])
    # exact zeros for constant columns, where the mean is not exactly representable
    sd = np.where(np.ptp(pooled, axis=0) == 0, 0.0, pooled.std(axis=0, ddof=1 if pooled.shape[0] > 1 else 0))
    chain_sd = np.where(np.ptp(draws, axis=1) == 0, 0.0, draws.std(axis=1, ddof=ddof))
    return PosteriorSummary(
        names=d.model.names,
        chain_mean=draws.mean(axis=1),
        chain_sd=chain_sd,
        chain_acceptance=d.acceptance_rate,
        mean=pooled.mean(axis=0),
        sd=sd,
        acceptance=float(d.accept_count.sum() / (n_chains * d.config.main_iters)),
        acf=acf,
        acf_defined=defined,
        ess=ess,
        mcse=sd / np.sqrt(ess),
    )


@lru_cache(maxsize=32)
def _enumerated_stats(n, model_json):
    """Distinct statistic vectors of all undirected graphs on n nodes, with counts.

    Computed in batch from 0/1 codes, independently of ``stat_vector``.
    """
    model = ModelSpec.from_json(model_json)
    iu = np.triu_indices(n, 1)
    n_dyads = iu[0].size
    codes = np.arange(2**n_dyads, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n_dyads)) & 1).astype(np.int64)
    adj = np.zeros((codes.size, n, n), dtype=np.int64)
    adj[:, iu[0], iu[1]] = bits
    adj += adj.transpose(0, 2, 1)
    sp = np.einsum("gik,gkj->gij", adj, adj)[:, iu[0], iu[1]]
    out = np.empty((codes.size, len(model)))
    for t, term in enumerate(model.terms):
        if term.kind == "edges":
            out[:, t] = bits.sum(axis=1)
        else:
            w = gw_weights(term.phi, n)[sp]
            mask = bits if term.kind == "gwesp" else 1 - bits
            out[:, t] = (w * mask).sum(axis=1)
    uniq, counts = np.unique(np.round(out, 10), axis=0, return_counts=True)
    return uniq, counts


def log_normalizer(theta, n, model):
    """log z(theta) by exhaustive enumeration of undirected graphs on n <= 6 nodes."""
    if n > 6:
        raise ValueError("exact enumeration is limited to n <= 6 nodes")
    uniq, counts = _enumerated_stats(n, model.to_json())
    theta = np.atleast_2d(theta)
    return logsumexp(theta @ uniq.T + np.log(counts)[None, :], axis=1)


@dataclass
class OraclePosterior:
    grid: np.ndarray
    weights: np.ndarray
    log_z: np.ndarray

    def mean(self):
        return self.weights @ self.grid

    def sd(self):
        mu = self.mean()
        return np.sqrt(self.weights @ (self.grid - mu) ** 2)

    def mode(self):
        return self.grid[np.argmax(self.weights)]


def exact_posterior_oracle(y, model, prior, theta_grid, cell_volumes=None):
    """Posterior on a theta grid with z(theta) computed exactly.

    Weights are normalised by quadrature; with ``cell_volumes`` omitted the
    grid is taken as uniform (equal cell volumes).
    """
    if y.directed:
        raise ValueError("the enumeration oracle covers undirected graphs only")
    if y.n > 6:
        raise ValueError("exact enumeration is limited to n <= 6 nodes")
    grid = np.atleast_2d(np.asarray(theta_grid, dtype=float))
    if grid.shape[0] == 1 and len(model) == 1 and grid.shape[1] != 1:
        grid = grid.T
    if grid.shape[1] != len(model):
        raise ValueError("grid points must have one coordinate per model term")
    s_obs = stat_vector(y, model)
    log_z = log_normalizer(grid, y.n, model)
    log_post = grid @ s_obs - log_z + np.array([prior.logpdf(th) for th in grid])
    if cell_volumes is not None:
        log_post = log_post + np.log(np.asarray(cell_volumes, dtype=float))
    w = np.exp(log_post - log_post.max())
    return OraclePosterior(grid=grid, weights=w / w.sum(), log_z=log_z)


def _as_model(model):
    if isinstance(model, ModelSpec):
        return model
    if isinstance(model, list) and model and isinstance(model[0], dict):
        return ModelSpec.from_config(model)
    return ModelSpec.from_terms(*model)


class BayesianERGM(BaseEstimator):
    """Exchange-algorithm posterior sampler for an ERGM.

    Parameters
    ----------
    model : ModelSpec or sequence, default=("edges",)
        Terms such as ``["edges", ("gwnsp", 0.6), ("gwesp", 0.6)]``.
    prior : Prior, optional
        Defaults to N(0, 100 I).
    main_iters, aux_iters, n_chains, burn_in : int
    gamma, noise_sd : float
        Adaptive-direction scale and per-coordinate proposal noise.
    proposal : {"tnt", "random"}
    random_state : int, optional

    Attributes
    ----------
    draws_ : PosteriorDraws
    posterior_mean_, posterior_sd_ : ndarray of shape (p,)
    acceptance_rate_ : float
    """

    def __init__(self, model=("edges",), prior=None, main_iters=1200, aux_iters=3000,
                 n_chains=9, burn_in=None, gamma=0.5, noise_sd=0.05, proposal="tnt",
                 random_state=None):
        self.model = model
        self.prior = prior
        self.main_iters = main_iters
        self.aux_iters = aux_iters
        self.n_chains = n_chains
        self.burn_in = burn_in
        self.gamma = gamma
        self.noise_sd = noise_sd
        self.proposal = proposal
        self.random_state = random_state

    def _config(self):
        return FitConfig(
            main_iters=self.main_iters, aux_iters=self.aux_iters, n_chains=self.n_chains,
            ads_gamma=self.gamma, ads_noise_sd=self.noise_sd, burn_in=self.burn_in,
            proposal=self.proposal, seed=self.random_state,
        )

    def fit(self, y, _=None):
        g = check_graph(y)
        self.model_ = _as_model(self.model)
        self.model_.check_graph(g)
        self.graph_ = g
        self.draws_ = fit_ergm(g, self.model_, self.prior or Prior(), self._config())
        pooled = self.draws_.pooled()
        self.posterior_mean_ = pooled.mean(axis=0)
        self.posterior_sd_ = pooled.std(axis=0, ddof=1)
        self.acceptance_rate_ = float(self.draws_.acceptance_rate.mean())
        return self

    def summary(self, lag=200):
        return summarize(self.draws_, lag=min(lag, self.draws_.draws.shape[1] - 1))

    def simulate(self, n_samples=1, aux_iters=None, random_state=None):
        """Posterior-predictive graphs: one simulation per resampled draw."""
        rng = rng_from(random_state)
        pooled = self.draws_.pooled()
        picks = rng.integers(0, pooled.shape[0], size=n_samples)
        cfg_iters = aux_iters or self.aux_iters
        out = []
        for k in picks:
            cfg = SimConfig(aux_iters=cfg_iters, proposal=self.proposal, seed=rng, start=self.graph_)
            out.append(simulate_ergm(pooled[k], self.model_, cfg)[0])
        return out
