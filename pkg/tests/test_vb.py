import warnings

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermegauss
from scipy.optimize import approx_fprime
from scipy.special import logsumexp
from sklearn.exceptions import ConvergenceWarning

from netbayes.graph import from_edge_list
from netbayes.lsm import LsmPrior, VariationalState, elbo, fit_lsm_vb
from netbayes.lsm.vb import _Bound

from conftest import cycle, random_graph, two_cliques

THREE_NODE_CASES = [[], [(1, 2)], [(1, 2), (2, 3)], [(1, 2), (2, 3), (1, 3)]]


def log_marginal_three_nodes(g, prior, k=40):
    """log p(y) for a 3-node graph with d = 1, by tensor Gauss-Hermite
    quadrature over (alpha, z1, z2, z3) against the Gaussian priors."""
    x, w = hermegauss(k)
    lw = np.log(w / np.sqrt(2 * np.pi))
    alphas = prior.alpha_mean + np.sqrt(prior.alpha_var) * x
    z = np.sqrt(prior.z_var) * x
    Z = np.meshgrid(z, z, z, indexing="ij")
    L = sum(np.meshgrid(lw, lw, lw, indexing="ij"))
    A = g.adjacency
    per_alpha = []
    for a, la in zip(alphas, lw):
        ll = L + la
        for i in range(3):
            for j in range(i + 1, 3):
                eta = a - (Z[i] - Z[j]) ** 2
                ll = ll + A[i, j] * eta - np.logaddexp(0.0, eta)
        per_alpha.append(logsumexp(ll))
    return float(logsumexp(per_alpha))


@pytest.mark.parametrize("edges", THREE_NODE_CASES)
def test_bound_below_quadrature_log_marginal(edges):
    g = from_edge_list(edges, 3)
    prior = LsmPrior()
    exact = log_marginal_three_nodes(g, prior)
    assert exact == pytest.approx(log_marginal_three_nodes(g, prior, k=30), abs=1e-4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        state = fit_lsm_vb(g, d=1, n_starts=3, seed=0)
    assert state.elbo <= exact
    assert elbo(g, state, prior) == pytest.approx(state.elbo)


def test_trace_is_non_decreasing():
    g = random_graph(25, 0.15, np.random.default_rng(0))
    state = fit_lsm_vb(g, d=2, seed=1, tol=1e-9, max_iters=300)
    assert np.all(np.diff(state.elbo_trace) >= -1e-8)
    assert state.converged and state.n_iter == state.elbo_trace.size - 1


@pytest.mark.parametrize("directed", [False, True])
def test_bound_gradients_match_finite_differences(directed):
    rng = np.random.default_rng(2)
    g = random_graph(7, 0.4, rng, directed=directed)
    b = _Bound(g, LsmPrior(alpha_mean=0.3, z_var=2.0))
    n, d = 7, 2
    x0 = np.concatenate([[0.4, 0.3], rng.normal(size=n * d), [0.2, 0.5]])

    def unpack(x):
        return x[0], x[1], x[2:2 + n * d].reshape(n, d), x[2 + n * d:]

    g_xi, g_psi2, g_Z, g_s = b.grads(*unpack(x0))
    analytic = np.concatenate([[g_xi, g_psi2], g_Z.ravel(), g_s])
    numeric = approx_fprime(x0, lambda x: b.value(*unpack(x)), 1e-7)
    assert np.allclose(analytic, numeric, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("g", [cycle(6), two_cliques()], ids=["cycle6", "two_cliques"])
def test_random_restarts_agree_across_seeds(g):
    tol = 1e-6
    a = fit_lsm_vb(g, d=2, n_starts=10, random_z=True, seed=0, tol=1e-8, max_iters=2000)
    b = fit_lsm_vb(g, d=2, n_starts=10, random_z=True, seed=1, tol=1e-8, max_iters=2000)
    assert abs(a.elbo - b.elbo) < tol
    assert a.elbo == a.start_elbos.max() and a.start_elbos.size == 10


def test_non_convergence_warns_with_trace():
    g = random_graph(20, 0.2, np.random.default_rng(3))
    with pytest.warns(ConvergenceWarning):
        state = fit_lsm_vb(g, max_iters=1, tol=0.0, seed=0)
    assert not state.converged and state.elbo_trace.size == 2


def test_state_validation_and_sampling():
    with pytest.raises(ValueError):
        VariationalState(0.0, 0.0, np.zeros((3, 2)), np.eye(2))
    with pytest.raises(ValueError):
        VariationalState(0.0, 1.0, np.zeros((3, 2)), -np.eye(2))
    with pytest.raises(ValueError):
        fit_lsm_vb(cycle(4), n_starts=0)
    st = VariationalState(0.5, 1e-30, np.ones((3, 2)), 1e-30 * np.eye(2))
    Z, a = st.sample(np.random.default_rng(0))
    assert a == pytest.approx(0.5) and np.allclose(Z, 1.0)
    assert set(st.to_dict()) >= {"xi", "psi2", "Sigma", "elbo", "converged"}


def test_same_seed_is_deterministic():
    g = random_graph(12, 0.3, np.random.default_rng(4))
    a = fit_lsm_vb(g, seed=5, n_starts=2)
    b = fit_lsm_vb(g, seed=5, n_starts=2)
    assert np.array_equal(a.Zmean, b.Zmean) and np.array_equal(a.elbo_trace, b.elbo_trace)


def test_dolphin_trace_is_monotone(dolphins):
    state = fit_lsm_vb(dolphins, d=2, seed=0)
    assert np.all(np.diff(state.elbo_trace) >= -1e-8)
