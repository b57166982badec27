"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Criteria that need the dolphin network run only when NETBAYES_DOLPHIN_DATA
points at it; otherwise they report FAIL and are marked as expected failures.
Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
without ``-s``).
"""

import math
import time
import warnings

import numpy as np
import pytest
from scipy import stats
from scipy.stats import ortho_group
from sklearn.exceptions import ConvergenceWarning

from netbayes.cli import main
from netbayes.ergm import FitConfig, Prior, _enumerated_stats, exact_posterior_oracle, fit_ergm, summarize
from netbayes.gof import GofConfig, gof_ergm
from netbayes.graph import from_edge_list, toggle
from netbayes.lsm import LatentConfig, LsmPrior, fit_lpcm_mcmc, fit_lsm_mcmc, fit_lsm_vb, loglik, procrustes_rotate
from netbayes.netstats import ModelSpec, change_stats, gwesp, gwnsp, stat_vector
from netbayes.simulate import SimConfig, sample_stats

from conftest import cycle, complete, load_dolphins, random_graph, two_cliques
from test_vb import THREE_NODE_CASES, log_marginal_three_nodes

DOLPHIN_MODEL = ModelSpec.from_terms("edges", ("gwesp", 0.6), ("gwnsp", 0.6))
REF_MEAN = np.array([-2.4224, -0.1768, 0.7584])
REF_SD = np.array([0.422, 0.047, 0.130])
MEAN_TOL = np.array([0.3, 0.05, 0.15])
GWNSP_CLOSED = 2 * math.exp(0.6) * (1 - (1 - math.exp(-0.6)) ** 2)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        return ok

    return emit


def need_dolphins(report, number, title):
    g = load_dolphins()
    if g is None:
        report(number, title, False, "dolphin data unavailable; set NETBAYES_DOLPHIN_DATA")
        pytest.xfail("dolphin network not available")
    return g


@pytest.fixture(scope="module")
def dolphin_fits():
    """Three full-length ERGM fits of the dolphin network, computed once."""
    g = load_dolphins()
    if g is None:
        return None
    return g, [fit_ergm(g, DOLPHIN_MODEL, Prior(), FitConfig(seed=s)) for s in (1, 2, 3)]


def test_criterion_01_dolphin_ergm_posterior(report, dolphin_fits):
    title = "dolphin ERGM posterior means, sds and acceptance"
    need_dolphins(report, 1, title)
    _, fits = dolphin_fits
    passed, details = 0, []
    for d in fits:
        pooled = d.pooled()
        mean, sd = pooled.mean(axis=0), pooled.std(axis=0, ddof=1)
        acc = d.accept_count.sum() / (d.n_chains * d.config.main_iters)
        ok = (np.all(np.abs(mean - REF_MEAN) <= MEAN_TOL) and np.all(np.abs(sd - REF_SD) <= 0.5 * REF_SD)
              and 0.08 <= acc <= 0.30)
        passed += ok
        details.append(f"mean={np.round(mean, 3).tolist()} sd={np.round(sd, 3).tolist()} acc={acc:.3f}")
    assert report(1, title, passed >= 2, f"{passed}/3 seeds; " + "; ".join(details))


ORACLE_GRAPHS = [
    [(1, 2), (2, 3), (3, 4), (4, 5)],
    [(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (4, 5)],
    [(1, 2), (3, 4)],
    [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (2, 5), (1, 5), (2, 4)],
    [(1, 2), (2, 3), (1, 3)],
]


def test_criterion_02_exact_oracle_equivalence(report):
    prior = Prior()
    grid = np.linspace(-15, 15, 6001)
    results = []
    for k, edges in enumerate(ORACLE_GRAPHS):
        y = from_edge_list(edges, 5)
        exact = exact_posterior_oracle(y, ModelSpec.from_terms("edges"), prior, grid).mean()[0]
        d = fit_ergm(y, ModelSpec.from_terms("edges"), prior,
                     FitConfig(main_iters=3000, aux_iters=200, n_chains=9, seed=100 + k))
        s = summarize(d, lag=50)
        results.append((abs(s.mean[0] - exact), 3 * s.mcse[0]))
    ok = all(err <= bound for err, bound in results)
    detail = ", ".join(f"|err|={e:.4f}<=3mcse={b:.4f}" for e, b in results)
    assert report(2, "exchange posterior mean vs enumeration oracle on five 5-node graphs", ok, detail)


def test_criterion_03_simulator_calibration(report):
    s = sample_stats([0.0], ModelSpec.from_terms("edges"), SimConfig(aux_iters=2000, seed=0), 10000,
                     thin=200, n=20)
    density = s[:, 0].mean() / 190
    model = ModelSpec.from_terms("edges", ("gwesp", 0.6))
    theta = np.array([-1.0, 0.5])
    uniq, counts = _enumerated_stats(5, model.to_json())
    logw = uniq @ theta + np.log(counts)
    p = np.exp(logw - logw.max())
    p /= p.sum()
    draws = sample_stats(theta, model, SimConfig(aux_iters=2000, seed=1), 50000, thin=20, n=5)
    idx = {tuple(row): k for k, row in enumerate(uniq)}
    obs = np.bincount([idx[tuple(np.round(r, 10))] for r in draws], minlength=len(uniq))
    # pool sparse categories so every expected count is at least 5
    order = np.argsort(p)
    exp_counts, obs_counts, acc_e, acc_o = [], [], 0.0, 0
    for k in order:
        acc_e += p[k] * obs.sum()
        acc_o += obs[k]
        if acc_e >= 5:
            exp_counts.append(acc_e)
            obs_counts.append(acc_o)
            acc_e, acc_o = 0.0, 0
    exp_counts[-1] += acc_e
    obs_counts[-1] += acc_o
    pval = stats.chisquare(obs_counts, exp_counts).pvalue
    ok = abs(density - 0.5) <= 0.02 and pval > 1e-3
    assert report(3, "simulator density at theta=0 and n=5 chi-square", ok,
                  f"density={density:.4f}, chi-square p={pval:.3g} over {len(exp_counts)} cells")


def test_criterion_04_change_statistic_exactness(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(3, 16))
        phis = rng.uniform(0, 2, size=2)
        terms = ["edges"] + [(kind, float(phi)) for kind, phi in zip(("gwesp", "gwnsp"), phis)
                             if rng.random() < 0.8]
        model = ModelSpec.from_terms(*terms)
        g = random_graph(n, rng.uniform(0.05, 0.8), rng)
        i, j = (int(v) for v in rng.choice(n, 2, replace=False))
        ref = stat_vector(toggle(g, i, j), model) - stat_vector(g, model)
        worst = max(worst, float(np.max(np.abs(change_stats(g, model, (i, j)) - ref))))
    assert report(4, "change statistics equal full-recompute differences", worst <= 1e-12, f"max |err|={worst:.2e}")


def test_criterion_05_formula_spot_values(report):
    k3 = [gwesp(complete(3), phi) for phi in (0.0, 0.6, 2.0)]
    c4 = gwnsp(cycle(4), 0.6)
    ok = all(abs(v - 3.0) <= 1e-12 for v in k3) and abs(c4 - 2.9022) <= 1e-4
    report(5, "gwesp(K3)=3 and gwnsp(C4, 0.6)=2.9022 +/- 1e-4", ok,
           f"gwesp(K3)={k3}, gwnsp(C4)={c4:.6f}; closed form 2e^0.6(1-(1-e^-0.6)^2)={GWNSP_CLOSED:.6f}")
    assert all(abs(v - 3.0) <= 1e-12 for v in k3)
    assert abs(c4 - GWNSP_CLOSED) <= 1e-12
    if not ok:
        pytest.xfail("stated target 2.9022 is off the closed-form value 2.902377 by 1.8e-4")


def test_criterion_06_likelihood_rigid_motion_invariance(report):
    rng = np.random.default_rng(6)
    worst = 0.0
    for k in range(100):
        n = int(rng.integers(5, 30))
        d = int(rng.integers(1, 4))
        g = random_graph(n, 0.25, rng)
        Z = rng.normal(size=(n, d))
        alpha = rng.normal()
        Q = ortho_group.rvs(d, random_state=rng) if d > 1 else np.array([[-1.0]])
        moved = Z @ Q + rng.normal(scale=3, size=d)
        for metric in ("ed", "sed"):
            diff = abs(loglik(g, LatentConfig(moved, alpha), metric) - loglik(g, LatentConfig(Z, alpha), metric))
            worst = max(worst, diff)
    assert report(6, "LSM loglik invariant under 100 rigid motions (ED and SED)", worst <= 1e-9,
                  f"max |diff|={worst:.2e}")


def test_criterion_07a_vb_trace_monotone_on_dolphins(report):
    title = "VB bound trace non-decreasing on the dolphin network"
    g = need_dolphins(report, "7a", title)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        state = fit_lsm_vb(g, d=2, seed=0)
    worst = float(np.min(np.diff(state.elbo_trace))) if state.elbo_trace.size > 1 else 0.0
    assert report("7a", title, worst >= -1e-8, f"min step={worst:.2e}, {state.n_iter} iterations")


def test_criterion_07b_vb_bound_below_quadrature(report):
    rows = []
    for edges in THREE_NODE_CASES:
        g = from_edge_list(edges, 3)
        exact = log_marginal_three_nodes(g, LsmPrior())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            bound = fit_lsm_vb(g, d=1, n_starts=3, seed=0).elbo
        rows.append((bound, exact))
    ok = all(b <= e for b, e in rows)
    detail = ", ".join(f"{b:.4f}<={e:.4f}" for b, e in rows)
    assert report("7b", "VB bound <= quadrature log marginal on 3-node graphs", ok, detail)


def test_criterion_07c_vb_faster_than_mcmc_on_dolphins(report):
    title = "VB wall-clock below MCMC wall-clock on the dolphin fit"
    g = need_dolphins(report, "7c", title)
    start = time.monotonic()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        fit_lsm_vb(g, d=2, seed=0)
    t_vb = time.monotonic() - start
    start = time.monotonic()
    fit_lsm_mcmc(g, d=2, seed=0)
    t_mcmc = time.monotonic() - start
    assert report("7c", title, t_vb < t_mcmc, f"VB {t_vb:.2f}s vs MCMC {t_mcmc:.2f}s")


def test_criterion_08_lpcm_two_clique_recovery(report):
    planted = np.array([0] * 5 + [1] * 5)
    scores = []
    for seed in (1, 2, 3):
        labels = fit_lpcm_mcmc(two_cliques(), G=2, seed=seed).modal_labels()
        same = int(np.sum(labels == planted))
        scores.append(max(same, 10 - same))
    ok = sum(s >= 9 for s in scores) >= 2
    assert report(8, "LPCM recovers the planted two-clique partition", ok, f"correct per seed={scores}")


def test_criterion_09_dolphin_gof_envelope(report, dolphin_fits):
    title = "dolphin ERGM GoF envelope coverage >= 80%"
    need_dolphins(report, 9, title)
    g, fits = dolphin_fits
    s = gof_ergm(fits[0], g, cfg=GofConfig(n_sim=100, aux_iters=10000, seed=9))
    cov = s.coverage()
    assert report(9, title, cov >= 0.8, f"coverage={cov:.3f}")


def test_criterion_10_procrustes_recovery(report):
    rng = np.random.default_rng(10)
    worst = 0.0
    for d in (2, 3):
        X = rng.normal(size=(30, d))
        Q = ortho_group.rvs(d, random_state=rng)
        Y = X @ Q + rng.normal(scale=4, size=d)
        worst = max(worst, float(np.linalg.norm(procrustes_rotate(X, Y) - Y)))
    assert report(10, "Procrustes recovers a known rotation and translation", worst < 1e-10,
                  f"Frobenius error={worst:.2e}")


def test_criterion_11_cli_determinism(report, tmp_path):
    data = tmp_path / "net.txt"
    data.write_text(random_graph(14, 0.3, np.random.default_rng(11)).to_matrix_text())
    runs = {
        "fit-ergm": (["fit-ergm", "--terms", "edges,gwesp:0.6", "--main-iters", "60", "--aux-iters", "300",
                      "--n-chains", "3"], ["draws.csv"]),
        "fit-lsm mcmc": (["fit-lsm", "--iters", "1500", "--burn-in", "500", "--thin", "5"],
                         ["draws.csv", "draws/positions.csv"]),
        "fit-lsm vb": (["fit-lsm", "--method", "vb"], ["positions.csv", "elbo.csv"]),
        "fit-lpcm": (["fit-lpcm", "--clusters", "2", "--iters", "1500", "--burn-in", "500", "--thin", "5"],
                     ["draws.csv", "draws/labels.csv"]),
    }
    bad = []
    for name, (argv, files) in runs.items():
        outs = []
        for k in range(2):
            out = tmp_path / f"{name.replace(' ', '_')}_{k}"
            if main([*argv, "--data", str(data), "--seed", "42", "--out", str(out)]) != 0:
                bad.append(f"{name} failed")
            outs.append(out)
        for f in files:
            if (outs[0] / f).read_bytes() != (outs[1] / f).read_bytes():
                bad.append(f"{name}:{f}")
    assert report(11, "same seed gives byte-identical draw files for every fitting subcommand", not bad,
                  "differences: " + ", ".join(bad) if bad else ", ".join(runs))
