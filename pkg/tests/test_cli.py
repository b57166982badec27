import csv
import json

import numpy as np
import pytest

from netbayes.cli import COMMANDS, OUT_ENV, main
from netbayes.graph import read_edge_list, read_matrix

from conftest import random_graph, two_cliques

FAST_ERGM = ["--terms", "edges,gwesp:0.6", "--main-iters", "40", "--aux-iters", "200", "--n-chains", "3"]
FAST_LSM = ["--iters", "400", "--burn-in", "100", "--thin", "3"]


@pytest.fixture
def net(tmp_path):
    path = tmp_path / "net.txt"
    path.write_text("header line\n" + random_graph(12, 0.3, np.random.default_rng(0)).to_matrix_text())
    return str(path)


@pytest.fixture
def cliques(tmp_path):
    path = tmp_path / "cliques.txt"
    path.write_text(two_cliques().to_matrix_text())
    return str(path)


def manifest(out):
    with open(out / "manifest.json") as fh:
        return json.load(fh)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_help_exits_zero(capsys):
    assert main(["fit-ergm", "--help"]) == 0
    assert "--main-iters" in capsys.readouterr().out
    for cmd in COMMANDS:
        assert main([cmd, "--help"]) == 0


def test_unknown_subcommand_suggests(capsys):
    assert main(["fit-ergn"]) == 2
    assert "fit-ergm" in capsys.readouterr().err
    assert main([]) == 2


def test_invalid_field_reports_path_and_keeps_manifest(tmp_path, net, capsys):
    out = tmp_path / "bad"
    code = main(["fit-ergm", "--data", net, "--skip-lines", "1", "--main-iters", "-3", "--out", str(out)])
    assert code == 2
    assert "main_iters" in capsys.readouterr().err
    m = manifest(out)
    assert m["status"] == "error" and m["exit_status"] == 2 and m["error"]["type"] == "config"


def test_malformed_config_reports_location(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text('{"seed": 1,\n  "data": {"path": }\n}')
    assert main(["fit-ergm", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "2:" in capsys.readouterr().err


def test_unknown_config_key_rejected(tmp_path, net):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"data": {"path": net}, "algorithm": {"main_itres": 10}}))
    assert main(["fit-ergm", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_missing_data_file(tmp_path, capsys):
    assert main(["fit-ergm", "--data", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "o")]) == 2
    assert manifest(tmp_path / "o")["exit_status"] == 2


def test_malformed_matrix_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 0\n1 0 2\n0 2 0\n")
    assert main(["fit-lsm", "--data", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_runtime_failure_exit_one(tmp_path, net, monkeypatch):
    import netbayes.cli as cli

    def boom(cfg, out):
        raise RuntimeError("simulated failure")

    monkeypatch.setitem(cli._RUNNERS, "fit-ergm", boom)
    out = tmp_path / "o"
    assert main(["fit-ergm", "--data", net, "--skip-lines", "1", "--out", str(out)]) == 1
    m = manifest(out)
    assert m["error"]["type"] == "RuntimeError" and m["exit_status"] == 1


def test_fit_ergm_outputs_and_determinism(tmp_path, net, capsys):
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["fit-ergm", "--data", net, "--skip-lines", "1", *FAST_ERGM, "--seed", "7",
                     "--out", str(out)]) == 0
        runs.append(out)
    a, b = runs
    assert (a / "draws.csv").read_bytes() == (b / "draws.csv").read_bytes()
    for name in ("acf.csv", "summary.json", "diagnostics.svg"):
        assert (a / name).exists()
    assert (a / "diagnostics.svg").read_bytes() == (b / "diagnostics.svg").read_bytes()
    rows = read_rows(a / "draws.csv")
    assert rows[0] == ["chain", "iter", "edges", "gwesp.fixed.0.6"]
    assert len(rows) == 1 + 3 * 30
    summary = json.loads((a / "summary.json").read_text())
    assert len(summary["chain_mean"]) == 3
    m = manifest(a)
    assert m["status"] == "ok" and m["seed"] == 7 and "draws.csv" in m["outputs"]
    assert isinstance(m["timing"]["wall_seconds"], float)
    assert "Posterior mean" in capsys.readouterr().out
    assert main(["summary", "--fit", str(a), "--lag", "5"]) == 0


def test_model_config_file(tmp_path, net):
    model = tmp_path / "model.json"
    model.write_text(json.dumps([{"term": "edges"}, {"term": "gwnsp", "phi": 0.6}]))
    out = tmp_path / "o"
    code = main(["fit-ergm", "--data", net, "--skip-lines", "1", "--model-config", str(model), "--main-iters", "20",
                 "--aux-iters", "50", "--n-chains", "3", "--seed", "1", "--out", str(out)])
    assert code == 0
    assert read_rows(out / "draws.csv")[0][2:] == ["edges", "gwnsp.fixed.0.6"]


def test_output_root_from_environment(tmp_path, net, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "root"))
    assert main(["fit-ergm", "--data", net, "--skip-lines", "1", *FAST_ERGM, "--seed", "2"]) == 0
    assert (tmp_path / "root" / "fit-ergm" / "manifest.json").exists()


def test_fit_lsm_mcmc_and_vb(tmp_path, net):
    for k in range(2):
        assert main(["fit-lsm", "--data", net, "--skip-lines", "1", *FAST_LSM, "--seed", "3",
                     "--out", str(tmp_path / f"m{k}")]) == 0
    m0, m1 = tmp_path / "m0", tmp_path / "m1"
    assert (m0 / "draws.csv").read_bytes() == (m1 / "draws.csv").read_bytes()
    assert (m0 / "draws" / "positions.csv").read_bytes() == (m1 / "draws" / "positions.csv").read_bytes()
    assert read_rows(m0 / "draws.csv")[0] == ["draw", "alpha", "loglik"]
    for k in range(2):
        assert main(["fit-lsm", "--method", "vb", "--data", net, "--skip-lines", "1", "--seed", "3",
                     "--out", str(tmp_path / f"v{k}")]) == 0
    v0, v1 = tmp_path / "v0", tmp_path / "v1"
    for name in ("positions.csv", "elbo.csv"):
        assert (v0 / name).read_bytes() == (v1 / name).read_bytes()
    assert json.loads((v0 / "variational.json").read_text())["psi2"] > 0
    assert manifest(v0)["config"]["model"]["metric"] == "sed"
    assert main(["fit-lsm", "--method", "vb", "--metric", "ed", "--data", net, "--skip-lines", "1",
                 "--out", str(tmp_path / "bad")]) == 2


def test_fit_lpcm_and_gof(tmp_path, cliques):
    out = tmp_path / "lpcm"
    assert main(["fit-lpcm", "--data", cliques, "--clusters", "2", *FAST_LSM, "--seed", "4", "--out", str(out)]) == 0
    for name in ("draws.csv", "clusters.csv", "positions.csv", "draws/labels.csv", "latent_positions.svg"):
        assert (out / name).exists()
    g = tmp_path / "gof"
    assert main(["gof", "--fit", str(out), "--n-sim", "10", "--seed", "1", "--out", str(g)]) == 0
    assert len(read_rows(g / "gof_degree.csv")) == 1 + 21


def test_simulate(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--terms", "edges", "--theta", "0", "--n-nodes", "10", "--n-samples", "50",
                 "--aux-iters", "100", "--seed", "5", "--out", str(out)]) == 0
    rows = read_rows(out / "stats.csv")
    assert len(rows) == 51
    assert 15 < np.mean([float(r[-1]) for r in rows[1:]]) < 30
    assert main(["simulate", "--terms", "edges", "--theta", "0", "--out", str(tmp_path / "x")]) == 2


def test_ergm_to_gof_pipeline_from_one_config(tmp_path, net):
    cfg = {
        "data": {"path": net, "skip_lines": 1},
        "model": {"terms": [{"term": "edges"}, {"term": "gwesp", "phi": 0.6}]},
        "algorithm": {"main_iters": 40, "aux_iters": 200, "n_chains": 3},
        "gof": {"n_sim": 10, "aux_iters": 500},
        "seed": 11,
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    fit, gof = tmp_path / "fit", tmp_path / "gof"
    assert main(["fit-ergm", "--config", str(path), "--out", str(fit)]) == 0
    assert main(["gof", "--config", str(path), "--fit", str(fit), "--out", str(gof)]) == 0
    for out in (fit, gof):
        for name in manifest(out)["outputs"]:
            f = out / name
            assert f.exists() and f.stat().st_size > 0
            if name.endswith(".json"):
                json.loads(f.read_text())
            elif name.endswith(".csv"):
                assert len(read_rows(f)) > 1
    report = json.loads((gof / "gof.json").read_text())
    assert 0.0 <= report["overall"]["coverage"] <= 1.0


def test_convert_round_trip(tmp_path, net, capsys):
    el = tmp_path / "net.edges"
    back = tmp_path / "back.txt"
    assert main(["convert", "--input", net, "--skip-lines", "1", "--output", str(el)]) == 0
    assert main(["convert", "--input", str(el), "--from", "edgelist", "--to", "matrix", "--output", str(back)]) == 0
    original = read_matrix(net, skip_lines=1)
    assert read_matrix(back) == original
    lines = [ln for ln in el.read_text().splitlines() if not ln.startswith("#")]
    assert len(lines) == original.edge_count()
    assert main(["convert", "--input", net, "--skip-lines", "1"]) == 0
    assert capsys.readouterr().out == el.read_text()


def test_convert_directed_preserves_direction(tmp_path):
    src = tmp_path / "d.txt"
    src.write_text("0 1 0\n0 0 1\n0 0 0\n")
    el = tmp_path / "d.edges"
    assert main(["convert", "--input", str(src), "--directed", "--output", str(el)]) == 0
    g = read_edge_list(el)
    assert g.directed and g.has_edge(0, 1) and not g.has_edge(1, 0)
    assert main(["convert", "--input", str(src), "--output", str(el)]) == 2
