"""Command-line interface: ``netbayes <subcommand> [options]``.

Every run subcommand (fit-ergm, fit-lsm, fit-lpcm, simulate, gof) takes
an optional ``--config`` run file (JSON, see ``RUN_SCHEMA``); flags given
on the command line override values from the file. Results go to
``--out``, defaulting to ``$NETBAYES_OUT/<subcommand>``. Each run writes
``manifest.json``, also when it fails.

Exit status: 0 success, 2 configuration or input errors, 1 runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import difflib
import json
import os
import sys
import time

import jsonschema
import numpy as np

COMMANDS = ("fit-ergm", "fit-lsm", "fit-lpcm", "simulate", "gof", "convert", "summary")
OUT_ENV = "NETBAYES_OUT"

_POS_INT = {"type": "integer", "minimum": 1}
_NONNEG_INT = {"type": "integer", "minimum": 0}
_POS_NUM = {"type": "number", "exclusiveMinimum": 0}
_SEED = {"type": ["integer", "null"], "minimum": 0}

RUN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "data": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "skip_lines": _NONNEG_INT,
                "format": {"enum": ["matrix", "edgelist"]},
                "directed": {"type": "boolean"},
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "terms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["term"],
                        "properties": {
                            "term": {"enum": ["edges", "gwesp", "gwnsp"]},
                            "phi": {"type": "number", "minimum": 0},
                        },
                    },
                },
                "dim": _POS_INT,
                "metric": {"enum": ["ed", "sed", "bilinear"]},
                "clusters": _POS_INT,
            },
        },
        "algorithm": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "main_iters": _POS_INT,
                "aux_iters": _POS_INT,
                "n_chains": {"type": "integer", "minimum": 3},
                "burn_in": _NONNEG_INT,
                "ads_gamma": _POS_NUM,
                "ads_noise_sd": _POS_NUM,
                "init_sd": {"type": "number", "minimum": 0},
                "proposal": {"enum": ["tnt", "tie_no_tie", "random", "random_dyad"]},
                "prior": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["gaussian", "flat"]},
                        "scale": _POS_NUM,
                        "mean": {"type": "array", "items": {"type": "number"}},
                        "cov": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                    },
                },
                "lag": _POS_INT,
                "method": {"enum": ["mcmc", "vb"]},
                "iters": _POS_INT,
                "thin": _POS_INT,
                "proposal_sds": {"type": "array", "items": _POS_NUM, "minItems": 2, "maxItems": 2},
                "adapt": {"type": "boolean"},
                "init": {"enum": ["fruchterman_reingold", "fr", "random", "geodesic_mds", "mds"]},
                "max_iters": _POS_INT,
                "tol": _POS_NUM,
                "n_starts": _POS_INT,
                "random_z": {"type": "boolean"},
                "lsm_prior": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "alpha_mean": {"type": "number"},
                        "alpha_var": _POS_NUM,
                        "z_var": _POS_NUM,
                        "mu_var": _POS_NUM,
                        "sigma2_shape": _POS_NUM,
                        "sigma2_scale": _POS_NUM,
                        "dirichlet": _POS_NUM,
                    },
                },
                "theta": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "n_samples": _POS_INT,
                "n_nodes": _POS_INT,
            },
        },
        "gof": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_sim": _POS_INT,
                "aux_iters": _POS_INT,
                "n_deg": _POS_INT,
                "n_esp": _POS_INT,
                "n_dist": _POS_INT,
                "n_jobs": {"type": ["integer", "null"]},
            },
        },
        "seed": _SEED,
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}

DEFAULTS = {
    "data": {"skip_lines": 0, "format": "matrix"},
    "model": {"dim": 2, "clusters": 2},
    "algorithm": {
        "main_iters": 1200, "aux_iters": 3000, "n_chains": 9, "ads_gamma": 0.5, "ads_noise_sd": 0.05,
        "init_sd": 0.1, "proposal": "tnt", "prior": {"kind": "gaussian", "scale": 100.0}, "lag": 200,
        "method": "mcmc", "iters": 50000, "thin": 10, "proposal_sds": [0.2, 0.1], "adapt": True,
        "init": "fruchterman_reingold", "max_iters": 500, "tol": 1e-6, "n_starts": 1, "random_z": False,
        "lsm_prior": {}, "n_samples": 100,
    },
    "gof": {"n_sim": 100, "aux_iters": 10000, "n_deg": 20, "n_esp": 15, "n_dist": 15, "n_jobs": None},
}

# flag dest -> (section, key) for overriding the run file
_FLAG_MAP = {
    "data": ("data", "path"),
    "skip_lines": ("data", "skip_lines"),
    "format": ("data", "format"),
    "directed": ("data", "directed"),
    "dim": ("model", "dim"),
    "metric": ("model", "metric"),
    "clusters": ("model", "clusters"),
    "main_iters": ("algorithm", "main_iters"),
    "aux_iters": ("algorithm", "aux_iters"),
    "n_chains": ("algorithm", "n_chains"),
    "burn_in": ("algorithm", "burn_in"),
    "proposal": ("algorithm", "proposal"),
    "prior_scale": ("algorithm", "prior", "scale"),
    "lag": ("algorithm", "lag"),
    "method": ("algorithm", "method"),
    "iters": ("algorithm", "iters"),
    "thin": ("algorithm", "thin"),
    "max_iters": ("algorithm", "max_iters"),
    "tol": ("algorithm", "tol"),
    "n_starts": ("algorithm", "n_starts"),
    "random_z": ("algorithm", "random_z"),
    "theta": ("algorithm", "theta"),
    "n_samples": ("algorithm", "n_samples"),
    "n_nodes": ("algorithm", "n_nodes"),
    "n_sim": ("gof", "n_sim"),
    "gof_aux_iters": ("gof", "aux_iters"),
    "n_deg": ("gof", "n_deg"),
    "n_esp": ("gof", "n_esp"),
    "n_dist": ("gof", "n_dist"),
    "n_jobs": ("gof", "n_jobs"),
    "seed": ("seed",),
    "out": ("output", "dir"),
}


class ConfigError(Exception):
    """Invalid run configuration or unreadable input; maps to exit status 2."""


def _version():
    from importlib.metadata import PackageNotFoundError, version

    try:
        return version("artifact")
    except PackageNotFoundError:
        from . import __version__

        return __version__


def _load_json(path, what):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def validate_config(cfg, source="config"):
    """Raise :class:`ConfigError` listing every schema violation with its field path."""
    validator = jsonschema.Draft7Validator(RUN_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        lines = []
        for e in errors:
            where = ".".join(map(str, e.absolute_path)) or "<root>"
            lines.append(f"{source}: field '{where}': {e.message}")
        raise ConfigError("\n".join(lines))
    return cfg


def _set(cfg, path, value):
    node = cfg
    for key in path[:-1]:
        node = node.setdefault(key, {})
    node[path[-1]] = value


def _deep_defaults(cfg, defaults):
    out = json.loads(json.dumps(defaults))
    for key, val in cfg.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_defaults(val, out[key])
        else:
            out[key] = val
    return out


def _parse_terms(text):
    """``"edges,gwesp:0.6"`` -> list of term dicts."""
    terms = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        name, _, phi = item.partition(":")
        entry = {"term": name.strip().lower()}
        if phi:
            try:
                entry["phi"] = float(phi)
            except ValueError:
                raise ConfigError(f"--terms: bad decay value in {item!r}") from None
        terms.append(entry)
    return terms


def _parse_theta(text):
    try:
        val = json.loads(text) if text.strip().startswith("[") else [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--theta: cannot parse {text!r}; use '-1,0.5' or '[-1, 0.5]'") from None
    return [float(v) for v in np.atleast_1d(val)]


def resolve_config(args):
    """Merge run file, model file and flags into one validated config dict."""
    cfg = {}
    if getattr(args, "config", None):
        cfg = _load_json(args.config, "run config")
        validate_config(cfg, args.config)
    model_cfg = getattr(args, "model_config", None)
    if model_cfg:
        terms = _load_json(model_cfg, "model config")
        if isinstance(terms, dict) and "terms" in terms:
            terms = terms["terms"]
        _set(cfg, ("model", "terms"), terms)
    if getattr(args, "terms", None):
        _set(cfg, ("model", "terms"), _parse_terms(args.terms))
    for dest, path in _FLAG_MAP.items():
        val = getattr(args, dest, None)
        if val is None:
            continue
        if dest == "theta":
            val = _parse_theta(val)
        _set(cfg, path, val)
    validate_config(cfg, "command line")
    return cfg


def _out_dir(cfg, command):
    out = cfg.get("output", {}).get("dir")
    if out:
        return out
    return os.path.join(os.environ.get(OUT_ENV, "netbayes-out"), command)


def _fmt(v):
    return repr(float(v))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_graph(cfg):
    from .graph import GraphFormatError, read_graph

    data = cfg.get("data", {})
    path = data.get("path")
    if not path:
        raise ConfigError("no input network: pass --data or set data.path")
    fmt = data.get("format", "matrix")
    try:
        directed = data.get("directed")
        if fmt == "matrix":
            directed = bool(directed)
        return read_graph(path, fmt=fmt, skip_lines=data.get("skip_lines", 0), directed=directed)
    except GraphFormatError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read network {path}: {exc.strerror}") from None


def _model(cfg):
    from .netstats import ModelSpec

    terms = cfg.get("model", {}).get("terms")
    if not terms:
        raise ConfigError("no model terms: pass --model-config/--terms or set model.terms")
    try:
        return ModelSpec.from_config(terms)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None


def _build(fn, what):
    try:
        return fn()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{what}: {exc}") from None


# ---------------------------------------------------------------- commands


def _cmd_fit_ergm(cfg, out):
    from .ergm import FitConfig, Prior, fit_ergm, summarize
    from .plotting import mcmc_panels

    alg = cfg["algorithm"]
    g = _load_graph(cfg)
    model = _model(cfg)
    _build(lambda: model.check_graph(g), "model")
    prior = _build(lambda: Prior(**alg["prior"]), "algorithm.prior")
    fit_cfg = _build(lambda: FitConfig(
        main_iters=alg["main_iters"], aux_iters=alg["aux_iters"], n_chains=alg["n_chains"],
        ads_gamma=alg["ads_gamma"], ads_noise_sd=alg["ads_noise_sd"], burn_in=alg.get("burn_in"),
        init_sd=alg["init_sd"], proposal=alg["proposal"], seed=cfg["seed"],
    ), "algorithm")
    _build(lambda: prior.logpdf(np.zeros(len(model))), "algorithm.prior")
    d = fit_ergm(g, model, prior, fit_cfg)
    names = model.names
    kept = d.draws.shape[1]
    rows = [
        [c + 1, fit_cfg.burn_in + t + 1] + [_fmt(v) for v in d.draws[c, t]]
        for c in range(d.n_chains) for t in range(kept)
    ]
    files = [_write_csv(os.path.join(out, "draws.csv"), ["chain", "iter", *names], rows)]
    s = summarize(d, lag=min(alg["lag"], kept - 1)) if kept > 1 else None
    summary = {"accept_count": d.accept_count.tolist(), "main_iters": fit_cfg.main_iters,
               "burn_in": fit_cfg.burn_in}
    if s is not None:
        summary.update(s.to_dict())
        acf_rows = [[k] + [_fmt(v) for v in s.acf[:, k]] for k in range(s.acf.shape[1])]
        files.append(_write_csv(os.path.join(out, "acf.csv"), ["lag", *names], acf_rows))
        print(s)
    files.append(_write_json(os.path.join(out, "summary.json"), summary))
    files.append(mcmc_panels(d.draws, names, os.path.join(out, "diagnostics.svg"),
                             max_lag=min(alg["lag"], max(kept - 1, 1))))
    return files


def _lsm_prior(cfg):
    from .lsm.prior import LsmPrior

    return _build(lambda: LsmPrior(**cfg["algorithm"]["lsm_prior"]), "algorithm.lsm_prior")


def _write_positions(path, Z):
    header = ["node"] + [f"z{k + 1}" for k in range(Z.shape[1])]
    return _write_csv(path, header, [[i + 1] + [_fmt(v) for v in z] for i, z in enumerate(Z)])


def _write_lsm_draws(out, res):
    ddir = os.path.join(out, "draws")
    os.makedirs(ddir, exist_ok=True)
    files = [_write_csv(os.path.join(out, "draws.csv"), ["draw", "alpha", "loglik"],
                        [[t + 1, _fmt(a), _fmt(ll)] for t, (a, ll) in enumerate(zip(res.alpha, res.loglik))])]
    d = res.Z.shape[2]
    rows = [[t + 1, i + 1] + [_fmt(v) for v in res.Z[t, i]]
            for t in range(res.n_draws) for i in range(res.Z.shape[1])]
    files.append(_write_csv(os.path.join(ddir, "positions.csv"),
                            ["draw", "node"] + [f"z{k + 1}" for k in range(d)], rows))
    return files


def _cmd_fit_lsm(cfg, out, clusters=None):
    from .lsm.lpcm import fit_lpcm_mcmc
    from .lsm.mcmc import fit_lsm_mcmc
    from .lsm.vb import fit_lsm_vb
    from .plotting import elbo_trace, latent_positions

    alg, mod = cfg["algorithm"], cfg["model"]
    g = _load_graph(cfg)
    prior = _lsm_prior(cfg)
    seed = cfg["seed"]
    method = "mcmc" if clusters is not None else alg["method"]
    if mod.get("metric") is None:
        mod["metric"] = "sed" if method == "vb" else "ed"
    burn = alg.get("burn_in", 10000)
    files = []
    labels = None
    if method == "vb":
        if mod["metric"] != "sed":
            raise ConfigError("model.metric: variational fitting supports 'sed' only")
        res = fit_lsm_vb(g, mod["dim"], prior, alg["max_iters"], alg["tol"], alg["n_starts"],
                         alg["random_z"], seed)
        Z, alpha = res.Zmean, {"alpha": float(res.xi), **res.to_dict()}
        files.append(_write_csv(os.path.join(out, "elbo.csv"), ["iter", "elbo"],
                                [[t, _fmt(v)] for t, v in enumerate(res.elbo_trace)]))
        state = {**res.to_dict(), "Zmean": res.Zmean.tolist(), "elbo_trace": res.elbo_trace.tolist()}
        files.append(_write_json(os.path.join(out, "variational.json"), state))
        files.append(elbo_trace(res.elbo_trace, os.path.join(out, "elbo.svg")))
    else:
        if not alg["iters"] > burn:
            raise ConfigError("algorithm: need iters > burn_in")
        if mod["metric"] == "bilinear" and not g.directed:
            raise ConfigError("model.metric: the bilinear metric needs a directed network")
        if clusters is not None:
            if clusters > g.n:
                raise ConfigError(f"model.clusters: {clusters} exceeds the number of nodes ({g.n})")
            if mod["metric"] != "ed":
                raise ConfigError("model.metric: cluster models use the 'ed' metric")
            res = _build(lambda: fit_lpcm_mcmc(
                g, mod["dim"], clusters, prior, alg["iters"], burn, tuple(alg["proposal_sds"]), seed,
                alg["thin"], alg["init"], alg["adapt"]), "algorithm")
        else:
            res = _build(lambda: fit_lsm_mcmc(
                g, mod["dim"], mod["metric"], prior, alg["iters"], burn, tuple(alg["proposal_sds"]), seed,
                alg["thin"], alg["init"], alg["adapt"]), "algorithm")
        Z = res.mean_positions()
        alpha = {"alpha": res.mean_alpha(), "alpha_sd": float(res.alpha.std(ddof=1)) if res.n_draws > 1 else 0.0,
                 "accept_z": float(res.accept_z), "accept_alpha": float(res.accept_alpha),
                 "proposal_sds": [float(v) for v in res.proposal_sds], "n_draws": int(res.n_draws),
                 "reference_draw": int(res.reference) + 1}
        files += _write_lsm_draws(out, res)
        if clusters is not None:
            labels = res.modal_labels()
            probs = res.membership_probabilities()
            G = res.n_clusters
            files.append(_write_csv(
                os.path.join(out, "clusters.csv"), ["node", "cluster"] + [f"p{k + 1}" for k in range(G)],
                [[i + 1, int(labels[i]) + 1] + [_fmt(v) for v in probs[i]] for i in range(g.n)]))
            ddir = os.path.join(out, "draws")
            files.append(_write_csv(
                os.path.join(ddir, "labels.csv"), ["draw"] + [f"node{i + 1}" for i in range(g.n)],
                [[t + 1] + [int(v) + 1 for v in res.labels[t]] for t in range(res.n_draws)]))
            files.append(_write_csv(
                os.path.join(ddir, "components.csv"),
                ["draw", "cluster", "weight", "sigma2"] + [f"mu{k + 1}" for k in range(mod["dim"])],
                [[t + 1, k + 1, _fmt(res.weights[t, k]), _fmt(res.sigma2[t, k])] + [_fmt(v) for v in res.mu[t, k]]
                 for t in range(res.n_draws) for k in range(G)]))
    files.append(_write_positions(os.path.join(out, "positions.csv"), Z))
    files.append(_write_json(os.path.join(out, "alpha.json"), alpha))
    files.append(latent_positions(Z, g, os.path.join(out, "latent_positions.svg"), labels=labels))
    return files


def _cmd_fit_lpcm(cfg, out):
    return _cmd_fit_lsm(cfg, out, clusters=cfg["model"]["clusters"])


def _cmd_simulate(cfg, out):
    from .graph import Graph
    from .simulate import SimConfig, sample_stats

    alg = cfg["algorithm"]
    model = _model(cfg)
    theta = alg.get("theta")
    if theta is None:
        raise ConfigError("no parameter vector: pass --theta or set algorithm.theta")
    if len(theta) != len(model):
        raise ConfigError(f"algorithm.theta: {len(theta)} values for {len(model)} model terms")
    if cfg.get("data", {}).get("path"):
        start = _load_graph(cfg)
    elif alg.get("n_nodes"):
        start = Graph.empty(alg["n_nodes"], directed=bool(cfg.get("data", {}).get("directed")))
    else:
        raise ConfigError("no network size: pass --n-nodes or a starting network via --data")
    _build(lambda: model.check_graph(start), "model")
    sim = SimConfig(aux_iters=alg["aux_iters"], proposal=alg["proposal"], seed=cfg["seed"], start=start)
    stats = sample_stats(theta, model, sim, alg["n_samples"], thin=alg["aux_iters"])
    path = _write_csv(os.path.join(out, "stats.csv"), model.names, [[_fmt(v) for v in row] for row in stats])
    return [path]


def _read_csv(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return rows[0], rows[1:]


def _read_fit(fit_dir):
    """(manifest, kind, payload) for a finished fit directory."""
    manifest = _load_json(os.path.join(fit_dir, "manifest.json"), "fit manifest")
    if manifest.get("status") != "ok":
        raise ConfigError(f"{fit_dir}: the fit did not complete successfully")
    command = manifest["command"]
    fcfg = manifest["config"]
    if command == "fit-ergm":
        header, rows = _read_csv(os.path.join(fit_dir, "draws.csv"))
        draws = np.array([[float(v) for v in r[2:]] for r in rows])
        chains = np.array([int(r[0]) for r in rows])
        return manifest, "ergm", (draws, chains)
    if command in ("fit-lsm", "fit-lpcm"):
        if command == "fit-lsm" and fcfg["algorithm"]["method"] == "vb":
            from .lsm.vb import VariationalState

            st = _load_json(os.path.join(fit_dir, "variational.json"), "variational state")
            return manifest, "vb", VariationalState(
                xi=st["xi"], psi2=st["psi2"], Zmean=np.array(st["Zmean"]), Sigma=np.array(st["Sigma"]),
                elbo_trace=np.array(st["elbo_trace"]), converged=st["converged"], n_iter=st["n_iter"])
        from .lsm.mcmc import LsmDraws

        _, rows = _read_csv(os.path.join(fit_dir, "draws.csv"))
        alpha = np.array([float(r[1]) for r in rows])
        ll = np.array([float(r[2]) for r in rows])
        _, prow = _read_csv(os.path.join(fit_dir, "draws", "positions.csv"))
        flat = np.array([[float(v) for v in r[2:]] for r in prow])
        Z = flat.reshape(alpha.size, -1, flat.shape[1])
        info = _load_json(os.path.join(fit_dir, "alpha.json"), "alpha summary")
        metric = "ed" if command == "fit-lpcm" else fcfg["model"]["metric"]
        return manifest, "lsm", LsmDraws(Z=Z, alpha=alpha, loglik=ll, metric=metric,
                                         reference=int(np.argmax(ll)), accept_z=info["accept_z"],
                                         accept_alpha=info["accept_alpha"],
                                         proposal_sds=tuple(info["proposal_sds"]))
    raise ConfigError(f"{fit_dir}: '{command}' runs have no posterior to check")


def _cmd_gof(cfg, out, fit_dir):
    from .gof import GofConfig, emit_gof, gof_ergm, gof_lsm

    manifest, kind, payload = _read_fit(fit_dir)
    fcfg = manifest["config"]
    if not cfg.get("data", {}).get("path"):
        cfg["data"] = fcfg["data"]
    g = _load_graph(cfg)
    gcfg = _build(lambda: GofConfig(seed=cfg["seed"], **cfg["gof"]), "gof")
    if kind == "ergm":
        c = {**cfg, "model": fcfg["model"]}
        s = gof_ergm(payload[0], g, _model(c), gcfg)
    else:
        s = gof_lsm(payload, g, cfg=gcfg)
    files = emit_gof(s, out)
    report = s.report()
    files.append(_write_json(os.path.join(out, "gof.json"), {"fit": os.path.abspath(fit_dir), **report}))
    print(json.dumps(report["overall"]))
    return files


def _cmd_convert(args):
    from .graph import GraphFormatError, read_graph

    try:
        g = read_graph(args.input, fmt=args.source_format, skip_lines=args.skip_lines,
                       directed=args.directed if args.source_format == "matrix" or args.directed else None)
    except GraphFormatError as exc:
        raise ConfigError(f"{args.input}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc.strerror}") from None
    text = g.to_matrix_text() if args.target_format == "matrix" else g.to_edge_list_text()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_summary(args):
    from .ergm import FitConfig, PosteriorDraws, summarize
    from .netstats import ModelSpec

    manifest, kind, payload = _read_fit(args.fit)
    fcfg = manifest["config"]
    if kind == "ergm":
        draws, chains = payload
        info = _load_json(os.path.join(args.fit, "summary.json"), "summary")
        n_chains = int(chains.max())
        arr = draws.reshape(n_chains, -1, draws.shape[1])
        alg = fcfg["algorithm"]
        fit_cfg = FitConfig(main_iters=info["main_iters"], burn_in=info["burn_in"], n_chains=max(n_chains, 3),
                            aux_iters=alg["aux_iters"])
        d = PosteriorDraws(arr, np.array(info["accept_count"]), ModelSpec.from_config(fcfg["model"]["terms"]),
                           fit_cfg)
        lag = args.lag if args.lag is not None else alg.get("lag", 200)
        print(summarize(d, lag=min(lag, arr.shape[1] - 1)))
    else:
        info = _load_json(os.path.join(args.fit, "alpha.json"), "alpha summary")
        print(json.dumps(info, indent=2, sort_keys=True))


_RUNNERS = {
    "fit-ergm": _cmd_fit_ergm,
    "fit-lsm": _cmd_fit_lsm,
    "fit-lpcm": _cmd_fit_lpcm,
    "simulate": _cmd_simulate,
}


# ---------------------------------------------------------------- parser


def _common(p, data=True):
    p.add_argument("--config", help="run configuration (JSON)")
    if data:
        p.add_argument("--data", help="network file")
        p.add_argument("--skip-lines", type=int, help="header lines to skip in a matrix file")
        p.add_argument("--format", choices=("matrix", "edgelist"), help="network file format")
        p.add_argument("--directed", action="store_const", const=True, help="treat the network as directed")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<subcommand>)")


def build_parser():
    parser = argparse.ArgumentParser(prog="netbayes", description="Bayesian inference for binary networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("fit-ergm", help="ERGM posterior by the exchange algorithm")
    _common(p)
    p.add_argument("--model-config", help="JSON list of {term, phi}")
    p.add_argument("--terms", help="shorthand such as 'edges,gwesp:0.6,gwnsp:0.6'")
    p.add_argument("--main-iters", type=int)
    p.add_argument("--aux-iters", type=int)
    p.add_argument("--n-chains", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--proposal", choices=("tnt", "random"))
    p.add_argument("--prior-scale", type=float, help="variance of the N(0, s I) prior")
    p.add_argument("--lag", type=int, help="largest autocorrelation lag reported")

    for name, helptext in (("fit-lsm", "latent space model by MCMC or VB"),
                           ("fit-lpcm", "latent position cluster model by MCMC")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--dim", type=int)
        p.add_argument("--metric", choices=("ed", "sed", "bilinear"))
        p.add_argument("--iters", type=int, help="MCMC iterations including burn-in")
        p.add_argument("--burn-in", type=int)
        p.add_argument("--thin", type=int)
        if name == "fit-lsm":
            p.add_argument("--method", choices=("mcmc", "vb"))
            p.add_argument("--max-iters", type=int, help="VB iteration limit")
            p.add_argument("--tol", type=float, help="VB stopping tolerance")
            p.add_argument("--n-starts", type=int)
            p.add_argument("--random-z", action="store_const", const=True, help="random VB starting positions")
        else:
            p.add_argument("--clusters", type=int)

    p = sub.add_parser("simulate", help="statistics of graphs simulated at a fixed theta")
    _common(p)
    p.add_argument("--model-config")
    p.add_argument("--terms")
    p.add_argument("--theta", help="parameter vector, '-1,0.5' or '[-1, 0.5]'")
    p.add_argument("--n-nodes", type=int, help="size of the empty starting graph")
    p.add_argument("--aux-iters", type=int, help="proposals before the first sample and between samples")
    p.add_argument("--n-samples", type=int)
    p.add_argument("--proposal", choices=("tnt", "random"))

    p = sub.add_parser("gof", help="posterior-predictive goodness of fit for a finished fit")
    _common(p)
    p.add_argument("--fit", required=True, help="output directory of a fit-* run")
    p.add_argument("--n-sim", type=int)
    p.add_argument("--aux-iters", dest="gof_aux_iters", type=int)
    p.add_argument("--n-deg", type=int)
    p.add_argument("--n-esp", type=int)
    p.add_argument("--n-dist", type=int)
    p.add_argument("--n-jobs", type=int)

    p = sub.add_parser("convert", help="convert between adjacency-matrix and edge-list files")
    p.add_argument("--input", required=True)
    p.add_argument("--from", dest="source_format", choices=("matrix", "edgelist"), default="matrix")
    p.add_argument("--to", dest="target_format", choices=("matrix", "edgelist"), default="edgelist")
    p.add_argument("--skip-lines", type=int, default=0)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--output", help="output file (default stdout)")

    p = sub.add_parser("summary", help="print the posterior summary of a finished fit")
    p.add_argument("--fit", required=True)
    p.add_argument("--lag", type=int)
    return parser


def _suggest(argv):
    if not argv or argv[0].startswith("-") or argv[0] in COMMANDS:
        return None
    close = difflib.get_close_matches(argv[0], COMMANDS, n=1)
    hint = f"; did you mean '{close[0]}'?" if close else ""
    return f"netbayes: unknown subcommand '{argv[0]}'{hint}\nchoose from: {', '.join(COMMANDS)}"


def _execute(args, command, cfg, out, manifest):
    if cfg.get("seed") is None:
        cfg["seed"] = int(np.random.SeedSequence().entropy % 2**32)
    manifest["seed"] = cfg["seed"]
    cfg = _deep_defaults(cfg, DEFAULTS)
    manifest["config"] = cfg
    if command == "gof":
        files = _cmd_gof(cfg, out, args.fit)
    else:
        files = _RUNNERS[command](cfg, out)
    manifest["outputs"] = sorted(os.path.relpath(f, out) for f in files)


def _run(args, command):
    """Run one output-producing subcommand, always leaving a manifest behind."""
    start = time.monotonic()
    manifest = {"command": command, "argv": args._argv, "version": _version(), "status": "error"}
    cfg = {}
    status = 0
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        status = 2
        manifest["error"] = {"type": "config", "message": str(exc)}
        print(f"netbayes: config error: {exc}", file=sys.stderr)
    out = args.out or _out_dir(cfg, command)
    os.makedirs(out, exist_ok=True)
    if status == 0:
        try:
            _execute(args, command, cfg, out, manifest)
            manifest["status"] = "ok"
        except ConfigError as exc:
            status = 2
            manifest["error"] = {"type": "config", "message": str(exc)}
            print(f"netbayes: config error: {exc}", file=sys.stderr)
        except Exception as exc:  # noqa: BLE001 - reported in the manifest and on stderr
            status = 1
            manifest["error"] = {"type": type(exc).__name__, "message": str(exc)}
            print(f"netbayes: error: {type(exc).__name__}: {exc}", file=sys.stderr)
    manifest.setdefault("config", cfg)
    manifest["exit_status"] = status
    manifest["timing"] = {"wall_seconds": round(time.monotonic() - start, 2)}
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return status


def main(argv=None):
    """Entry point; returns the process exit status."""
    argv = sys.argv[1:] if argv is None else list(argv)
    hint = _suggest(argv)
    if hint:
        print(hint, file=sys.stderr)
        return 2
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    args._argv = argv
    if args.command in ("convert", "summary"):
        try:
            (_cmd_convert if args.command == "convert" else _cmd_summary)(args)
        except ConfigError as exc:
            print(f"netbayes: config error: {exc}", file=sys.stderr)
            return 2
        except Exception as exc:  # noqa: BLE001
            print(f"netbayes: error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
        return 0
    return _run(args, args.command)


if __name__ == "__main__":
    sys.exit(main())
