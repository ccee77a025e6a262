"""Command line entry point: ``gmfg {solve,sweep,verify-nagent,smc-compare}``.

Exit codes: 0 success, 2 config/validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, csvio
from .env import MODELS, make_model
from .graphon import ALIASES, KINDS, Graphon
from .meanfield import GRID_SCHEMES, PolicyEnsemble, aggregate, forward_simulate, neighborhood_weights
from .nagent import COLUMNS as DEVIATION_COLUMNS
from .nagent import deviation_experiment, deviation_rows
from .smc import DEFAULT_PROBES, smc_estimate
from .solver import fixed_point_solve, temperature_sweep

log = logging.getLogger("gmfg")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    model: str
    graphon: dict
    M: int = 50
    grid_scheme: str = "midpoint"
    eta: float = 0.0
    max_iters: int = 250
    tol: float = 1e-8
    seed: int = 0
    sweep: dict = field(default_factory=dict)
    nagent: dict = field(default_factory=dict)
    smc: dict = field(default_factory=dict)
    raw: str = field(default="", repr=False)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.raw.encode()).hexdigest()

    def make_graphon(self) -> Graphon:
        return Graphon.from_name(self.graphon["kind"], self.graphon.get("p", 0.5))


def _line_of(raw: str, key: str) -> int:
    needle = f'"{key}"'
    for n, line in enumerate(raw.splitlines(), 1):
        if needle in line:
            return n
    return 1


def _fail(raw, key, msg):
    raise ConfigError(f"line {_line_of(raw, key)}: {key}: {msg}")


def _count(raw, obj, key, default=None, minimum=1):
    val = obj.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int) or val < minimum:
        _fail(raw, key, f"expected an integer >= {minimum}, got {val!r}")
    return val


def _real(raw, obj, key, default=None):
    val = obj.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not np.isfinite(val):
        _fail(raw, key, f"expected a number, got {val!r}")
    return float(val)


def parse_config(raw: str) -> ExperimentConfig:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}: malformed JSON: {e.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError("line 1: config must be a JSON object")
    model = obj.get("model")
    if model not in MODELS:
        _fail(raw, "model", f"expected one of {sorted(MODELS)}, got {model!r}")
    gr = obj.get("graphon")
    if isinstance(gr, str):
        gr = {"kind": gr}
    if not isinstance(gr, dict) or ALIASES.get(gr.get("kind"), gr.get("kind")) not in KINDS[:3]:
        _fail(raw, "graphon", "expected {kind: uniform_attachment|ranked_attachment|erdos_renyi, p?}")
    gr = dict(gr, kind=ALIASES.get(gr["kind"], gr["kind"]))
    if gr["kind"] == "erdos_renyi":
        p = _real(raw, gr, "p", 0.5)
        if not 0 <= p <= 1:
            _fail(raw, "p", "edge probability must lie in [0, 1]")
        gr["p"] = p
    scheme = obj.get("grid_scheme", "midpoint")
    if scheme not in GRID_SCHEMES:
        _fail(raw, "grid_scheme", f"expected one of {GRID_SCHEMES}")
    eta = _real(raw, obj, "eta", 0.0)
    if eta < 0:
        _fail(raw, "eta", "temperature must be >= 0")
    tol = _real(raw, obj, "tol", 1e-8)
    if tol <= 0:
        _fail(raw, "tol", "tolerance must be > 0")
    blocks = {}
    for name in ("sweep", "nagent", "smc"):
        b = obj.get(name, {})
        if not isinstance(b, dict):
            _fail(raw, name, "expected an object")
        blocks[name] = b
    return ExperimentConfig(
        model=model,
        graphon=gr,
        M=_count(raw, obj, "M", 50),
        grid_scheme=scheme,
        eta=eta,
        max_iters=_count(raw, obj, "max_iters", 250),
        tol=tol,
        seed=_count(raw, obj, "seed", 0, minimum=0),
        raw=raw,
        **blocks,
    )


def metadata(cfg: ExperimentConfig, command: str) -> dict:
    return {"command": command, "config_sha256": cfg.digest, "seed": cfg.seed, "version": __version__}


def _solve(cfg: ExperimentConfig):
    return fixed_point_solve(
        make_model(cfg.model), cfg.make_graphon(), cfg.M, cfg.eta, cfg.max_iters, cfg.tol, cfg.grid_scheme
    )


def cmd_solve(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    rep = _solve(cfg)
    meta = metadata(cfg, "solve")
    report = dict(rep.to_dict(), model=cfg.model, graphon=cfg.graphon, metadata=meta)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    meta = dict(meta, grid_scheme=cfg.grid_scheme)
    rep.final_policy.to_csv(out / "policy.csv", meta)
    rep.final_mean_field.to_csv(out / "meanfield.csv", meta)
    log.info("solve: %d iterations, converged=%s, residual=%.3e", rep.iterations, rep.converged, rep.final_residual)
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    etas = cfg.sweep.get("etas")
    if not isinstance(etas, list) or not etas:
        _fail(cfg.raw, "etas", "expected a non-empty list of temperatures")
    if any(isinstance(e, bool) or not isinstance(e, (int, float)) or e < 0 for e in etas):
        _fail(cfg.raw, "etas", "temperatures must be numbers >= 0")
    iters = _count(cfg.raw, cfg.sweep, "iters", cfg.max_iters, minimum=10)
    rows = temperature_sweep(
        make_model(cfg.model), cfg.make_graphon(), cfg.M, etas, iters, cfg.grid_scheme, workers
    )
    csvio.write(
        out / "sweep.csv",
        ("eta", "mean_expl", "min_expl", "max_expl"),
        [(r.eta, r.mean_expl, r.min_expl, r.max_expl) for r in rows],
        metadata(cfg, "sweep"),
    )
    return EXIT_OK


def _load_policy(cfg: ExperimentConfig, block: dict, required: bool) -> Optional[PolicyEnsemble]:
    path = block.get("policy")
    if path is None:
        if required:
            _fail(cfg.raw, "policy", "a policy file is required")
        return None
    if not Path(path).is_file():
        _fail(cfg.raw, "policy", f"policy file {path!r} not found")
    try:
        pol = PolicyEnsemble.from_csv(path)
    except (ValueError, KeyError) as e:
        _fail(cfg.raw, "policy", f"unreadable policy file: {e}")
    model = make_model(cfg.model)
    if pol.grid.M != cfg.M:
        _fail(cfg.raw, "policy", f"policy grid has M={pol.grid.M} but config has M={cfg.M}")
    if pol.probs.shape[1:] != (model.horizon, model.num_states, model.num_actions):
        _fail(cfg.raw, "policy", "policy table does not match the model dimensions")
    return pol


def cmd_verify_nagent(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    pol = _load_policy(cfg, cfg.nagent, required=True)
    Ns = cfg.nagent.get("Ns", [10, 20, 50, 100])
    if not isinstance(Ns, list) or not Ns or any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in Ns):
        _fail(cfg.raw, "Ns", "expected a non-empty list of positive integers")
    graphs = _count(cfg.raw, cfg.nagent, "graphs_per_N", 3)
    episodes = _count(cfg.raw, cfg.nagent, "episodes", 2000)
    model, g = make_model(cfg.model), cfg.make_graphon()
    mf = forward_simulate(model, g, pol)
    table = deviation_experiment(model, g, pol, mf, Ns, graphs, episodes, cfg.seed, workers)
    meta = dict(metadata(cfg, "verify-nagent"), graphs_per_N=graphs, episodes_per_graph=episodes)
    csvio.write(out / "deviation.csv", DEVIATION_COLUMNS, deviation_rows(table), meta)
    return EXIT_OK


def cmd_smc_compare(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    K = _count(cfg.raw, cfg.smc, "K", 5)
    L = _count(cfg.raw, cfg.smc, "L", 200)
    probes = cfg.smc.get("probes", list(DEFAULT_PROBES))
    if not isinstance(probes, list) or not probes or any(
        isinstance(a, bool) or not isinstance(a, (int, float)) or not 0 <= a <= 1 for a in probes
    ):
        _fail(cfg.raw, "probes", "expected a non-empty list of indices in [0, 1]")
    model, g = make_model(cfg.model), cfg.make_graphon()
    pol = _load_policy(cfg, cfg.smc, required=False)
    if pol is None:
        pol = _solve(cfg).final_policy
    mf = forward_simulate(model, g, pol)
    est = smc_estimate(model, g, pol, K, L, cfg.seed, probes)
    exact = aggregate(neighborhood_weights(g, pol.grid, est.probes), np.swapaxes(mf.marginals, 0, 1))
    l1 = np.abs(est.table - np.swapaxes(exact, 0, 1)).sum(axis=-1)  # (probe, t)
    rows = [(a, t, l1[p, t]) for p, a in enumerate(est.probes) for t in range(model.horizon)]
    meta = dict(metadata(cfg, "smc-compare"), K=K, L=L, max_l1=f"{l1.max():.17g}")
    csvio.write(out / "smc_compare.csv", ("alpha", "t", "l1"), rows, meta)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "verify-nagent": cmd_verify_nagent,
    "smc-compare": cmd_smc_compare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gmfg", description="Graphon mean field game solver and verification tools")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON experiment config")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        raw = Path(args.config).read_text()
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(raw)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed: must be >= 0")
            cfg.seed = args.seed
        if args.workers < 1:
            raise ConfigError("--workers: must be >= 1")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.workers)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
