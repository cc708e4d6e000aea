"""Command-line frontend: reproducible runs driven by one config file.

Subcommands: simulate, check, scaling, oracle.  All options live in the
config file; only the seed and the output directory can be overridden on
the command line.  Exit codes are a stable contract:

  0  success
  2  configuration violation (the violation list is printed)
  3  absorbing state reached during simulation
  4  an assumption or drift check failed (reports still written)
  5  nonzero drift detected although the config declares symmetric: true
  6  truncated state space exceeds the configured bound

The config schema is documented in lobsim.config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .book import LobState
from .config import TOOL_VERSION, load_config
from .drift import check_assumptions, drift_check_ctmc, drift_check_embedded, scan_states
from .errors import ConfigError, StateSpaceTooLargeError
from .kernels import pk1_occupation, supports_fast_path
from .models import PoissonK1Model
from .oracle import shape_statistics, stationary_solve, truncated_generator, tv_distance
from .scaling import scaling_report
from .simulate import CsvEventSink, simulate

__all__ = ["main", "cmd_simulate", "cmd_check", "cmd_scaling", "cmd_oracle"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABSORBING = 3
EXIT_ASSUMPTION = 4
EXIT_NONZERO_DRIFT = 5
EXIT_STATE_SPACE = 6


def _header(cfg, seed):
    return {"config_hash": cfg.hash, "seed": seed, "version": TOOL_VERSION}


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _initial_state(cfg, model):
    K = model.K
    q0 = cfg.simulation["initial_q"]
    q = np.zeros(2 * K, dtype=np.int64) if q0 is None else np.asarray(q0, dtype=np.int64)
    return LobState(q=q, p_ref_half=1, tick=float(cfg.book["tick"]))


def _frozen_spec(spec):
    """Model spec with all price-move intensities zeroed (u = d = 0)."""
    spec = dict(spec)
    th = spec.get("theta")
    if isinstance(th, list):
        spec["theta"] = [0.0] * len(th)
    else:
        spec["theta"] = 0.0
    spec.pop("mid_reversion", None)
    if "ud_constant" in spec:
        spec["ud_constant"] = [0.0, 0.0]
    return spec


def cmd_simulate(cfg, outdir):
    model = cfg.build_model()
    seed = cfg.simulation["seed"]
    n_paths = cfg.simulation["n_paths"]
    seeds = np.random.SeedSequence(seed).spawn(n_paths)
    absorbed_any = False
    for k in range(n_paths):
        log_path = os.path.join(outdir, f"events_{k:04d}.csv")
        sink = None
        fh = None
        if cfg.output["event_log"]:
            fh = open(log_path, "w")
            sink = CsvEventSink(fh, model.K)
        try:
            s = simulate(
                model,
                _initial_state(cfg, model),
                max_events=cfg.simulation["max_events"],
                max_time=cfg.simulation["max_time"],
                rng=np.random.default_rng(seeds[k]),
                seed=(seed, k),
                sink=sink,
                post_state_every=cfg.simulation["log_every"],
            )
        finally:
            if fh is not None:
                fh.close()
        summary = {
            "header": _header(cfg, seed),
            "path": k,
            "n_events": s.n_events,
            "t_final": s.t_final,
            "final_q": [int(x) for x in s.final.q],
            "p_ref_final": s.final.p_ref,
            "z_final_ticks": int(s.c.astype(np.int64).sum()) if s.n_events else 0,
            "absorbed": s.absorbed,
        }
        _write_json(os.path.join(outdir, f"summary_{k:04d}.json"), summary)
        if s.absorbed:
            absorbed_any = True
    if absorbed_any:
        print("absorbing state reached; partial results written", file=sys.stderr)
        return EXIT_ABSORBING
    return EXIT_OK


def cmd_check(cfg, outdir):
    model = cfg.build_model()
    seed = cfg.simulation["seed"]
    ana = cfg.analysis
    scan = scan_states(model, cap=ana["scan_cap"], seed=seed)
    z_grid = tuple(ana["z_grid"])
    u_grid = tuple(ana["u_grid"])
    report = check_assumptions(model, scan, z_grid=z_grid, U_grid=u_grid)
    certs = []
    rng = np.random.default_rng(seed)
    for z in z_grid:
        for U in u_grid:
            certs.append(drift_check_ctmc(model, z, U, scan).to_dict())
            certs.append(drift_check_embedded(model, z, U, scan, rng=rng).to_dict())
    payload = {
        "header": _header(cfg, seed),
        "model": model.name,
        "assumptions": report.to_dict(),
        "certificates": certs,
    }
    _write_json(os.path.join(outdir, "check.json"), payload)
    violated = (not report.all_ok()) or any(c["violated"] for c in certs)
    if violated:
        print("assumption or drift violation detected; see check.json", file=sys.stderr)
        return EXIT_ASSUMPTION
    return EXIT_OK


def cmd_scaling(cfg, outdir):
    model = cfg.build_model()
    sim = cfg.simulation
    ana = cfg.analysis
    seed = sim["seed"]
    if sim["n_paths"] < 2:
        print("warning: single path gives degenerate variance estimates", file=sys.stderr)
    rep = scaling_report(
        model,
        _initial_state(cfg, model).q,
        n_events=sim["max_events"] or 1_000_000,
        burn_in=sim["burn_in"] or None,
        n_paths=sim["n_paths"],
        n_grid=tuple(ana["n_grid"]),
        t_grid=tuple(ana["t_grid"]),
        seed=seed,
        lag_window=ana["lag_window"],
    )
    payload = {"header": _header(cfg, seed), "model": model.name, "report": rep.to_dict()}
    _write_json(os.path.join(outdir, "scaling.json"), payload)
    with open(os.path.join(outdir, "rescaled_terminal.csv"), "w") as fh:
        fh.write("path,value\n")
        for k, v in enumerate(rep.rescaled_terminal):
            fh.write(f"{k},{v:.17g}\n")
    with open(os.path.join(outdir, "autocovariance.csv"), "w") as fh:
        fh.write("lag,gamma\n")
        for k, v in enumerate(rep.autocov):
            fh.write(f"{k},{v:.17g}\n")
    if rep.nonzero_drift and ana["symmetric"]:
        print(
            f"nonzero drift: mean c = {rep.mean_c:.3e} "
            f"({abs(rep.mean_c) / rep.mean_c_stderr:.1f} standard errors) "
            "but config declares symmetric: true",
            file=sys.stderr,
        )
        return EXIT_NONZERO_DRIFT
    return EXIT_OK


def _simulated_occupation(cfg, model):
    """Time-weighted occupation dict for the oracle comparison."""
    sim = cfg.simulation
    n_events = sim["max_events"] or 1_000_000
    burn_in = min(sim["burn_in"], n_events - 1) if sim["burn_in"] else 0
    seed = sim["seed"]
    if isinstance(model, PoissonK1Model) and supports_fast_path(model):
        grid_cap = max(4 * cfg.analysis["oracle_cap"], 50)
        q0 = _initial_state(cfg, model).q
        occ, outside, _, _ = pk1_occupation(model, q0, n_events, burn_in, grid_cap, seed)
        measure = {}
        b_idx, a_idx = np.nonzero(occ)
        for b, a in zip(b_idx, a_idx):
            measure[(-int(b), int(a))] = float(occ[b, a])
        if outside > 0:
            measure["outside"] = float(outside)
        return measure
    s = simulate(
        model,
        _initial_state(cfg, model),
        max_events=n_events,
        seed=seed,
        record_embedded=False,
    )
    return s.occupation


def cmd_oracle(cfg, outdir):
    ana = cfg.analysis
    seed = cfg.simulation["seed"]
    spec = cfg.model_spec
    if ana["price_mode"] == "frozen":
        spec = _frozen_spec(spec)
    from .models import build_model

    model = build_model(spec)
    try:
        gen = truncated_generator(
            model, ana["oracle_cap"], price_mode=ana["price_mode"], state_bound=ana["state_bound"]
        )
    except StateSpaceTooLargeError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_STATE_SPACE
    pi = stationary_solve(gen)
    pi_dict = {s: float(p) for s, p in zip(gen.states, pi)}
    occ = _simulated_occupation(cfg, model)
    cap = ana["oracle_cap"]
    # project onto the truncation box, mirroring the generator's
    # saturation redirection of out-of-cap transitions
    corner = (-cap,) * model.K + (cap,) * model.K
    projected = {}
    for k, v in occ.items():
        key = tuple(max(-cap, min(cap, x)) for x in k) if isinstance(k, tuple) else corner
        projected[key] = projected.get(key, 0.0) + v
    total = sum(projected.values())
    occ_dict = {k: v / total for k, v in projected.items()}
    tv = tv_distance(pi_dict, occ_dict)
    occ_states = dict(occ_dict)
    payload = {
        "header": _header(cfg, seed),
        "model": model.name,
        "cap": ana["oracle_cap"],
        "price_mode": ana["price_mode"],
        "tv_distance": tv,
        "stationary": {",".join(map(str, s)): p for s, p in pi_dict.items()},
        "occupation": {
            (",".join(map(str, k)) if isinstance(k, tuple) else k): v
            for k, v in occ_dict.items()
        },
        "shape_stationary": shape_statistics((gen.states, pi), K=model.K).to_dict(),
        "shape_occupation": shape_statistics(occ_states, K=model.K).to_dict(),
    }
    _write_json(os.path.join(outdir, "oracle.json"), payload)
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "check": cmd_check,
    "scaling": cmd_scaling,
    "oracle": cmd_oracle,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="lobsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the YAML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override simulation.seed")
        p.add_argument("--output-dir", default=None, help="override output.directory")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config violation: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"config violation: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.simulation["seed"] = args.seed
    if args.output_dir is not None:
        cfg.output["directory"] = args.output_dir
    outdir = cfg.output["directory"]
    os.makedirs(outdir, exist_ok=True)
    return _COMMANDS[args.command](cfg, outdir)


if __name__ == "__main__":
    sys.exit(main())
