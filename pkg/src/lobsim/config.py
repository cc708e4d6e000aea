"""Run configuration: schema, validation, and run identity.

A run is described by one YAML file with five sections.  Keys, types and
defaults:

model:
  name: str, one of poisson_k1 | poisson_k | zero_intelligence | queue_reactive
  ... remaining keys are passed to the model's parameter set verbatim:
  poisson_k1:       lam (float, events/time), mu, theta, reinit_p (geometric
                    parameter of the redraw law, default 0.5)
  poisson_k:        K, lam/mu/gam/theta (lists of 2K floats over
                    i = -K..-1, 1..K), theta_reinit in [0,1],
                    boundary_p, reinit_p
  zero_intelligence: K, lam_by_distance / mu_by_distance (lists over
                    distance 0.., tail held), gamma, theta (2K list),
                    theta_reinit, boundary_p, reinit_p
  queue_reactive:   K, lam_tables / mu_tables (K lists over queue size
                    0.., tail held), theta, theta_reinit, boundary_p,
                    reinit_p
  optional plug-ins replacing the model's price-move rates:
    ud_constant: [up_rate, down_rate] (diagnostic override)
    mid_reversion: {theta0, theta1, tick} (price chases the mid)

book:
  K: int, number of visible price levels per side (default from model)
  tick: float, price increment (default 1.0)

simulation:
  max_events: int or null
  max_time: float or null          (at least one must be set)
  seed: int (default 0)
  n_paths: int (default 1)
  burn_in: int, events dropped before statistics (default 0)
  log_every: int, post-event state stored every k-th event (default 1)
  initial_q: list of 2K ints (default all zeros)

analysis:
  z_grid: list of floats (default [1.05, 1.1, 1.2])
  u_grid: list of ints (default [5])
  scan_cap: int, |q_i| bound of the drift scan (default 30)
  lag_window: int or null for the adaptive policy (default null)
  oracle_cap: int, truncation for the stationary solve (default 10)
  price_mode: frozen | collapsed (default frozen)
  state_bound: int (default 2000000)
  symmetric: bool, declared zero-drift expectation (default false)
  n_grid: list of ints (default [1000, 10000, 100000])
  t_grid: list of floats (default [0.5, 1.0, 2.0])

output:
  directory: str (default "out")
  event_log: bool, write per-path CSV logs (default true)
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .models import _MODEL_CLASSES, build_model, validate_params

__all__ = ["RunConfig", "load_config", "config_hash", "TOOL_VERSION"]

TOOL_VERSION = "0.1.0"

_DEFAULTS = {
    "book": {"tick": 1.0},
    "simulation": {
        "max_events": None,
        "max_time": None,
        "seed": 0,
        "n_paths": 1,
        "burn_in": 0,
        "log_every": 1,
        "initial_q": None,
    },
    "analysis": {
        "z_grid": [1.05, 1.1, 1.2],
        "u_grid": [5],
        "scan_cap": 30,
        "lag_window": None,
        "oracle_cap": 10,
        "price_mode": "frozen",
        "state_bound": 2_000_000,
        "symmetric": False,
        "n_grid": [1_000, 10_000, 100_000],
        "t_grid": [0.5, 1.0, 2.0],
    },
    "output": {"directory": "out", "event_log": True},
}


@dataclass
class RunConfig:
    raw: dict
    model_spec: dict
    book: dict
    simulation: dict
    analysis: dict
    output: dict
    hash: str = field(default="")

    def build_model(self):
        return build_model(self.model_spec)


def config_hash(raw: dict) -> str:
    """Stable identity of a config: sha256 of its canonical JSON form."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _merged(section, raw):
    out = dict(_DEFAULTS[section])
    out.update(raw.get(section) or {})
    return out


def load_config(path_or_dict):
    """Parse and validate a run configuration.

    Raises ConfigError with the full list of violations (schema problems
    and model parameter constraint failures) rather than stopping at the
    first one.
    """
    if isinstance(path_or_dict, dict):
        raw = path_or_dict
    else:
        with open(path_or_dict) as fh:
            raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a mapping"])
    violations = []
    unknown = set(raw) - {"model", "book", "simulation", "analysis", "output"}
    if unknown:
        violations.append(f"unknown sections: {sorted(unknown)}")
    model_spec = dict(raw.get("model") or {})
    name = model_spec.get("name")
    if name not in _MODEL_CLASSES:
        violations.append(f"model.name must be one of {sorted(_MODEL_CLASSES)}, got {name!r}")
        raise ConfigError(violations)
    params_cls = _MODEL_CLASSES[name][1]
    plugin_keys = {"name", "ud_constant", "mid_reversion"}
    try:
        params = params_cls(**{k: v for k, v in model_spec.items() if k not in plugin_keys})
    except TypeError as exc:
        violations.append(f"model parameters: {exc}")
        raise ConfigError(violations)
    violations += validate_params(params)

    book = _merged("book", raw)
    book.setdefault("K", getattr(params, "K", 1))
    sim = _merged("simulation", raw)
    ana = _merged("analysis", raw)
    out = _merged("output", raw)

    if sim["max_events"] is None and sim["max_time"] is None:
        violations.append("simulation: one of max_events / max_time required")
    if sim["n_paths"] < 1:
        violations.append("simulation.n_paths must be >= 1")
    if not book["tick"] > 0:
        violations.append("book.tick must be > 0")
    if ana["price_mode"] not in ("frozen", "collapsed"):
        violations.append("analysis.price_mode must be 'frozen' or 'collapsed'")
    if any(z <= 1 for z in ana["z_grid"]):
        violations.append("analysis.z_grid entries must be > 1")
    K = book["K"]
    if sim["initial_q"] is not None and len(sim["initial_q"]) != 2 * K:
        violations.append(f"simulation.initial_q must have {2 * K} entries")
    if violations:
        raise ConfigError(violations)
    return RunConfig(
        raw=raw,
        model_spec=model_spec,
        book=book,
        simulation=sim,
        analysis=ana,
        output=out,
        hash=config_hash(raw),
    )
