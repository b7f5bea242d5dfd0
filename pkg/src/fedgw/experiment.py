"""Experiment configuration: defaults, file loading, overrides and validation."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, fields
from pathlib import Path

from .errors import ConfigError, FedGWError
from .federated.config import EpsilonPolicy, FedConfig
from .gnn import TrainConfig
from .ot.gromov import SolverConfig

TASKS = ("classify", "cluster", "sweep", "sensitivity", "metric-compare", "encode")

DEFAULTS = {
    "task": None,
    "seed": 0,
    "out": "out",
    "workers": 1,
    "strict": False,
    "raw_mode": False,
    "dataset": {"format": "tu", "path": None, "name": None, "generator": None, "params": {},
                "edges": None, "features": None, "labels": None},
    "fed": {"rounds": 20, "num_clients": 10, "local_epochs": 1, "retrieval_period": 0,
            "dirichlet_alpha": 1.0, "architecture": "gcn", "hidden_dim": 16, "num_layers": 2,
            "gin_mlp_depth": 2, "aggregation": "nodes", "embedding_metric": "euclidean"},
    "train": {"learning_rate": 0.05},
    "solver": {f.name: list(f.default) if isinstance(f.default, tuple) else f.default
               for f in fields(SolverConfig) if f.name != "seed"},
    "ldp": {"epsilon": "default", "m": None},
    "classify": {"trade_off": 0.5, "folds": 10, "c_grid": None, "gamma_grid": None, "knn_k": 5},
    "cluster": {"hops": 1, "max_subgraphs": 500, "k": None, "max_iters": 10, "n_init": 5},
    "sweep": {"eps_list": [0, "default", 0.1, 1], "repeats": 20, "hops": 1, "num_subgraphs": 30},
    "sensitivity": {"mode": "both", "trials": 10, "num_graphs": 50},
    "metric_compare": {"hops": 1, "num_subgraphs": 5, "trade_off": 0.5, "ged_cap": 8},
    "encode": {"input": None, "alpha": 0.0, "beta": 1.0},
}


def deep_merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"{where}: unknown key")
        if isinstance(base[key], dict) and base[key] and key != "params":
            if not isinstance(val, dict):
                raise ConfigError(f"{where}: expected a mapping")
            out[key] = deep_merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def read_config_file(path) -> dict:
    """YAML or JSON mapping; a run manifest (with a ``config`` key) is accepted too."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    text = p.read_text()
    try:
        if p.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            import yaml

            data = yaml.safe_load(text)
    except Exception as exc:
        raise ConfigError(f"{p}: cannot parse ({exc})") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return data


def _build(kind, path, **kw):
    try:
        return kind(**kw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except FedGWError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def resolve(file_cfg: dict, overrides: dict) -> dict:
    """Merge defaults < file < flags and validate every nested section."""
    cfg = deep_merge(DEFAULTS, file_cfg or {})
    for key, val in overrides.items():
        if val is None:
            continue
        section, _, field = key.rpartition(".")
        target = cfg
        for part in filter(None, section.split(".")):
            target = target[part]
        target[field] = val
    if cfg["task"] not in TASKS:
        raise ConfigError(f"task: must be one of {', '.join(TASKS)}")
    if not isinstance(cfg["workers"], int) or cfg["workers"] < 1:
        raise ConfigError("workers: must be a positive integer")
    eps = cfg["ldp"]["epsilon"]
    if eps != "default" and (not isinstance(eps, (int, float)) or eps <= 0):
        raise ConfigError("ldp.epsilon: must be 'default' or a number > 0")
    m = cfg["ldp"]["m"]
    if m is not None and (not isinstance(m, int) or m < 1):
        raise ConfigError("ldp.m: must be a positive integer")
    fed_cfg(cfg)
    train_cfg(cfg)
    solver_cfg(cfg)
    return cfg


def epsilon_policy(cfg) -> EpsilonPolicy:
    eps = cfg["ldp"]["epsilon"]
    return EpsilonPolicy() if eps == "default" else EpsilonPolicy.fixed(eps)


def fed_cfg(cfg, **extra) -> FedConfig:
    kw = dict(cfg["fed"], seed=cfg["seed"], m=cfg["ldp"]["m"], epsilon_policy=epsilon_policy(cfg))
    kw.update(extra)
    return _build(FedConfig, "fed", **kw)


def train_cfg(cfg) -> TrainConfig:
    return _build(TrainConfig, "train", **dict(cfg["train"], seed=cfg["seed"]))


def solver_cfg(cfg) -> SolverConfig:
    kw = dict(cfg["solver"], seed=cfg["seed"])
    kw["extra_starts"] = tuple(kw["extra_starts"])
    return _build(SolverConfig, "solver", **kw)


def describe(cfg) -> dict:
    """JSON-ready copy of the resolved configuration."""
    out = copy.deepcopy(cfg)
    out["resolved"] = {
        "fed": asdict(fed_cfg(cfg)),
        "train": asdict(train_cfg(cfg)),
        "solver": asdict(solver_cfg(cfg)),
    }
    return out
