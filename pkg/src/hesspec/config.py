"""Configuration parsing: JSON spec files and named vector patterns.

A config is a JSON object with keys
    p, n, mu, cov, w_star, w, model, loss | weight, seed.
Vectors are literal lists or named patterns:
    "zeros"             -- the zero vector,
    "pm_block(r)"       -- [-1...,+1...]/sqrt(p) scaled to norm r,
    "gaussian_norm(r)"  -- a seed-deterministic Gaussian direction of norm r,
    "mu"                -- alias for the resolved mean vector.
Patterns resolve deterministically from the seed through per-field
counter-based streams, so a config file pins the exact spec.
"""
from __future__ import annotations

import json
import re

import numpy as np

from .errors import ConfigError
from .features import DenseSPD, Diagonal, ProblemSpec, ScaledIdentity
from .models import ResponseModel, WeightFn

__all__ = ["load_config", "build_spec", "spec_echo", "resolve_vector"]

_VALID_KEYS = ("p", "n", "mu", "cov", "w_star", "w", "model", "loss",
               "weight", "seed")
_FIELD_STREAMS = {"mu": 1, "w_star": 2, "w": 3}
_LINKS = {"identity": lambda t: t, "tanh": np.tanh}


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(cfg) - set(_VALID_KEYS))
    if unknown:
        raise ConfigError(
            f"unknown config keys {unknown}; valid keys: {list(_VALID_KEYS)}")
    return cfg


def _field_rng(seed, name):
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((int(seed), _FIELD_STREAMS[name]))))


def resolve_vector(entry, p, seed, name, mu=None):
    """Resolve a vector config entry (list or named pattern) to length p."""
    if isinstance(entry, (list, tuple)):
        v = np.asarray(entry, dtype=float)
        if v.shape != (p,):
            raise ConfigError(f"{name} literal must have length p={p}")
        return v
    if not isinstance(entry, str):
        raise ConfigError(f"{name} must be a list or a pattern string")
    if entry == "zeros":
        return np.zeros(p)
    if entry == "mu":
        if mu is None:
            raise ConfigError(f"{name}: 'mu' alias needs mu resolved first")
        return mu.copy()
    m = re.fullmatch(r"pm_block\(([^)]+)\)", entry)
    if m:
        if p % 2:
            raise ConfigError("pm_block requires even p")
        base = np.concatenate([-np.ones(p // 2), np.ones(p // 2)]) / np.sqrt(p)
        return base * float(m.group(1))
    m = re.fullmatch(r"gaussian_norm\(([^)]+)\)", entry)
    if m:
        v = _field_rng(seed, name).standard_normal(p)
        return v / np.linalg.norm(v) * float(m.group(1))
    raise ConfigError(f"{name}: unknown vector pattern {entry!r}")


def _resolve_cov(entry, p):
    if entry is None:
        return ScaledIdentity(1.0)
    if isinstance(entry, (int, float)):
        return ScaledIdentity(float(entry))
    if isinstance(entry, (list, tuple)):
        return Diagonal(np.asarray(entry, dtype=float))
    if isinstance(entry, dict):
        if "scale" in entry:
            return ScaledIdentity(float(entry["scale"]))
        if "diag" in entry:
            return Diagonal(np.asarray(entry["diag"], dtype=float))
        if "diag_blocks" in entry:
            parts = [np.full(int(count), float(val))
                     for val, count in entry["diag_blocks"]]
            d = np.concatenate(parts)
            if len(d) != p:
                raise ConfigError("diag_blocks counts must sum to p")
            return Diagonal(d)
        if "matrix" in entry:
            return DenseSPD(np.asarray(entry["matrix"], dtype=float))
    raise ConfigError(f"cannot interpret covariance entry {entry!r}")


def _resolve_model(entry):
    if entry is None or entry == "logistic":
        return ResponseModel.logistic()
    if entry == "phase_retrieval":
        return ResponseModel.phase_retrieval()
    if isinstance(entry, dict):
        kind = entry.get("kind")
        if kind == "noisy_factor":
            link = _LINKS.get(entry.get("link", "identity"))
            if link is None:
                raise ConfigError(f"unknown link {entry.get('link')!r}")
            return ResponseModel.noisy_factor(link=link,
                                              sigma=float(entry.get("sigma", 0.0)))
        if kind == "single_layer_nn":
            act = _LINKS.get(entry.get("activation", "tanh"))
            if act is None:
                raise ConfigError(f"unknown activation {entry.get('activation')!r}")
            return ResponseModel.single_layer_nn(activation=act)
    raise ConfigError(f"cannot interpret model entry {entry!r}")


def _resolve_weight(cfg, p, n):
    loss = cfg.get("loss")
    weight = cfg.get("weight")
    if loss is not None and weight is not None:
        raise ConfigError("give either 'loss' or 'weight', not both")
    if weight is None:
        return WeightFn.loss_curvature(loss or "logistic")
    if weight == "trim":
        return WeightFn.trim(p / n)
    raise ConfigError(f"unknown weight {weight!r} (expected 'trim')")


def build_spec(cfg):
    """Resolve a parsed config dict into a ProblemSpec and its seed."""
    try:
        p = int(cfg["p"])
        n = int(cfg["n"])
    except KeyError as err:
        raise ConfigError(f"config missing required key {err}")
    seed = int(cfg.get("seed", 0))
    mu = resolve_vector(cfg.get("mu", "zeros"), p, seed, "mu")
    w_star = resolve_vector(cfg.get("w_star", "zeros"), p, seed, "w_star", mu=mu)
    w = resolve_vector(cfg.get("w", "zeros"), p, seed, "w", mu=mu)
    spec = ProblemSpec(p=p, n=n, mu=mu, cov=_resolve_cov(cfg.get("cov"), p),
                       w_star=w_star, w=w, model=_resolve_model(cfg.get("model")),
                       weight=_resolve_weight(cfg, p, n))
    return spec, seed


def _cov_echo(cov):
    if isinstance(cov, ScaledIdentity):
        return {"kind": "scaled_identity", "scale": cov.scale}
    if isinstance(cov, Diagonal):
        return {"kind": "diagonal", "entries": cov.entries.tolist()}
    return {"kind": "dense_spd", "matrix": cov.matrix.tolist()}


def spec_echo(spec, seed=None):
    """Fully resolved spec (vectors expanded) for report documents."""
    model = spec.model
    weight = spec.weight
    echo = {
        "p": spec.p,
        "n": spec.n,
        "mu": spec.mu.tolist(),
        "w_star": spec.w_star.tolist(),
        "w": spec.w.tolist(),
        "cov": _cov_echo(spec.cov),
        "model": {"kind": model.kind, "sigma": model.sigma},
        "weight": {"kind": weight.kind, "loss": weight.loss,
                   "bounds": list(weight.bounds) if weight.bounds else None},
    }
    if seed is not None:
        echo["seed"] = int(seed)
    return echo
