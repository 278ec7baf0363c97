"""Experiment configuration: defaults, schema validation and hashing."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema
import numpy as np

from ..ensembles import InteractionSpec
from ..errors import ConfigError
from ..model import (
    BareModel,
    SystemSpectrum,
    build_bare_model,
    build_environment_spectrum,
    dos_model_from_dict,
)

PAPER_SCALE_DIM = 4096

DEFAULT_CONFIG = {
    "model": {
        "system_levels": [-1.0, 1.0],
        "environment": {
            "dos": {"kind": "gaussian", "sigma": 1.0},
            "dim": 1024,
            "mode": "quantile",
            "seed": 0,
        },
        # null environment_index -> middle of the environment spectrum
        "initial": {"system_index": 1, "environment_index": None},
        "observed_level": 1,
    },
    "interaction": {
        "kind": "goe",
        "sigma_w": 0.5,
        "band_half_width": 64,
        "wbrm_profile": "flat",
        "rotation_group": "orthogonal",
    },
    "sweep": {
        "sigma_w": {"log": [0.2, 4.0, 9]},
        "seeds": [0, 1, 2, 3, 4, 5, 6, 7],
        "dims": [256, 512, 1024],
    },
    "dynamics": {"t_max": 200.0, "n_times": 400, "window": [100.0, 200.0]},
    "ldos": {"bare_indices": None, "bundle_half_width": 10},
    "transitions": {"rows": None, "cap": 2048},
    "output": {"formats": ["csv", "svg"]},
}

_num = {"type": "number"}
_int_list = {"type": "array", "items": {"type": "integer"}, "minItems": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "system_levels": {"type": "array", "items": _num, "minItems": 1},
                "environment": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "dos": {
                            "type": "object",
                            "properties": {
                                "kind": {"enum": ["gaussian", "explicit"]},
                                "sigma": {"type": "number", "exclusiveMinimum": 0},
                                "center": _num,
                                "levels": {"type": "array", "items": _num, "minItems": 1},
                            },
                            "required": ["kind"],
                        },
                        "dim": {"type": "integer", "minimum": 2},
                        "mode": {"enum": ["quantile", "sampled"]},
                        "seed": {"type": "integer"},
                    },
                },
                "initial": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "system_index": {"type": "integer", "minimum": 0},
                        "environment_index": {"type": ["integer", "null"], "minimum": 0},
                        "weights": {
                            "type": "object",
                            "patternProperties": {"^[0-9]+$": {"type": "number", "minimum": 0}},
                            "additionalProperties": False,
                        },
                    },
                },
                "observed_level": {"type": "integer", "minimum": 0},
            },
        },
        "interaction": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["goe", "wbrm", "rrm"]},
                "sigma_w": {"type": "number", "minimum": 0},
                "band_half_width": {"type": "integer", "minimum": 1},
                "wbrm_profile": {"enum": ["flat"]},
                "rotation_group": {"enum": ["orthogonal", "unitary"]},
                "rrm_spectrum": {"type": "array", "items": _num},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sigma_w": {
                    "oneOf": [
                        {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {
                                "log": {
                                    "type": "array",
                                    "prefixItems": [
                                        {"type": "number", "exclusiveMinimum": 0},
                                        {"type": "number", "exclusiveMinimum": 0},
                                        {"type": "integer", "minimum": 1},
                                    ],
                                    "minItems": 3,
                                    "maxItems": 3,
                                }
                            },
                            "required": ["log"],
                        },
                    ]
                },
                "seeds": _int_list,
                "dims": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
            },
        },
        "dynamics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "n_times": {"type": "integer", "minimum": 2},
                "window": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
            },
        },
        "ldos": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bare_indices": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 0}},
                "bundle_half_width": {"type": "number", "minimum": 0},
            },
        },
        "transitions": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rows": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 0}},
                "cap": {"type": "integer", "minimum": 2},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "formats": {"type": "array", "items": {"enum": ["csv", "svg"]}},
            },
        },
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "weights":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, err.json_path)


def resolve(raw: dict | None = None, paper_scale: bool = False) -> dict:
    """Validate ``raw`` and fill in defaults. Semantic checks follow the schema."""
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    validate(raw)
    cfg = _merge(DEFAULT_CONFIG, raw)
    if paper_scale:
        cfg["model"]["environment"]["dim"] = PAPER_SCALE_DIM
    validate(cfg)
    m = cfg["model"]
    ds = len(m["system_levels"])
    if m["initial"]["system_index"] >= ds:
        raise ConfigError("system_index out of range", "$.model.initial.system_index")
    if m["observed_level"] >= ds:
        raise ConfigError("observed_level out of range", "$.model.observed_level")
    w = cfg["dynamics"]["window"]
    if not 0 <= w[0] < w[1] <= cfg["dynamics"]["t_max"]:
        raise ConfigError("window must satisfy 0 <= t0 < t1 <= t_max", "$.dynamics.window")
    weights = m["initial"].get("weights")
    if weights is not None and abs(sum(weights.values()) - 1.0) > 1e-10:
        raise ConfigError("initial weights must sum to 1", "$.model.initial.weights")
    return cfg


def load(path, paper_scale: bool = False) -> dict:
    try:
        with open(Path(path)) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}")
    return resolve(raw, paper_scale)


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def sigma_grid(cfg: dict) -> list:
    s = cfg["sweep"]["sigma_w"]
    if isinstance(s, dict):
        lo, hi, k = s["log"]
        return [float(x) for x in np.geomspace(lo, hi, int(k))]
    return [float(x) for x in s]


def build_bare(cfg: dict, dim_e: int | None = None) -> BareModel:
    env_cfg = cfg["model"]["environment"]
    dos = dos_model_from_dict(env_cfg["dos"])
    env = build_environment_spectrum(dos, dim_e or env_cfg["dim"], env_cfg["mode"], env_cfg["seed"])
    return build_bare_model(SystemSpectrum(cfg["model"]["system_levels"]), env)


def initial_weights(cfg: dict, bare: BareModel) -> dict:
    init = cfg["model"]["initial"]
    if init.get("weights"):
        weights = {int(k): float(v) for k, v in init["weights"].items()}
        for k in weights:
            if k >= bare.n:
                raise ConfigError(f"bare index {k} out of range", "$.model.initial.weights")
        return weights
    return {initial_index(cfg, bare): 1.0}


def initial_index(cfg: dict, bare: BareModel) -> int:
    """Bare index of the configured product initial state."""
    init = cfg["model"]["initial"]
    e = init.get("environment_index")
    if e is None:
        e = bare.dim_e // 2
    if e >= bare.dim_e:
        raise ConfigError("environment_index out of range", "$.model.initial.environment_index")
    return bare.index(init["system_index"], e)


def interaction_spec(cfg: dict, sigma_w: float, seed: int) -> InteractionSpec:
    ic = cfg["interaction"]
    return InteractionSpec(
        kind=ic["kind"],
        sigma_w=float(sigma_w),
        seed=int(seed),
        band_half_width=ic.get("band_half_width") if ic["kind"] == "wbrm" else None,
        rrm_spectrum=ic.get("rrm_spectrum") if ic["kind"] == "rrm" else None,
        rotation_group=ic.get("rotation_group", "orthogonal"),
    )


def time_grid(cfg: dict) -> np.ndarray:
    d = cfg["dynamics"]
    return np.linspace(0.0, d["t_max"], d["n_times"])
