"""Run configuration: JSON file, schema-validated, with explicit error paths."""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from . import qmath
from .errors import ConfigError
from .scatter import (
    PhotonDistribution,
    ScatteringGeometry,
    distribution_from_csv,
    make_distribution,
)

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_FRACTION = {"type": "number", "minimum": 0, "maximum": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["seed"],
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "required": ["radius", "permittivity", "displacement", "box_edge", "number_density"],
            "properties": {
                "radius": _POSITIVE,
                "permittivity": _POSITIVE,
                "displacement": {"type": "number", "minimum": 0},
                "box_edge": _POSITIVE,
                "number_density": _POSITIVE,
                "light_speed": _POSITIVE,
            },
        },
        "distribution": {
            "type": "object",
            "properties": {
                "kind": {
                    "enum": ["point", "isotropic_monochromatic", "thermal", "custom", "csv"]
                },
                "csv": {"type": "string"},
            },
            "required": ["kind"],
        },
        "time_grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "start": {"type": "number", "minimum": 0},
                "stop": {"type": "number", "minimum": 0},
                "num": {"type": "integer", "minimum": 1},
                "values": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
        },
        "fractions": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"f": _FRACTION, "m": _FRACTION},
        },
        "overlap": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha_override": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                "unitary_seed": {"type": "integer", "minimum": 0},
            },
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dimension_cap": {"type": "integer", "minimum": 2},
                "instance": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["n_t", "m", "f_grid"],
                    "properties": {
                        "photon_dim": {"type": "integer", "minimum": 2},
                        "env_state": {
                            "type": "object",
                            "properties": {
                                "kind": {
                                    "enum": ["pure_ground", "maximally_mixed", "diag", "random"]
                                },
                                "probs": {"type": "array", "items": {"type": "number"}},
                            },
                            "required": ["kind"],
                        },
                        "branches": {
                            "type": "object",
                            "properties": {
                                "kind": {"enum": ["identity", "rotation", "phase", "haar"]},
                                "angle": {"type": "number"},
                            },
                            "required": ["kind"],
                        },
                        "system": {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {
                                "p1": _FRACTION,
                                "coherence": {
                                    "type": "array",
                                    "items": {"type": "number"},
                                    "minItems": 2,
                                    "maxItems": 2,
                                },
                            },
                        },
                        "n_t": {"type": "integer", "minimum": 0},
                        "m": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                        "f_grid": {
                            "type": "array",
                            "items": _FRACTION,
                            "minItems": 3,
                        },
                    },
                },
            },
        },
        "bounds": {
            "type": "object",
            "additionalProperties": False,
            "required": ["trials"],
            "properties": {
                "trials": {"type": "integer", "minimum": 0},
                "photon_dim": {"type": "integer", "minimum": 2},
                "environment_counts": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                },
                "observed_fractions": {"type": "array", "items": _FRACTION},
                "include_saturation": {"type": "boolean"},
            },
        },
        "pfcast": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dim": {"type": "integer", "minimum": 2},
                "bases": {"type": "integer", "minimum": 1},
            },
        },
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "phase_product": _POSITIVE,
                "phase_plateau": _POSITIVE,
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["command", "grid"],
            "properties": {
                "command": {"enum": ["decoherence", "overlap", "plateau", "bounds", "pfcast"]},
                "grid": {
                    "type": "object",
                    "additionalProperties": {"type": "array", "minItems": 1},
                },
            },
        },
    },
}


def validate_config(cfg: dict) -> dict:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: e.json_path)
    if errors:
        details = "; ".join(f"{e.json_path}: {e.message}" for e in errors)
        raise ConfigError(f"invalid config: {details}")
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return validate_config(cfg)


def require_block(cfg: dict, name: str) -> dict:
    if name not in cfg:
        raise ConfigError(f"config is missing the {name!r} block required by this command")
    return cfg[name]


def build_geometry(cfg: dict) -> ScatteringGeometry:
    g = require_block(cfg, "geometry")
    return ScatteringGeometry(
        radius=g["radius"],
        permittivity=g["permittivity"],
        displacement=g["displacement"],
        box_edge=g["box_edge"],
        number_density=g["number_density"],
        light_speed=g.get("light_speed", 1.0),
    )


def build_distribution(cfg: dict, geom: ScatteringGeometry) -> PhotonDistribution:
    d = dict(require_block(cfg, "distribution"))
    kind = d.pop("kind")
    if kind == "csv":
        if "csv" not in d:
            raise ConfigError("distribution.csv path required for kind 'csv'")
        return distribution_from_csv(d["csv"], geom)
    return make_distribution(kind, geom, **d)


def time_values(cfg: dict) -> list[float]:
    t = require_block(cfg, "time_grid")
    if "values" in t:
        return [float(v) for v in t["values"]]
    for key in ("start", "stop", "num"):
        if key not in t:
            raise ConfigError(f"time_grid needs either 'values' or start/stop/num ({key} missing)")
    return list(np.linspace(t["start"], t["stop"], t["num"]))


def build_instance(cfg: dict, seed: int):
    """(rho_s, env_state, u1, u2, n_t, m, f_grid, dimension_cap) from the oracle block."""
    block = require_block(cfg, "oracle")
    inst = require_block(block, "instance")
    cap = block.get("dimension_cap", 2**14)
    d = inst.get("photon_dim", 2)
    rng = np.random.default_rng(seed)

    env = inst.get("env_state", {"kind": "maximally_mixed"})
    if env["kind"] == "pure_ground":
        rho_e = np.zeros((d, d), dtype=complex)
        rho_e[0, 0] = 1.0
    elif env["kind"] == "maximally_mixed":
        rho_e = np.eye(d, dtype=complex) / d
    elif env["kind"] == "diag":
        probs = np.asarray(env.get("probs", []), dtype=float)
        if probs.shape != (d,) or probs.min() < 0 or abs(probs.sum() - 1.0) > 1e-9:
            raise ConfigError("env_state.probs must be a length-d distribution")
        rho_e = np.diag(probs.astype(complex))
    else:
        rho_e = qmath.random_density_matrix(d, rng)

    branches = inst.get("branches", {"kind": "rotation", "angle": 1.4})
    kind = branches["kind"]
    if kind == "identity":
        u1 = u2 = np.eye(d, dtype=complex)
    elif kind == "rotation":
        if d != 2:
            raise ConfigError("rotation branches require photon_dim = 2")
        theta = float(branches.get("angle", 1.4))
        u1 = rotation_y(-theta)
        u2 = rotation_y(theta)
    elif kind == "phase":
        theta = float(branches.get("angle", math.pi))
        u1 = np.eye(d, dtype=complex)
        u2 = np.diag(np.exp(1j * theta * np.arange(d)))
    else:
        u1 = qmath.random_unitary(d, rng)
        u2 = qmath.random_unitary(d, rng)

    system = inst.get("system", {})
    p1 = float(system.get("p1", 0.5))
    re, im = system.get("coherence", [math.sqrt(p1 * (1 - p1)), 0.0])
    c12 = complex(re, im)
    if abs(c12) > math.sqrt(p1 * (1 - p1)) + 1e-12:
        raise ConfigError("system coherence exceeds sqrt(p1 (1-p1))")
    rho_s = np.array([[p1, c12], [np.conj(c12), 1.0 - p1]], dtype=complex)

    return rho_s, rho_e, u1, u2, int(inst["n_t"]), float(inst["m"]), list(inst["f_grid"]), cap


def rotation_y(theta: float) -> np.ndarray:
    """Real qubit rotation by theta about the y axis."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)
