"""Experiment configuration: JSON schema, validation and construction of objects."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import sympy as sp

from .domains import LevelSetDomain, domain_from_config
from .gaussian import CylFunction, GaussianModel
from .weights import Weight, weight_from_config

CONFIG_VERSION = "wn-config/1"
REPORT_VERSION = "wn-report/1"

_number_list = {"type": "array", "items": {"type": "number"}}

POLYNOMIAL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["terms"],
    "properties": {
        "coords": {"enum": ["hat", "ambient"]},
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["exponents", "coefficient"],
                "properties": {
                    "exponents": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "coefficient": {"type": "number"},
                },
            },
        },
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": CONFIG_VERSION,
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "model"],
    "properties": {
        "schema": {"const": CONFIG_VERSION},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["spectrum"],
            "properties": {
                "dim": {"type": "integer", "minimum": 1, "maximum": 4},
                "spectrum": {"type": "array", "minItems": 1, "maxItems": 4,
                             "items": {"type": "number", "exclusiveMinimum": 0}},
                "quad_order": {"type": "integer", "minimum": 2},
            },
        },
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["half_space", "unit_ball", "whole_space"]},
                "a": _number_list,
                "r": {"type": "number"},
            },
        },
        "weight": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": ["zero", "linear", "phi_norm"]},
                "coefficients": _number_list,
                "scale": {"type": "number", "minimum": 0},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "degree": {"type": "integer", "minimum": 0},
                "lam": {"oneOf": [{"type": "number", "exclusiveMinimum": 0},
                                  {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}}]},
                "f": POLYNOMIAL_SCHEMA,
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "alphas": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
                "mesh": {"type": "number", "exclusiveMinimum": 0},
                "meshes": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "reference_mesh": {"type": "number", "exclusiveMinimum": 0},
                "cutoff": {"type": "number", "exclusiveMinimum": 0},
                "hermite_degree": {"type": "integer", "minimum": 0},
                "tangential_degree": {"type": "integer", "minimum": 0},
                "tolerance": {"type": "number", "minimum": 0},
                "threshold": {"type": "number"},
                "orders": {"type": "array", "items": {"type": "integer", "minimum": 2}},
            },
        },
    },
}


@dataclass
class ExperimentConfig:
    model: GaussianModel
    domain: LevelSetDomain
    weight: Weight
    seed: int = 0
    params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def param(self, key, default=None):
        return self.params.get(key, default)


def validate(raw: dict) -> None:
    jsonschema.validate(raw, CONFIG_SCHEMA)
    model = raw["model"]
    if "dim" in model and model["dim"] != len(model["spectrum"]):
        raise ValueError("model.dim disagrees with the spectrum length")
    dom = raw.get("domain", {"kind": "whole_space"})
    if dom["kind"] == "half_space":
        if "a" not in dom or len(dom["a"]) != len(model["spectrum"]):
            raise ValueError("half_space needs a covector 'a' of the model dimension")


def build(raw: dict, seed: int | None = None) -> ExperimentConfig:
    validate(raw)
    m = raw["model"]
    model = GaussianModel(m["spectrum"], m.get("quad_order", 40))
    domain = domain_from_config(model, raw.get("domain", {"kind": "whole_space"}))
    weight = weight_from_config(model, raw.get("weight"))
    return ExperimentConfig(model, domain, weight,
                            int(raw.get("seed", 0) if seed is None else seed),
                            dict(raw.get("params", {})), raw)


def load(path, seed: int | None = None) -> ExperimentConfig:
    with open(Path(path)) as fh:
        raw = json.load(fh)
    return build(raw, seed)


def polynomial_from_spec(spec: dict, model: GaussianModel) -> CylFunction:
    base = model.symbols if spec.get("coords", "hat") == "hat" else model.ambient_symbols()
    expr = sp.Integer(0)
    for term in spec["terms"]:
        exps = term["exponents"]
        if len(exps) != model.dim:
            raise ValueError("polynomial exponents must match the model dimension")
        mono = sp.Float(term["coefficient"])
        for b, e in zip(base, exps):
            mono *= b**e
        expr += mono
    return CylFunction.from_expr(expr, model)
