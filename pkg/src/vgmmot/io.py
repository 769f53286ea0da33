"""JSON persistence for mixture models and interpolants.

Schema::

    {"type": "gmm" | "vgmm" | "vgmm_interpolant",
     "dim": N,
     "graph": {"nodes": M, "edges": [[u, w], ...], "lengths": [...]} | null,
     "components": [{"weight": w, "mean": [...], "cov": [[...]], "channel": q}, ...]}

Interpolant components carry ``"position": {"node_a", "node_b", "fraction", "direct"}``
instead of ``"channel"`` and the document may carry ``"source_channel"``.
Floats are written with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ModelValidationError
from .gaussian import Gaussian
from .graph import ChannelGraph, GraphPosition
from .models import BALANCE_TOL, MixtureModel, VectorInterpolant, VectorMixtureModel

_number = {"type": "number"}
_vector = {"type": "array", "items": _number, "minItems": 1}

SCHEMA = {
    "type": "object",
    "required": ["type", "dim", "components"],
    "properties": {
        "type": {"enum": ["gmm", "vgmm", "vgmm_interpolant"]},
        "dim": {"type": "integer", "minimum": 1},
        "graph": {
            "type": ["object", "null"],
            "required": ["nodes", "edges"],
            "properties": {
                "nodes": {"type": "integer", "minimum": 1},
                "edges": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
                },
                "lengths": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
            },
        },
        "source_channel": {"type": ["integer", "null"]},
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["weight", "mean", "cov"],
                "properties": {
                    "weight": {"type": "number", "exclusiveMinimum": 0},
                    "mean": _vector,
                    "cov": {"type": "array", "items": _vector, "minItems": 1},
                    "channel": {"type": "integer", "minimum": 0},
                    "position": {
                        "type": "object",
                        "required": ["node_a", "node_b", "fraction"],
                        "properties": {
                            "node_a": {"type": "integer", "minimum": 0},
                            "node_b": {"type": "integer", "minimum": 0},
                            "fraction": {"type": "number", "minimum": 0, "maximum": 1},
                            "direct": {"type": "boolean"},
                        },
                    },
                },
            },
        },
    },
}


def _path(error) -> str:
    parts = ["$"]
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "".join(parts)


def model_to_json(model) -> dict:
    graph = getattr(model, "graph", None)
    if isinstance(model, VectorMixtureModel):
        kind = "vgmm"
    elif isinstance(model, VectorInterpolant):
        kind = "vgmm_interpolant"
    elif isinstance(model, MixtureModel):
        kind = "gmm"
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    comps = []
    for k, (w, g) in enumerate(zip(model.weights.tolist(), model.gaussians)):
        c = {"weight": w, "mean": g.mean.tolist(), "cov": g.cov.tolist()}
        if kind == "vgmm":
            c["channel"] = model.channels[k]
        elif kind == "vgmm_interpolant":
            p = model.positions[k]
            c["position"] = {"node_a": p.node_a, "node_b": p.node_b, "fraction": p.fraction, "direct": p.direct}
        comps.append(c)
    doc = {"type": kind, "dim": model.dim, "graph": graph.to_json() if graph is not None else None, "components": comps}
    if kind == "vgmm_interpolant" and model.source_channel is not None:
        doc["source_channel"] = model.source_channel
    return doc


def model_from_json(doc, balanced: bool = False):
    """Build a model from a parsed JSON document, validating schema and semantics.

    With ``balanced`` the weights must sum to 1 within 1e-9.
    """
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ModelValidationError(f"{_path(e)}: {e.message}")
    kind, dim = doc["type"], doc["dim"]
    graph = None
    if kind != "gmm":
        if doc.get("graph") is None:
            raise ModelValidationError(f"$.graph: required for type {kind!r}")
        try:
            graph = ChannelGraph.from_json(doc["graph"])
        except ModelValidationError as exc:
            raise ModelValidationError(f"$.graph: {exc}") from exc
    weights, gaussians, extra = [], [], []
    for k, c in enumerate(doc["components"]):
        where = f"$.components[{k}]"
        if len(c["mean"]) != dim:
            raise ModelValidationError(f"{where}.mean: length {len(c['mean'])} does not match dim {dim}")
        if len(c["cov"]) != dim or any(len(row) != dim for row in c["cov"]):
            raise ModelValidationError(f"{where}.cov: expected a {dim}x{dim} matrix")
        try:
            gaussians.append(Gaussian(c["mean"], c["cov"]))
        except ModelValidationError as exc:
            raise ModelValidationError(f"{where}.cov: {exc}") from exc
        weights.append(c["weight"])
        if kind == "vgmm":
            if "channel" not in c:
                raise ModelValidationError(f"{where}: 'channel' is a required property")
            if c["channel"] >= graph.node_count:
                raise ModelValidationError(f"{where}.channel: {c['channel']} is not a node of the graph")
            extra.append(c["channel"])
        elif kind == "vgmm_interpolant":
            if "position" not in c:
                raise ModelValidationError(f"{where}: 'position' is a required property")
            p = c["position"]
            try:
                pos = GraphPosition(p["node_a"], p["node_b"], p["fraction"], p.get("direct", False))
                pos.validate(graph)
            except ModelValidationError as exc:
                raise ModelValidationError(f"{where}.position: {exc}") from exc
            extra.append(pos)
    if balanced and abs(sum(weights) - 1.0) > BALANCE_TOL:
        raise ModelValidationError(f"$.components: weights sum to {sum(weights)!r}, expected 1 for a balanced model")
    if kind == "gmm":
        return MixtureModel(weights, gaussians, dim=dim)
    if kind == "vgmm":
        return VectorMixtureModel(graph, weights, gaussians, extra, dim=dim)
    return VectorInterpolant(graph, weights, gaussians, extra, dim=dim, source_channel=doc.get("source_channel"))


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def save_model(path, model):
    Path(path).write_text(dumps(model_to_json(model)))


def load_model(path, balanced: bool = False):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"{path}: malformed JSON: {exc}") from exc
    except OSError as exc:
        raise ModelValidationError(f"{path}: {exc}") from exc
    return model_from_json(doc, balanced=balanced)


def result_to_json(result) -> dict:
    """Distance, plan and cost of a TransportResult; masked cost cells become null."""
    cost = np.where(np.isfinite(result.cost), result.cost, np.nan)
    out = {
        "distance": result.distance,
        "squared": result.squared,
        "plan": result.plan.entries.tolist(),
        "cost": [[None if np.isnan(x) else x for x in row] for row in cost.tolist()],
    }
    if result.mask is not None:
        out["mask"] = result.mask.tolist()
    if result.source_side is not None:
        out["source_side"] = result.source_side
    out.update(result.meta)
    return out
