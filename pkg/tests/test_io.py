import json

import numpy as np
import pytest

from vgmmot import ChannelGraph, GraphPosition, VectorInterpolant, VectorMixtureModel, vgmm_distance, vgmm_interpolate
from vgmmot.errors import ModelValidationError
from vgmmot.io import dumps, load_model, model_from_json, model_to_json, result_to_json, save_model

from helpers import g1, rand_gmm, rand_graph, rand_vgmm


def _round_trip(model):
    return model_from_json(json.loads(dumps(model_to_json(model))))


def test_gmm_round_trip_is_exact():
    mu = rand_gmm(np.random.default_rng(0), 3, 4)
    back = _round_trip(mu)
    assert np.array_equal(back.weights, mu.weights)
    assert back.gaussians == mu.gaussians


def test_vgmm_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(1)
    rho = rand_vgmm(rng, rand_graph(rng, 4), 2, 5)
    save_model(tmp_path / "m.json", rho)
    assert load_model(tmp_path / "m.json", balanced=True) == rho


def test_interpolant_round_trip():
    G = ChannelGraph.chain(3)
    r0 = VectorMixtureModel(G, [1.0], [g1(0)], [0])
    r1 = VectorMixtureModel(G, [1.0], [g1(2)], [2])
    mid = vgmm_interpolate(r0, r1, 0.3)
    back = _round_trip(mid)
    assert isinstance(back, VectorInterpolant) and back.positions == mid.positions


def _doc():
    return {
        "type": "vgmm",
        "dim": 1,
        "graph": {"nodes": 2, "edges": [[0, 1]]},
        "components": [
            {"weight": 0.5, "mean": [0.0], "cov": [[1.0]], "channel": 0},
            {"weight": 0.5, "mean": [1.0], "cov": [[2.0]], "channel": 1},
        ],
    }


@pytest.mark.parametrize(
    "path, value, where",
    [
        (("components", 1, "weight"), -0.5, "$.components[1].weight"),
        (("components", 0, "mean"), [0.0, 1.0], "$.components[0].mean"),
        (("components", 0, "cov"), [[-1.0]], "$.components[0].cov"),
        (("components", 1, "channel"), 5, "$.components[1].channel"),
        (("type",), "blob", "$.type"),
        (("graph",), None, "$.graph"),
    ],
)
def test_errors_name_the_field(path, value, where):
    doc = _doc()
    target = doc
    for key in path[:-1]:
        target = target[key]
    target[path[-1]] = value
    with pytest.raises(ModelValidationError) as exc:
        model_from_json(doc)
    assert where in str(exc.value)


def test_balanced_check():
    doc = _doc()
    doc["components"][0]["weight"] = 0.4
    model_from_json(doc)
    with pytest.raises(ModelValidationError, match="sum"):
        model_from_json(doc, balanced=True)


def test_malformed_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ModelValidationError, match="malformed"):
        load_model(p)
    with pytest.raises(ModelValidationError):
        load_model(tmp_path / "missing.json")


def test_position_must_follow_an_edge():
    doc = _doc()
    doc["type"] = "vgmm_interpolant"
    doc["graph"] = {"nodes": 3, "edges": [[0, 1], [1, 2]]}
    for c in doc["components"]:
        del c["channel"]
        c["position"] = {"node_a": 0, "node_b": 2, "fraction": 0.5}
    with pytest.raises(ModelValidationError, match=r"\$\.components\[0\]\.position"):
        model_from_json(doc)
    for c in doc["components"]:
        c["position"]["direct"] = True
    assert model_from_json(doc).positions[0] == GraphPosition(0, 2, 0.5, direct=True)


def test_result_json_marks_masked_cells():
    G = ChannelGraph.chain(3)
    r0 = VectorMixtureModel(G, [0.5, 0.5], [g1(0), g1(1)], [0, 1])
    r1 = VectorMixtureModel(G, [0.5, 0.5], [g1(0), g1(1)], [1, 2])
    doc = result_to_json(vgmm_distance(r0, r1, approach=0))
    assert doc["approach"] == 0 and doc["mask"] == [[True, False], [True, True]]
    assert set(doc) >= {"distance", "plan", "cost"}
    json.dumps(doc, allow_nan=False)
