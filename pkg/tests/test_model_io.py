"""Model file format: canonical bytes, exact round trips, strict validation."""

import json

import numpy as np
import pytest

from wisardflow.core import WisardModel, WnnConfig
from wisardflow.errors import FormatError
from wisardflow.model_io import (FORMAT_VERSION, deserialize_model, load_model,
                                 save_model, serialize_model)


def trained_model():
    rng = np.random.default_rng(5)
    model = WisardModel(WnnConfig(bits_per_tuple=3, ignore_zero=True, mapping_seed=42), 20)
    for label in ("alpha", "beta"):
        for _ in range(4):
            model.train(rng.integers(0, 2, size=20).astype(np.uint8), label)
    return model


def test_round_trip_identity():
    model = trained_model()
    blob = serialize_model(model, extras={"max_seq": 5, "catalog": ["a", "b"]})
    rebuilt, extras = deserialize_model(blob)
    assert serialize_model(rebuilt, extras) == blob
    assert extras == {"max_seq": 5, "catalog": ["a", "b"]}
    assert rebuilt.config == model.config
    assert rebuilt.trained_counts == model.trained_counts
    assert np.array_equal(rebuilt.mapping.order, model.mapping.order)
    for label in model.labels():
        assert rebuilt.discriminators[label].rams == model.discriminators[label].rams


def test_serialization_is_canonical():
    model = trained_model()
    assert serialize_model(model) == serialize_model(model)


def test_empty_model_round_trips():
    model = WisardModel(WnnConfig(bits_per_tuple=2), 8)
    rebuilt, extras = deserialize_model(serialize_model(model))
    assert rebuilt.discriminators == {} and extras == {}


def test_classification_agrees_after_reload(tmp_path):
    model = trained_model()
    path = tmp_path / "model.json"
    save_model(model, path)
    rebuilt, _ = load_model(path)
    rng = np.random.default_rng(6)
    for _ in range(20):
        probe = rng.integers(0, 2, size=20).astype(np.uint8)
        assert model.classify(probe) == rebuilt.classify(probe)


def test_truncated_stream_is_format_error():
    blob = serialize_model(trained_model())
    for cut in (0, 1, len(blob) // 2, len(blob) - 2):
        with pytest.raises(FormatError):
            deserialize_model(blob[:cut])


def test_wrong_format_and_version():
    with pytest.raises(FormatError):
        deserialize_model(b'{"format":"something/else","version":1}\n')
    doc = json.loads(serialize_model(trained_model()))
    doc["version"] = FORMAT_VERSION + 1
    with pytest.raises(FormatError):
        deserialize_model(json.dumps(doc).encode())


@pytest.mark.parametrize("mutate", [
    lambda d: d["rams"]["alpha"].pop(),                      # missing tuple table
    lambda d: d["rams"]["alpha"][0].append([99999, 1]),      # address out of range
    lambda d: d["rams"]["alpha"][0].append([0, 0]),          # zero counter stored
    lambda d: d["trained_counts"].pop("alpha"),              # label sets diverge
    lambda d: d.pop("retina_len"),                           # missing field
    lambda d: d.__setitem__("extras", [1, 2]),               # extras not an object
])
def test_malformed_documents(mutate):
    doc = json.loads(serialize_model(trained_model()))
    mutate(doc)
    with pytest.raises(FormatError):
        deserialize_model(json.dumps(doc).encode())


def test_non_string_label_rejected_on_write():
    model = WisardModel(WnnConfig(bits_per_tuple=2), 4)
    model.train(np.array([1, 0, 1, 1], np.uint8), "ok")
    model.discriminators[7] = model.discriminators.pop("ok")
    model.trained_counts[7] = model.trained_counts.pop("ok")
    with pytest.raises(FormatError):
        serialize_model(model)
