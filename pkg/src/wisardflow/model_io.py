"""Versioned model files.

A model is stored as one self-describing JSON document. The tuple mapping is
re-derived from its seed on load, never stored. Canonical encoding — sorted
keys, no whitespace, UTF-8, one trailing newline — makes serialization a pure
function of the model, so identical models give identical bytes.

Document layout (format ``wisardflow/model``, version 1)::

    {
      "format": "wisardflow/model",
      "version": 1,
      "config": {"bits_per_tuple": n, "bleaching": bool,
                 "ignore_zero": bool, "mapping_seed": int},
      "retina_len": int,
      "trained_counts": {label: examples_seen},
      "rams": {label: [[[address, counter], ...] per tuple]},
      "extras": {...}    # free-form JSON; the CLI stores the unit catalog,
                         # sequence capacity and encoder name here
    }

Counters are 64-bit unsigned; addresses are sorted ascending within each
tuple and zero counters are never stored. Compatibility is promised only
between identical format versions.
"""

from __future__ import annotations

import json
from pathlib import Path

from .core import Discriminator, WisardModel, WnnConfig
from .errors import ConfigurationError, FormatError
from .rng import U64_MASK

FORMAT_NAME = "wisardflow/model"
FORMAT_VERSION = 1


def serialize_model(model: WisardModel, extras: dict | None = None) -> bytes:
    """Canonical bytes for a model (round-trips via :func:`deserialize_model`)."""
    rams = {}
    for label, disc in model.discriminators.items():
        if not isinstance(label, str):
            raise FormatError(f"model labels must be strings, got {label!r}")
        rams[label] = [sorted((int(a), int(c)) for a, c in ram.items())
                       for ram in disc.rams]
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": {
            "bits_per_tuple": model.config.bits_per_tuple,
            "bleaching": model.config.bleaching,
            "ignore_zero": model.config.ignore_zero,
            "mapping_seed": model.config.mapping_seed,
        },
        "retina_len": model.retina_len,
        "trained_counts": {str(k): int(v) for k, v in model.trained_counts.items()},
        "rams": rams,
        "extras": extras if extras is not None else {},
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def deserialize_model(data: bytes) -> tuple[WisardModel, dict]:
    """Rebuild (model, extras) from bytes produced by :func:`serialize_model`."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not a valid model document: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise FormatError("not a wisardflow model document")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(
            f"unsupported model format version {doc.get('version')!r}, "
            f"expected {FORMAT_VERSION}")
    try:
        cfg_doc = doc["config"]
        config = WnnConfig(
            bits_per_tuple=cfg_doc["bits_per_tuple"],
            bleaching=bool(cfg_doc["bleaching"]),
            ignore_zero=bool(cfg_doc["ignore_zero"]),
            mapping_seed=cfg_doc["mapping_seed"],
        )
        retina_len = int(doc["retina_len"])
        rams = doc["rams"]
        trained_counts = doc["trained_counts"]
        extras = doc["extras"]
    except (KeyError, TypeError, ConfigurationError) as exc:
        raise FormatError(f"malformed model document: {exc}") from exc

    model = WisardModel(config, retina_len)
    address_space = 1 << config.bits_per_tuple
    if not isinstance(rams, dict) or not isinstance(trained_counts, dict):
        raise FormatError("malformed model document: rams/trained_counts")
    if sorted(rams) != sorted(trained_counts):
        raise FormatError("model labels differ between rams and trained_counts")
    for label, tuple_tables in rams.items():
        if not isinstance(tuple_tables, list) or len(tuple_tables) != model.mapping.tuple_count:
            raise FormatError(
                f"label {label!r}: expected {model.mapping.tuple_count} tuple tables")
        disc = Discriminator(model.mapping.tuple_count)
        for k, entries in enumerate(tuple_tables):
            ram: dict[int, int] = {}
            for entry in entries:
                try:
                    a, c = entry
                    a, c = int(a), int(c)
                except (TypeError, ValueError) as exc:
                    raise FormatError(f"label {label!r}, tuple {k}: bad entry {entry!r}") from exc
                if not 0 <= a < address_space:
                    raise FormatError(f"label {label!r}, tuple {k}: address {a} out of range")
                if not 1 <= c <= U64_MASK:
                    raise FormatError(f"label {label!r}, tuple {k}: counter {c} out of range")
                if a in ram:
                    raise FormatError(f"label {label!r}, tuple {k}: duplicate address {a}")
                ram[a] = c
            disc.rams[k] = ram
        model.discriminators[label] = disc
        model.trained_counts[label] = int(trained_counts[label])
    if not isinstance(extras, dict):
        raise FormatError("malformed model document: extras must be an object")
    return model, extras


def save_model(model: WisardModel, path, extras: dict | None = None) -> None:
    Path(path).write_bytes(serialize_model(model, extras))


def load_model(path) -> tuple[WisardModel, dict]:
    return deserialize_model(Path(path).read_bytes())
