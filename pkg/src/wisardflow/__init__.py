"""wisardflow: weightless-classifier toolkit for business-process flows.

Process traces become binary retinas (unit × sequence-position matrices),
RAM-node discriminators learn one class each, and classification resolves
ties by bleaching. The bench module reproduces balanced learning-curve
protocols over synthetic or ingested event logs, deterministically from a
single seed.
"""

from ._kernels import BACKEND as kernel_backend
from .core import (ClassificationResult, Discriminator, TupleMapping, WisardModel,
                   WnnConfig, build_mapping, extract_addresses)
from .encoding import (ProcessTrace, UnitCatalog, build_catalog, decode_retina,
                       encode_log, encode_trace, infer_max_seq, trace_matrix)
from .model_io import deserialize_model, load_model, save_model, serialize_model

__version__ = "0.1.0"

__all__ = [
    "ClassificationResult",
    "Discriminator",
    "ProcessTrace",
    "TupleMapping",
    "UnitCatalog",
    "WisardModel",
    "WnnConfig",
    "build_catalog",
    "build_mapping",
    "decode_retina",
    "deserialize_model",
    "encode_log",
    "encode_trace",
    "extract_addresses",
    "infer_max_seq",
    "kernel_backend",
    "load_model",
    "save_model",
    "serialize_model",
    "trace_matrix",
]
