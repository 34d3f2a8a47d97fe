"""Trace-to-retina encoding.

A trace — the sequence of organizational units a process visits — becomes a
binary unit × position matrix: rows are catalog units (sorted, stable), and
under the default ``one_hot`` encoder column ``s`` lights exactly the cell of
the unit visited at position ``s``. The matrix flattens row-major into the
retina. Unit rows and the flattening order are fixed so retinas are portable
across runs; the classifier's mapping shuffles bits anyway.

A second encoder, ``visit_count``, reinterprets columns as count levels:
cell (u, s) lights iff the trace visited unit u at least s+1 times. It is an
experimentation alternative; the round-trip guarantees below hold only for
``one_hot``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EncodingError, InputError, TraceLengthError, UnknownUnitError

ENCODERS = ("one_hot", "visit_count")


@dataclass
class ProcessTrace:
    """One case: an ordered walk over organizational units, plus metadata."""

    case_id: str
    steps: tuple[str, ...]
    label: str | None = None
    tag: str | None = None

    def __post_init__(self):
        self.steps = tuple(self.steps)


class UnitCatalog:
    """Stable bijection between organizational units and retina rows."""

    def __init__(self, units: Iterable[str]):
        self.units = tuple(units)
        self._index = {u: i for i, u in enumerate(self.units)}
        if len(self._index) != len(self.units):
            raise InputError("catalog units must be distinct")

    def __len__(self) -> int:
        return len(self.units)

    def __contains__(self, unit: str) -> bool:
        return unit in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, UnitCatalog) and self.units == other.units

    def row(self, unit: str) -> int:
        try:
            return self._index[unit]
        except KeyError:
            raise UnknownUnitError(f"unit {unit!r} is not in the catalog") from None


def build_catalog(traces: Iterable[ProcessTrace]) -> UnitCatalog:
    """Sorted distinct units over a trace collection; deterministic by construction."""
    units: set[str] = set()
    empty = True
    for trace in traces:
        empty = False
        units.update(trace.steps)
    if empty:
        raise InputError("cannot build a catalog from an empty trace collection")
    return UnitCatalog(sorted(units))


def infer_max_seq(traces: Iterable[ProcessTrace]) -> int:
    """Longest trace length in the collection (the matrix column count S)."""
    lengths = [len(t.steps) for t in traces]
    if not lengths:
        raise InputError("cannot infer sequence capacity from an empty collection")
    return max(lengths)


def trace_matrix(trace: ProcessTrace, catalog: UnitCatalog, max_seq: int,
                 encoder: str = "one_hot") -> np.ndarray:
    """The U×S binary matrix of one trace. Raises instead of truncating."""
    if not trace.steps:
        raise EncodingError(f"trace {trace.case_id!r} has no steps")
    matrix = np.zeros((len(catalog), max_seq), dtype=np.uint8)
    if encoder == "one_hot":
        if len(trace.steps) > max_seq:
            raise TraceLengthError(
                f"trace {trace.case_id!r} has {len(trace.steps)} steps, "
                f"capacity is {max_seq}")
        for s, unit in enumerate(trace.steps):
            matrix[catalog.row(unit), s] = 1
    elif encoder == "visit_count":
        counts: dict[str, int] = {}
        for unit in trace.steps:
            counts[unit] = counts.get(unit, 0) + 1
        for unit, count in counts.items():
            if count > max_seq:
                raise TraceLengthError(
                    f"trace {trace.case_id!r} visits {unit!r} {count} times, "
                    f"capacity is {max_seq}")
            matrix[catalog.row(unit), :count] = 1
    else:
        raise InputError(f"unknown encoder {encoder!r}; choose from {ENCODERS}")
    return matrix


def encode_trace(trace: ProcessTrace, catalog: UnitCatalog, max_seq: int,
                 encoder: str = "one_hot") -> np.ndarray:
    """Row-major flattening of the trace matrix: the retina (length U*S)."""
    return trace_matrix(trace, catalog, max_seq, encoder).reshape(-1)


def decode_retina(retina, catalog: UnitCatalog, max_seq: int) -> tuple[str, ...]:
    """Inverse of the ``one_hot`` encoder: recover the step sequence."""
    matrix = np.asarray(retina, dtype=np.uint8).reshape(len(catalog), max_seq)
    steps: list[str] = []
    done = False
    for s in range(max_seq):
        rows = np.flatnonzero(matrix[:, s])
        if len(rows) > 1:
            raise EncodingError(f"column {s} lights {len(rows)} cells; not a one-hot image")
        if len(rows) == 0:
            done = True
            continue
        if done:
            raise EncodingError(f"column {s} is lit after an empty column")
        steps.append(catalog.units[rows[0]])
    if not steps:
        raise EncodingError("retina encodes an empty trace")
    return tuple(steps)


def encode_log(traces: Sequence[ProcessTrace], catalog: UnitCatalog, max_seq: int,
               encoder: str = "one_hot") -> np.ndarray:
    """Stacked retinas for a trace collection: uint8 array (len(traces), U*S)."""
    out = np.zeros((len(traces), len(catalog) * max_seq), dtype=np.uint8)
    for i, trace in enumerate(traces):
        out[i] = encode_trace(trace, catalog, max_seq, encoder)
    return out
