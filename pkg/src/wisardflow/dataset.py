"""Event-log ingestion, per-class summary statistics, and synthetic log generation.

The ingestion format is a flat delimited text table (UTF-8, header row):
required columns ``case_id``, ``unit``, ``seq`` (0-based, contiguous per
case), optional ``class`` and ``tag`` (``SP`` for a conform / standard
process, ``NP`` for a non-conform one). Rows may appear in any order; traces
are rebuilt by sorting each case's rows by ``seq``.

Per-class statistics mirror the usual dataset-summary table: trace count,
distinct symbols (a symbol is a distinct retina), Shannon entropy over symbol
frequencies, entropy normalized by log2(symbols), maximum lit pixels, and
pixel density. Density is reported both from the class maximum and from the
per-trace mean, clearly separated.

The synthetic generator emits template-based logs: each class lists step
templates with target frequencies; every emitted instance is independently
perturbed by a noise model (per-step substitution, single-step insertion,
single-step deletion). Instances of a non-deviant template that survive the
noise untouched are tagged SP; everything else — deviant-template instances
and noise-altered copies — is tagged NP. Generation is a pure function of the
spec (see the draw order documented in :func:`generate_synthetic`).
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import json

import numpy as np

from .encoding import ProcessTrace, UnitCatalog, build_catalog, encode_log, infer_max_seq
from .errors import IngestionError, InputError, SpecError
from .rng import SplitMix64, U64_MASK

TAG_STANDARD = "SP"
TAG_NONCONFORM = "NP"
TAGS = (TAG_STANDARD, TAG_NONCONFORM)

REQUIRED_COLUMNS = ("case_id", "unit", "seq")
OPTIONAL_COLUMNS = ("class", "tag")


@dataclass
class EventLog:
    """A collection of traces; classes and SP/NP tags live on the traces."""

    traces: list[ProcessTrace]

    def __len__(self) -> int:
        return len(self.traces)

    def class_labels(self) -> list[str]:
        return sorted({t.label for t in self.traces if t.label is not None})

    def traces_of(self, label: str | None) -> list[ProcessTrace]:
        if label is None:
            return list(self.traces)
        return [t for t in self.traces if t.label == label]

    def split_tags(self, label: str | None = None) -> tuple[list[ProcessTrace], list[ProcessTrace]]:
        """(SP traces, NP traces) of a class; untagged traces are an error."""
        chosen = self.traces_of(label)
        untagged = [t.case_id for t in chosen if t.tag not in TAGS]
        if untagged:
            raise InputError(
                f"{len(untagged)} traces lack an SP/NP tag (first: {untagged[0]!r})")
        sp = [t for t in chosen if t.tag == TAG_STANDARD]
        np_ = [t for t in chosen if t.tag == TAG_NONCONFORM]
        return sp, np_


def load_event_log(path, delimiter: str = ",") -> EventLog:
    """Parse a delimited event-log file into traces, validating the contract."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError("file is empty; expected a header row") from None
        columns = {name.strip(): i for i, name in enumerate(header)}
        missing = [c for c in REQUIRED_COLUMNS if c not in columns]
        if missing:
            raise IngestionError(f"missing required column(s): {', '.join(missing)}", row=1)

        cases: dict[str, dict] = {}
        order: list[str] = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(columns):
                raise IngestionError(f"expected {len(columns)} fields, got {len(row)}", row=row_no)
            case_id = row[columns["case_id"]].strip()
            unit = row[columns["unit"]].strip()
            seq_text = row[columns["seq"]].strip()
            if not case_id:
                raise IngestionError("empty case_id", row=row_no)
            if not unit:
                raise IngestionError("empty unit", row=row_no)
            try:
                seq = int(seq_text)
            except ValueError:
                raise IngestionError(f"seq {seq_text!r} is not an integer", row=row_no) from None
            if seq < 0:
                raise IngestionError(f"seq must be >= 0, got {seq}", row=row_no)

            label = row[columns["class"]].strip() if "class" in columns else ""
            tag = row[columns["tag"]].strip() if "tag" in columns else ""
            if tag and tag not in TAGS:
                raise IngestionError(f"tag must be SP or NP, got {tag!r}", row=row_no)

            entry = cases.get(case_id)
            if entry is None:
                entry = {"steps": {}, "label": label, "tag": tag, "first_row": row_no}
                cases[case_id] = entry
                order.append(case_id)
            else:
                if entry["label"] != label:
                    raise IngestionError(
                        f"case {case_id!r} has conflicting class values", row=row_no)
                if entry["tag"] != tag:
                    raise IngestionError(
                        f"case {case_id!r} has conflicting tag values", row=row_no)
            if seq in entry["steps"]:
                raise IngestionError(f"duplicate (case, seq) = ({case_id!r}, {seq})", row=row_no)
            entry["steps"][seq] = unit

    traces = []
    for case_id in order:
        entry = cases[case_id]
        seqs = sorted(entry["steps"])
        if seqs != list(range(len(seqs))):
            raise IngestionError(
                f"case {case_id!r} has non-contiguous seq indices {seqs}",
                row=entry["first_row"])
        traces.append(ProcessTrace(
            case_id=case_id,
            steps=tuple(entry["steps"][s] for s in seqs),
            label=entry["label"] or None,
            tag=entry["tag"] or None,
        ))
    return EventLog(traces=traces)


def write_event_log(log: EventLog, path, delimiter: str = ",") -> None:
    """Write a log in the ingestion format (all five columns, blanks for None)."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, delimiter=delimiter)
        writer.writerow(REQUIRED_COLUMNS + OPTIONAL_COLUMNS)
        for trace in log.traces:
            for seq, unit in enumerate(trace.steps):
                writer.writerow([trace.case_id, unit, seq, trace.label or "", trace.tag or ""])


# ---------------------------------------------------------------------------
# Statistics


def shannon_entropy(frequencies: Iterable[float]) -> float:
    """H = -sum(p_i log2 p_i) in bits, over positive counts or weights."""
    freqs = [float(f) for f in frequencies]
    if not freqs:
        raise InputError("entropy needs at least one frequency")
    if any(f <= 0 for f in freqs):
        raise InputError("entropy frequencies must be positive")
    total = sum(freqs)
    acc = 0.0
    for f in freqs:
        p = f / total
        acc += p * math.log2(p)
    return -acc if acc else 0.0


def normalized_entropy(entropy: float, symbols: int) -> float:
    """Entropy divided by its maximum log2(symbols); defined 0 for one symbol."""
    if symbols < 1:
        raise InputError(f"symbol count must be >= 1, got {symbols}")
    if symbols == 1:
        return 0.0
    return entropy / math.log2(symbols)


@dataclass(frozen=True)
class ClassStats:
    """One summary row: counts, symbol entropy, and pixel geometry of a class."""

    label: str
    total: int
    symbols: int
    entropy: float
    norm_entropy: float
    max_px: int
    density: float       # max_px / retina_len
    mean_px: float
    density_mean: float  # mean_px / retina_len


def class_stats(label: str, traces: Sequence[ProcessTrace], catalog: UnitCatalog,
                max_seq: int, encoder: str = "one_hot") -> ClassStats:
    """Summary statistics of one class under a fixed retina geometry."""
    if not traces:
        raise InputError(f"class {label!r} has no traces")
    retinas = encode_log(traces, catalog, max_seq, encoder)
    retina_len = retinas.shape[1]
    symbol_counts = Counter(r.tobytes() for r in retinas)
    entropy = shannon_entropy(symbol_counts.values())
    pixels = retinas.sum(axis=1, dtype=np.int64)
    max_px = int(pixels.max())
    mean_px = float(pixels.mean())
    return ClassStats(
        label=label,
        total=len(traces),
        symbols=len(symbol_counts),
        entropy=entropy,
        norm_entropy=normalized_entropy(entropy, len(symbol_counts)),
        max_px=max_px,
        density=max_px / retina_len,
        mean_px=mean_px,
        density_mean=mean_px / retina_len,
    )


def log_stats(log: EventLog, encoder: str = "one_hot") -> list[ClassStats]:
    """Per-class statistics under the whole log's retina geometry.

    Classless logs yield a single row labeled ``all``; a log where only some
    traces carry a class is rejected.
    """
    if not log.traces:
        raise InputError("event log is empty")
    labels = log.class_labels()
    if labels and any(t.label is None for t in log.traces):
        raise InputError("some traces are missing a class value")
    catalog = build_catalog(log.traces)
    max_seq = infer_max_seq(log.traces)
    if not labels:
        return [class_stats("all", log.traces, catalog, max_seq, encoder)]
    return [class_stats(label, log.traces_of(label), catalog, max_seq, encoder)
            for label in labels]


# ---------------------------------------------------------------------------
# Synthetic logs


@dataclass(frozen=True)
class TemplateSpec:
    """One routine: its step sequence, how many instances to emit, and whether
    the routine itself counts as a deviation (its instances are tagged NP)."""

    steps: tuple[str, ...]
    frequency: int
    deviant: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))


@dataclass(frozen=True)
class NoiseSpec:
    """Per-trace perturbation probabilities, each in [0, 1)."""

    substitution: float = 0.0
    insertion: float = 0.0
    deletion: float = 0.0


@dataclass
class SynthSpec:
    """Full recipe for a synthetic event log; generation is pure given this."""

    classes: dict[str, tuple[TemplateSpec, ...]]
    units: tuple[str, ...]
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0

    def validate(self) -> None:
        if not self.classes:
            raise SpecError("spec needs at least one class")
        if not self.units or len(set(self.units)) != len(self.units):
            raise SpecError("unit universe must be non-empty and distinct")
        universe = set(self.units)
        for prob_name in ("substitution", "insertion", "deletion"):
            p = getattr(self.noise, prob_name)
            if not 0.0 <= p < 1.0:
                raise SpecError(f"noise {prob_name} probability must be in [0, 1), got {p}")
        for label, templates in self.classes.items():
            if not templates:
                raise SpecError(f"class {label!r} has no templates")
            for t in templates:
                if t.frequency < 1:
                    raise SpecError(f"class {label!r}: frequency must be positive, got {t.frequency}")
                if not t.steps:
                    raise SpecError(f"class {label!r}: template steps must be non-empty")
                stray = [u for u in t.steps if u not in universe]
                if stray:
                    raise SpecError(f"class {label!r}: unit {stray[0]!r} is outside the universe")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= U64_MASK:
            raise SpecError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


def make_units(count: int, prefix: str = "u") -> tuple[str, ...]:
    """A unit universe of ``count`` zero-padded names."""
    if count < 1:
        raise SpecError(f"unit universe size must be >= 1, got {count}")
    width = len(str(count - 1))
    return tuple(f"{prefix}{i:0{width}d}" for i in range(count))


def generate_synthetic(spec: SynthSpec) -> EventLog:
    """Emit the spec's template instances, independently perturbed.

    One SplitMix64 stream seeded with ``spec.seed`` drives everything, in a
    fixed order: classes sorted by label, templates in listed order, instances
    0..frequency-1. Per instance the draws are: one uniform per step for the
    substitution decision (plus one bounded draw for the replacement unit when
    it fires — uniform over the other units); one uniform for insertion when
    its probability is positive (plus position and unit draws when it fires);
    one uniform for deletion when its probability is positive (plus a position
    draw when it fires and the trace still has more than one step).

    An instance keeps the SP tag only if its template is non-deviant and its
    final steps equal the template's; any noise-altered or deviant instance
    is NP.
    """
    spec.validate()
    rng = SplitMix64(spec.seed)
    unit_index = {u: i for i, u in enumerate(spec.units)}
    universe_size = len(spec.units)
    noise = spec.noise
    traces: list[ProcessTrace] = []

    for label in sorted(spec.classes):
        for t_idx, template in enumerate(spec.classes[label]):
            for i in range(template.frequency):
                steps = list(template.steps)
                if noise.substitution > 0.0:
                    for pos in range(len(steps)):
                        if rng.random() < noise.substitution and universe_size > 1:
                            pick = rng.randbelow(universe_size - 1)
                            if pick >= unit_index[steps[pos]]:
                                pick += 1
                            steps[pos] = spec.units[pick]
                if noise.insertion > 0.0 and rng.random() < noise.insertion:
                    pos = rng.randbelow(len(steps) + 1)
                    steps.insert(pos, spec.units[rng.randbelow(universe_size)])
                if noise.deletion > 0.0 and rng.random() < noise.deletion and len(steps) > 1:
                    del steps[rng.randbelow(len(steps))]
                conform = (not template.deviant) and tuple(steps) == template.steps
                traces.append(ProcessTrace(
                    case_id=f"{label}-t{t_idx:02d}-{i:05d}",
                    steps=tuple(steps),
                    label=label,
                    tag=TAG_STANDARD if conform else TAG_NONCONFORM,
                ))
    return EventLog(traces=traces)


def load_synth_spec(path) -> SynthSpec:
    """Read a generator spec from JSON.

    Schema: ``{"seed": int, "units": int | [names], "noise": {"substitution":
    p, "insertion": p, "deletion": p}, "classes": {label: [{"steps": [...],
    "frequency": int, "deviant": bool}, ...]}}``. ``units`` as an integer
    builds a zero-padded universe of that size.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    units = doc.get("units")
    if isinstance(units, int):
        units = make_units(units)
    elif isinstance(units, list):
        units = tuple(str(u) for u in units)
    else:
        raise SpecError("spec field 'units' must be an integer or a list of names")
    noise_doc = doc.get("noise", {})
    if not isinstance(noise_doc, dict):
        raise SpecError("spec field 'noise' must be an object")
    noise = NoiseSpec(
        substitution=float(noise_doc.get("substitution", 0.0)),
        insertion=float(noise_doc.get("insertion", 0.0)),
        deletion=float(noise_doc.get("deletion", 0.0)),
    )
    classes_doc = doc.get("classes")
    if not isinstance(classes_doc, dict) or not classes_doc:
        raise SpecError("spec field 'classes' must be a non-empty object")
    classes: dict[str, tuple[TemplateSpec, ...]] = {}
    for label, templates in classes_doc.items():
        if not isinstance(templates, list):
            raise SpecError(f"class {label!r}: templates must be a list")
        parsed = []
        for t in templates:
            if not isinstance(t, dict) or "steps" not in t or "frequency" not in t:
                raise SpecError(f"class {label!r}: each template needs steps and frequency")
            parsed.append(TemplateSpec(
                steps=tuple(str(s) for s in t["steps"]),
                frequency=int(t["frequency"]),
                deviant=bool(t.get("deviant", False)),
            ))
        classes[label] = tuple(parsed)
    spec = SynthSpec(classes=classes, units=units, noise=noise, seed=int(doc.get("seed", 0)))
    spec.validate()
    return spec
