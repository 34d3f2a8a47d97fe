"""Learning-curve experiments: configuration grid, balanced sampling, F1 curves.

The protocol: for every classifier configuration in the grid and every
training size, repeat ``reps`` times — draw half the training set from the
SP pool and half from the NP pool, train a two-class model, classify every
remaining trace of the class, and record the F1 score (SP positive by
default). Points aggregate mean and population standard deviation over the
repetitions.

Every repetition owns seeds derived from (master seed, configuration id,
training size, repetition index), so the whole point collection is a pure
function of the log and the grid: serial and parallel runs produce identical
output, byte for byte. By default each repetition also rebuilds the
pseudo-random tuple mapping from its own seed, so curve variance includes
mapping variance; ``freeze_mapping`` pins one mapping per configuration
instead.

The runner deduplicates identical retinas before the grid loop: training
multiplicities and per-symbol classifications are exact, so results are
unchanged — only faster, since symbols are typically far fewer than traces.
An additional 1-nearest-neighbor Hamming baseline provides a comparison
curve; it is a deliberately simple stand-in comparator, not a reimplementation
of any kernel-machine reference.
"""

from __future__ import annotations

import csv
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .core import MAX_TUPLE_BITS
from .dataset import EventLog, TAG_NONCONFORM, TAG_STANDARD
from .encoding import ProcessTrace, UnitCatalog, build_catalog, encode_log, infer_max_seq
from .errors import ConfigurationError, InputError, SamplingError
from .rng import SplitMix64, U64_MASK, derive_seed

BASELINE_CONFIG_ID = "baseline-1nn"
_REP_CHUNK = 10


@dataclass(frozen=True)
class GridConfig:
    """One classifier configuration of the experiment grid."""

    ram_bits: int
    bleaching: bool
    ignore_zero: bool

    @property
    def config_id(self) -> str:
        return f"n{self.ram_bits:02d}-b{int(self.bleaching)}-z{int(self.ignore_zero)}"


@dataclass
class ExperimentGrid:
    """The experiment space: configurations, training sizes, repetitions, seed.

    ``train_sizes`` of None derives every even size from 2 up to twice the
    smaller pool (optionally capped by ``max_train_size``), stepping by
    ``step``. Sizes must be even: training halves are balanced.
    """

    ram_sizes: tuple[int, ...] = (2, 4, 8, 16)
    bleaching_states: tuple[bool, ...] = (True, False)
    ignore_zero_states: tuple[bool, ...] = (True, False)
    reps: int = 50
    step: int = 2
    train_sizes: tuple[int, ...] | None = None
    max_train_size: int | None = None
    master_seed: int = 0
    freeze_mapping: bool = False

    def __post_init__(self):
        self.ram_sizes = tuple(self.ram_sizes)
        self.bleaching_states = tuple(self.bleaching_states)
        self.ignore_zero_states = tuple(self.ignore_zero_states)
        if not self.ram_sizes or any(not 1 <= n <= MAX_TUPLE_BITS for n in self.ram_sizes):
            raise ConfigurationError(f"ram_sizes must lie in [1, {MAX_TUPLE_BITS}]")
        if not self.bleaching_states or not self.ignore_zero_states:
            raise ConfigurationError("bleaching/ignore-zero state lists must be non-empty")
        if self.reps < 1:
            raise ConfigurationError(f"reps must be >= 1, got {self.reps}")
        if self.step < 2 or self.step % 2:
            raise ConfigurationError(f"step must be even and >= 2, got {self.step}")
        if self.train_sizes is not None:
            self.train_sizes = tuple(sorted(set(int(s) for s in self.train_sizes)))
            if not self.train_sizes or any(s < 2 or s % 2 for s in self.train_sizes):
                raise ConfigurationError("train sizes must be even integers >= 2")
        if not 0 <= self.master_seed <= U64_MASK:
            raise ConfigurationError("master_seed must be a 64-bit unsigned integer")

    def configs(self) -> tuple[GridConfig, ...]:
        return tuple(GridConfig(n, b, z)
                     for n in self.ram_sizes
                     for b in self.bleaching_states
                     for z in self.ignore_zero_states)

    def resolve_sizes(self, sp_count: int, np_count: int) -> tuple[int, ...]:
        """Training sizes for the given pools; explicit sizes are validated."""
        smaller = min(sp_count, np_count)
        if self.train_sizes is not None:
            if self.train_sizes[-1] // 2 > smaller:
                raise ConfigurationError(
                    f"train size {self.train_sizes[-1]} needs {self.train_sizes[-1] // 2} "
                    f"traces per tag, pools have {sp_count} SP / {np_count} NP")
            return self.train_sizes
        upper = 2 * smaller
        if self.max_train_size is not None:
            upper = min(upper, self.max_train_size)
        if upper < 2:
            raise ConfigurationError(
                f"pools too small for a balanced training set "
                f"({sp_count} SP / {np_count} NP)")
        return tuple(range(2, upper + 1, self.step))


@dataclass(frozen=True)
class LearningCurvePoint:
    """Aggregated F1 of one (configuration, training size) cell."""

    config_id: str
    ram_bits: int | None
    bleaching: bool | None
    ignore_zero: bool | None
    train_size: int
    reps: int
    mean_f1: float
    std_f1: float
    degenerate: bool
    f1_values: tuple[float, ...]


def f1_score(predicted: Sequence[str], actual: Sequence[str], positive: str) -> float:
    """2TP / (2TP + FP + FN); 0 when the denominator vanishes."""
    if len(predicted) != len(actual):
        raise InputError(
            f"predicted and actual lengths differ: {len(predicted)} vs {len(actual)}")
    if not predicted:
        raise InputError("cannot score empty prediction lists")
    tp = fp = fn = 0
    for p, a in zip(predicted, actual):
        if p == positive and a == positive:
            tp += 1
        elif p == positive:
            fp += 1
        elif a == positive:
            fn += 1
    denominator = 2 * tp + fp + fn
    return (2 * tp / denominator) if denominator else 0.0


def sample_balanced(sp_pool: Sequence, np_pool: Sequence, train_size: int,
                    rng: SplitMix64):
    """Draw a balanced training set; everything left over is the eval set.

    Returns ``(train, eval)`` as lists of ``(item, tag)`` pairs. The SP half
    is drawn first, then the NP half, from one stream; training pairs are in
    draw order (the baseline's tie rule depends on it), eval pairs keep pool
    order, SP before NP.
    """
    if train_size < 2 or train_size % 2:
        raise SamplingError(f"train_size must be even and >= 2, got {train_size}")
    half = train_size // 2
    if half > len(sp_pool) or half > len(np_pool):
        raise SamplingError(
            f"train_size {train_size} needs {half} per tag, pools have "
            f"{len(sp_pool)} SP / {len(np_pool)} NP")
    sp_train, sp_eval = rng.split(sp_pool, half)
    np_train, np_eval = rng.split(np_pool, half)
    train = [(x, TAG_STANDARD) for x in sp_train] + [(x, TAG_NONCONFORM) for x in np_train]
    evaluation = [(x, TAG_STANDARD) for x in sp_eval] + [(x, TAG_NONCONFORM) for x in np_eval]
    return train, evaluation


def best_config(points: Sequence[LearningCurvePoint], threshold: float = 0.9):
    """Configs whose first crossing of the threshold happens earliest."""
    crossings: dict[str, int] = {}
    for point in sorted(points, key=lambda p: (p.config_id, p.train_size)):
        if point.config_id in crossings:
            continue
        if point.mean_f1 >= threshold:
            crossings[point.config_id] = point.train_size
    if not crossings:
        return CurveSelection(threshold=threshold, train_size=None, config_ids=())
    best_size = min(crossings.values())
    winners = tuple(sorted(cid for cid, size in crossings.items() if size == best_size))
    return CurveSelection(threshold=threshold, train_size=best_size, config_ids=winners)


@dataclass(frozen=True)
class CurveSelection:
    """Result of :func:`best_config`; empty ``config_ids`` means no crossing."""

    threshold: float
    train_size: int | None
    config_ids: tuple[str, ...]

    @property
    def reached(self) -> bool:
        return bool(self.config_ids)

    def describe(self) -> str:
        if not self.reached:
            return f"no configuration reached mean F1 >= {self.threshold}"
        ids = ", ".join(self.config_ids)
        return (f"first to reach mean F1 >= {self.threshold}: {ids} "
                f"at train size {self.train_size}")


# ---------------------------------------------------------------------------
# Curve runners


class _ClassData:
    """Deduplicated retinas and tag bookkeeping for one class of a log."""

    def __init__(self, log: EventLog, class_label: str | None,
                 catalog: UnitCatalog | None, max_seq: int | None, encoder: str):
        if not log.traces:
            raise ConfigurationError("event log is empty")
        traces = log.traces_of(class_label)
        if not traces:
            raise ConfigurationError(f"class {class_label!r} has no traces")
        untagged = [t.case_id for t in traces if t.tag not in (TAG_STANDARD, TAG_NONCONFORM)]
        if untagged:
            raise ConfigurationError(
                f"{len(untagged)} traces of class {class_label!r} lack an SP/NP tag "
                f"(first: {untagged[0]!r})")
        # Geometry comes from the whole log so every class shares one retina shape.
        self.catalog = catalog if catalog is not None else build_catalog(log.traces)
        self.max_seq = max_seq if max_seq is not None else infer_max_seq(log.traces)
        self.traces = traces
        retinas = encode_log(traces, self.catalog, self.max_seq, encoder)
        self.retina_len = retinas.shape[1]
        unique, inverse = np.unique(retinas, axis=0, return_inverse=True)
        self.symbols = unique
        self.sym_of = inverse.reshape(-1).astype(np.int64)
        self.bits_t = np.ascontiguousarray(unique.T)
        self.is_sp = np.array([t.tag == TAG_STANDARD for t in traces], dtype=bool)
        self.sp_positions = [i for i, t in enumerate(traces) if t.tag == TAG_STANDARD]
        self.np_positions = [i for i, t in enumerate(traces) if t.tag == TAG_NONCONFORM]
        if not self.sp_positions or not self.np_positions:
            raise ConfigurationError(
                f"class {class_label!r} needs both SP and NP traces "
                f"({len(self.sp_positions)} SP / {len(self.np_positions)} NP)")

    def pools(self) -> tuple[list[int], list[int]]:
        return self.sp_positions, self.np_positions


def _rep_f1(pred_positive: np.ndarray, actual_positive: np.ndarray) -> float:
    tp = int(np.count_nonzero(pred_positive & actual_positive))
    fp = int(np.count_nonzero(pred_positive & ~actual_positive))
    fn = int(np.count_nonzero(~pred_positive & actual_positive))
    denominator = 2 * tp + fp + fn
    return (2 * tp / denominator) if denominator else 0.0


def _aggregate(config_rows, reps: int, results: dict) -> list[LearningCurvePoint]:
    points = []
    for config_id, ram_bits, bleaching, ignore_zero, size in config_rows:
        f1s = []
        degenerate = False
        for rep in range(reps):
            f1, degen = results[(config_id, size, rep)]
            f1s.append(f1)
            degenerate = degenerate or degen
        values = np.array(f1s, dtype=np.float64)
        points.append(LearningCurvePoint(
            config_id=config_id, ram_bits=ram_bits, bleaching=bleaching,
            ignore_zero=ignore_zero, train_size=size, reps=reps,
            mean_f1=float(values.mean()), std_f1=float(values.std()),
            degenerate=degenerate, f1_values=tuple(f1s)))
    return points


def _run_chunks(tasks, run_chunk, jobs: int) -> dict:
    results: dict = {}
    if jobs <= 1:
        for task in tasks:
            results.update(run_chunk(task))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for chunk_result in pool.map(run_chunk, tasks):
                results.update(chunk_result)
    return results


def _chunked(reps: int):
    return [(lo, min(lo + _REP_CHUNK, reps)) for lo in range(0, reps, _REP_CHUNK)]


def run_learning_curve(log: EventLog, class_label: str | None, grid: ExperimentGrid,
                       *, catalog: UnitCatalog | None = None, max_seq: int | None = None,
                       encoder: str = "one_hot", positive_tag: str = TAG_STANDARD,
                       jobs: int = 1) -> list[LearningCurvePoint]:
    """Run the full grid for one class; see the module docstring for the protocol."""
    data = _ClassData(log, class_label, catalog, max_seq, encoder)
    sp_pool, np_pool = data.pools()
    sizes = grid.resolve_sizes(len(sp_pool), len(np_pool))
    configs = grid.configs()
    n_symbols = data.bits_t.shape[1]
    positive_is_sp = positive_tag == TAG_STANDARD

    geometry = {}
    for n in sorted(set(c.ram_bits for c in configs)):
        tuple_count = (data.retina_len + n - 1) // n
        geometry[n] = (tuple_count, tuple_count * n)

    frozen_addr: dict[str, np.ndarray] = {}
    if grid.freeze_mapping:
        for config in configs:
            tuple_count, padded = geometry[config.ram_bits]
            order = _kernels.shuffle_indices(
                padded, derive_seed(grid.master_seed, config.config_id, "map"))
            frozen_addr[config.config_id] = _kernels.extract_addresses_T(
                data.bits_t, order, config.ram_bits)

    local = threading.local()

    def workspace():
        ws = getattr(local, "ws", None)
        if ws is None:
            ws = {"tables": {}, "addr": {}}
            local.ws = ws
        return ws

    def run_chunk(task):
        ci, size, rep_lo, rep_hi = task
        config = configs[ci]
        cid = config.config_id
        n = config.ram_bits
        tuple_count, padded = geometry[n]
        ws = workspace()
        if n not in ws["tables"]:
            ws["tables"][n] = (np.zeros((tuple_count, 1 << n), dtype=np.uint16),
                               np.zeros((tuple_count, 1 << n), dtype=np.uint16))
            ws["addr"][n] = np.empty((tuple_count, n_symbols), dtype=np.uint32)
        table0, table1 = ws["tables"][n]
        out = {}
        for rep in range(rep_lo, rep_hi):
            rng = SplitMix64(derive_seed(grid.master_seed, cid, size, rep, "sample"))
            train, evaluation = sample_balanced(sp_pool, np_pool, size, rng)
            if cid in frozen_addr:
                addr_t = frozen_addr[cid]
            else:
                order = _kernels.shuffle_indices(
                    padded, derive_seed(grid.master_seed, cid, size, rep, "map"))
                addr_t = _kernels.extract_addresses_T(
                    data.bits_t, order, n, out=ws["addr"][n])
            # Class 0 is NP (the lexicographically smaller label), class 1 SP.
            sp_train = np.array([p for p, tag in train if tag == TAG_STANDARD], dtype=np.int64)
            np_train = np.array([p for p, tag in train if tag == TAG_NONCONFORM], dtype=np.int64)
            syms0, w0 = np.unique(data.sym_of[np_train], return_counts=True)
            syms1, w1 = np.unique(data.sym_of[sp_train], return_counts=True)
            pred, _, _, _ = _kernels.evaluate_rep(
                addr_t, n, config.bleaching, config.ignore_zero,
                syms0, w0.astype(np.int64), syms1, w1.astype(np.int64),
                table0, table1)
            eval_pos = np.array([p for p, _ in evaluation], dtype=np.int64)
            if eval_pos.size == 0:
                out[(cid, size, rep)] = (0.0, True)
                continue
            pred_sp = pred[data.sym_of[eval_pos]].astype(bool)
            actual_sp = data.is_sp[eval_pos]
            if positive_is_sp:
                f1 = _rep_f1(pred_sp, actual_sp)
            else:
                f1 = _rep_f1(~pred_sp, ~actual_sp)
            out[(cid, size, rep)] = (f1, False)
        return out

    tasks = [(ci, size, lo, hi)
             for ci in range(len(configs))
             for size in sizes
             for lo, hi in _chunked(grid.reps)]
    results = _run_chunks(tasks, run_chunk, jobs)
    rows = [(c.config_id, c.ram_bits, c.bleaching, c.ignore_zero, size)
            for c in configs for size in sizes]
    return _aggregate(rows, grid.reps, results)


# ---------------------------------------------------------------------------
# Hamming-distance 1-NN baseline

_POPCOUNT8 = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint16)


def baseline_classify(train_retinas, train_tags: Sequence[str], retina) -> str:
    """1-nearest-neighbor over Hamming distance; ties go to the earliest item."""
    train = np.asarray(train_retinas, dtype=np.uint8)
    if train.ndim != 2 or train.shape[0] == 0:
        raise InputError("baseline needs a non-empty 2-D training matrix")
    if len(train_tags) != train.shape[0]:
        raise InputError("one tag per training retina required")
    target = np.asarray(retina, dtype=np.uint8)
    if target.shape != (train.shape[1],):
        raise InputError(
            f"retina length {target.shape} does not match training shape {train.shape}")
    distances = np.count_nonzero(train != target[None, :], axis=1)
    return train_tags[int(np.argmin(distances))]


def run_baseline_curve(log: EventLog, class_label: str | None, grid: ExperimentGrid,
                       *, catalog: UnitCatalog | None = None, max_seq: int | None = None,
                       encoder: str = "one_hot", positive_tag: str = TAG_STANDARD,
                       jobs: int = 1) -> list[LearningCurvePoint]:
    """The 1-NN Hamming comparison curve under the same sampling protocol.

    Uses the grid's repetition count, training sizes, and master seed; the
    classifier-specific grid axes do not apply.
    """
    data = _ClassData(log, class_label, catalog, max_seq, encoder)
    sp_pool, np_pool = data.pools()
    sizes = grid.resolve_sizes(len(sp_pool), len(np_pool))
    packed = np.packbits(data.symbols, axis=1)
    n_symbols = packed.shape[0]
    positive_is_sp = positive_tag == TAG_STANDARD

    def run_chunk(task):
        size, rep_lo, rep_hi = task
        out = {}
        for rep in range(rep_lo, rep_hi):
            rng = SplitMix64(derive_seed(grid.master_seed, BASELINE_CONFIG_ID,
                                         size, rep, "sample"))
            train, evaluation = sample_balanced(sp_pool, np_pool, size, rng)
            eval_pos = np.array([p for p, _ in evaluation], dtype=np.int64)
            if eval_pos.size == 0:
                out[(BASELINE_CONFIG_ID, size, rep)] = (0.0, True)
                continue
            train_pos = np.array([p for p, _ in train], dtype=np.int64)
            train_pack = packed[data.sym_of[train_pos]]
            train_is_sp = np.array([tag == TAG_STANDARD for _, tag in train], dtype=bool)
            eval_syms = np.unique(data.sym_of[eval_pos])
            pred_sym = np.zeros(n_symbols, dtype=bool)
            for lo in range(0, len(eval_syms), 64):
                block = eval_syms[lo:lo + 64]
                xored = packed[block][:, None, :] ^ train_pack[None, :, :]
                dist = _POPCOUNT8[xored].sum(axis=2, dtype=np.int64)
                nearest = np.argmin(dist, axis=1)  # first minimum: earliest index
                pred_sym[block] = train_is_sp[nearest]
            pred_sp = pred_sym[data.sym_of[eval_pos]]
            actual_sp = data.is_sp[eval_pos]
            if positive_is_sp:
                f1 = _rep_f1(pred_sp, actual_sp)
            else:
                f1 = _rep_f1(~pred_sp, ~actual_sp)
            out[(BASELINE_CONFIG_ID, size, rep)] = (f1, False)
        return out

    tasks = [(size, lo, hi) for size in sizes for lo, hi in _chunked(grid.reps)]
    results = _run_chunks(tasks, run_chunk, jobs)
    rows = [(BASELINE_CONFIG_ID, None, None, None, size) for size in sizes]
    return _aggregate(rows, grid.reps, results)


# ---------------------------------------------------------------------------
# Output files

CURVE_COLUMNS = ("config_id", "ram_bits", "bleaching", "ignore_zero",
                 "train_size", "reps", "mean_f1", "std_f1", "degenerate")
REP_COLUMNS = ("config_id", "train_size", "rep", "f1")


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_curve_points(points: Sequence[LearningCurvePoint], path,
                       delimiter: str = ",", metadata: dict | None = None) -> None:
    """One row per (config, train size). ``#`` lines carry the resolved setup."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for key in sorted(metadata or {}):
            handle.write(f"# {key}={metadata[key]}\n")
        writer = csv.writer(handle, delimiter=delimiter)
        writer.writerow(CURVE_COLUMNS)
        for p in points:
            writer.writerow([_format_cell(v) for v in
                             (p.config_id, p.ram_bits, p.bleaching, p.ignore_zero,
                              p.train_size, p.reps, p.mean_f1, p.std_f1, p.degenerate)])


def write_rep_values(points: Sequence[LearningCurvePoint], path,
                     delimiter: str = ",", metadata: dict | None = None) -> None:
    """Per-repetition F1 rows for verbose inspection or custom aggregation."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for key in sorted(metadata or {}):
            handle.write(f"# {key}={metadata[key]}\n")
        writer = csv.writer(handle, delimiter=delimiter)
        writer.writerow(REP_COLUMNS)
        for p in points:
            for rep, f1 in enumerate(p.f1_values):
                writer.writerow([p.config_id, p.train_size, rep, f"{f1:.6f}"])
