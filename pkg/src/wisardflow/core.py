"""RAM-discriminator classifier core: mapping, training, bleaching classification.

A model holds one discriminator per class label. A discriminator is a bank of
``X`` RAM nodes; the retina's bit positions are divided pseudo-randomly into
``X`` tuples of ``n`` bits, and each tuple addresses one node's ``2**n``-entry
counter table. Training increments the counters along an example's address
path; a discriminator's score on an input is the number of nodes whose counter
at the input's address exceeds the bleaching threshold ``b`` (0 unless ties
force it upward). Highest score wins.

Counters (not single bits) are stored so that bleaching can raise ``b`` to
break saturation ties; with bleaching disabled, classification always reads at
``b = 0``, which is exactly one-bit behavior.

The mapping shuffle is SplitMix64 + Fisher-Yates (see :mod:`wisardflow.rng`),
so equal seeds give bit-identical mappings everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, InputError, StateError
from .rng import U64_MASK

MAX_TUPLE_BITS = 24


@dataclass(frozen=True)
class WnnConfig:
    """Classifier hyper-parameters.

    ``mapping_seed`` fully determines the retina mapping; ``ignore_zero``
    skips all-zero tuples in *both* training and classification, so sparse
    retinas are judged only on the tuples they actually light.
    """

    bits_per_tuple: int
    bleaching: bool = True
    ignore_zero: bool = False
    mapping_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.bits_per_tuple, int) or not 1 <= self.bits_per_tuple <= MAX_TUPLE_BITS:
            raise ConfigurationError(
                f"bits_per_tuple must be an integer in [1, {MAX_TUPLE_BITS}], "
                f"got {self.bits_per_tuple!r}")
        if not isinstance(self.mapping_seed, int) or not 0 <= self.mapping_seed <= U64_MASK:
            raise ConfigurationError(
                f"mapping_seed must be a 64-bit unsigned integer, got {self.mapping_seed!r}")


@dataclass(frozen=True, eq=False)
class TupleMapping:
    """Seeded partition of retina bit positions into tuples.

    ``order`` is a permutation of [0, padded_len); read ``bits_per_tuple`` at
    a time it defines the tuples, first-listed position = most significant
    address bit. Positions >= ``retina_len`` are padding and always read 0.
    """

    retina_len: int
    padded_len: int
    tuple_count: int
    order: np.ndarray


def build_mapping(retina_len: int, config: WnnConfig) -> TupleMapping:
    """Build the deterministic pseudo-random tuple mapping for a retina size."""
    if retina_len < 1:
        raise ConfigurationError(f"retina_len must be >= 1, got {retina_len}")
    n = config.bits_per_tuple
    tuple_count = (retina_len + n - 1) // n
    padded_len = tuple_count * n
    order = _kernels.shuffle_indices(padded_len, config.mapping_seed)
    order.setflags(write=False)
    return TupleMapping(retina_len=retina_len, padded_len=padded_len,
                        tuple_count=tuple_count, order=order)


def as_retina(bits) -> np.ndarray:
    """Normalize input to a 1-D uint8 0/1 array, validating the values."""
    arr = np.ascontiguousarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise InputError(f"retina must be one-dimensional, got shape {arr.shape}")
    if arr.size and arr.max() > 1:
        raise InputError("retina values must be 0 or 1")
    return arr


def extract_addresses(retina, mapping: TupleMapping) -> np.ndarray:
    """RAM addresses of one retina under a mapping (uint32, length tuple_count)."""
    bits = as_retina(retina)
    if bits.shape[0] != mapping.retina_len:
        raise InputError(
            f"retina length {bits.shape[0]} does not match mapping length "
            f"{mapping.retina_len}")
    n = mapping.padded_len // mapping.tuple_count
    ext = np.concatenate([bits, np.zeros(1, dtype=np.uint8)])
    src = np.where(mapping.order < mapping.retina_len, mapping.order, mapping.retina_len)
    grouped = ext[src].reshape(mapping.tuple_count, n).astype(np.uint32)
    weights = np.uint32(1) << np.arange(n - 1, -1, -1, dtype=np.uint32)
    return np.sum(grouped * weights[None, :], axis=1, dtype=np.uint32)


class Discriminator:
    """One class's bank of RAM nodes: a sparse ``address -> counter`` dict per tuple.

    Absent address means counter 0. Counters only grow during training and are
    never touched by classification.
    """

    __slots__ = ("rams",)

    def __init__(self, tuple_count: int):
        self.rams: list[dict[int, int]] = [{} for _ in range(tuple_count)]

    @property
    def tuple_count(self) -> int:
        return len(self.rams)

    def write(self, addresses, ignore_zero: bool = False) -> None:
        """Increment the counter addressed by every tuple of one example."""
        self._check_len(addresses)
        for k, a in enumerate(addresses):
            a = int(a)
            if ignore_zero and a == 0:
                continue
            ram = self.rams[k]
            c = ram.get(a, 0) + 1
            if c > U64_MASK:
                raise StateError(f"counter overflow at tuple {k}, address {a}")
            ram[a] = c

    def score(self, addresses, bleach: int = 0, ignore_zero: bool = False) -> int:
        """Responding RAM nodes: tuples whose counter exceeds ``bleach``."""
        self._check_len(addresses)
        responding = 0
        for k, a in enumerate(addresses):
            a = int(a)
            if ignore_zero and a == 0:
                continue
            if self.rams[k].get(a, 0) > bleach:
                responding += 1
        return responding

    def counters(self, addresses, ignore_zero: bool = False) -> list[int]:
        """Counter values along an address path (ignored tuples skipped)."""
        self._check_len(addresses)
        return [self.rams[k].get(int(a), 0)
                for k, a in enumerate(addresses)
                if not (ignore_zero and int(a) == 0)]

    def _check_len(self, addresses) -> None:
        if len(addresses) != len(self.rams):
            raise InputError(
                f"expected {len(self.rams)} addresses, got {len(addresses)}")


@dataclass(frozen=True)
class ClassificationResult:
    """Outcome of one classification at the decisive bleaching threshold."""

    label: str
    score: int
    final_bleach: int
    ambiguous: bool
    per_class_scores: dict[str, int]


class WisardModel:
    """Multi-class RAM-discriminator classifier over fixed-length retinas.

    Training is single-writer; once training is done the model is immutable
    under classification and may be shared freely across threads.
    """

    def __init__(self, config: WnnConfig, retina_len: int):
        self.config = config
        self.mapping = build_mapping(retina_len, config)
        self.discriminators: dict[str, Discriminator] = {}
        self.trained_counts: dict[str, int] = {}

    @property
    def retina_len(self) -> int:
        return self.mapping.retina_len

    def labels(self) -> list[str]:
        return sorted(self.discriminators)

    def train(self, retina, label: str) -> None:
        """Learn one example: increment the label's counters along its path."""
        addresses = extract_addresses(retina, self.mapping)
        disc = self.discriminators.get(label)
        if disc is None:
            disc = Discriminator(self.mapping.tuple_count)
            self.discriminators[label] = disc
        disc.write(addresses, ignore_zero=self.config.ignore_zero)
        self.trained_counts[label] = self.trained_counts.get(label, 0) + 1

    def classify(self, retina) -> ClassificationResult:
        """Score all discriminators, bleaching ties away if enabled.

        The threshold ``b`` starts at 0. While several classes tie for the
        maximum and that maximum is positive (and bleaching is on), ``b``
        rises by 1 and everything is rescored. An unresolved tie returns the
        lexicographically smallest tied label, flagged ambiguous, at the last
        threshold that still had a positive maximum.
        """
        if not self.discriminators:
            raise StateError("model has no trained discriminators")
        addresses = extract_addresses(retina, self.mapping)
        ignore = self.config.ignore_zero
        labels = self.labels()
        path = {lab: self.discriminators[lab].counters(addresses, ignore) for lab in labels}

        # Suffix tables: by monotonicity, score(b) = |{v > b}| along the path.
        maxv = max((max(vals) if vals else 0) for vals in path.values())
        suffix: dict[str, list[int]] = {}
        for lab, vals in path.items():
            hist = [0] * (maxv + 2)
            for v in vals:
                hist[v] += 1
            sfx = [0] * (maxv + 2)
            for b in range(maxv - 1, -1, -1):
                sfx[b] = sfx[b + 1] + hist[b + 1]
            suffix[lab] = sfx

        def scores_at(b: int) -> dict[str, int]:
            return {lab: (suffix[lab][b] if b <= maxv else 0) for lab in labels}

        b = 0
        while True:
            scores = scores_at(b)
            top = max(scores.values())
            winners = [lab for lab in labels if scores[lab] == top]
            if len(winners) == 1:
                return ClassificationResult(winners[0], top, b, False, scores)
            if not self.config.bleaching:
                return ClassificationResult(winners[0], top, 0, True, scores)
            if top == 0:
                final_b = b - 1 if b > 0 else 0
                final = scores_at(final_b)
                final_top = max(final.values())
                tied = [lab for lab in labels if final[lab] == final_top]
                return ClassificationResult(tied[0], final_top, final_b, True, final)
            b += 1
