"""Pure-Python/numpy implementations of the hot kernels.

Selected at import time by ``wisardflow._kernels`` when the compiled
extension is unavailable (or when ``WISARDFLOW_PURE=1``). Semantics are the
contract: the compiled twin in ``_ext.pyx`` must return bit-identical
results, and the test suite compares the two on randomized inputs.

The three kernels:

* ``shuffle_indices`` — the seeded mapping permutation (SplitMix64 +
  Fisher-Yates, as documented in :mod:`wisardflow.rng`).
* ``extract_addresses_T`` — RAM addresses for a batch of retinas, transposed
  to (tuple, retina) layout.
* ``evaluate_rep`` — one learning-curve repetition over two classes: write
  training counters, score every retina with the bleaching rule, undo the
  writes (tables come in zeroed and leave zeroed).
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, InputError
from ..rng import index_permutation

BACKEND = "python"


def shuffle_indices(count: int, seed: int) -> np.ndarray:
    """Seeded permutation of [0, count) as uint32."""
    return np.array(index_permutation(count, seed), dtype=np.uint32)


def extract_addresses_T(bits_t, order, n_bits, out=None):
    """Tuple addresses for every retina in a batch.

    Args:
        bits_t: uint8 array (retina_len, batch), one 0/1 byte per bit,
            laid out position-major.
        order: uint32 permutation of [0, padded_len); entries >= retina_len
            are padding positions and read as 0.
        n_bits: tuple width; the first position listed for a tuple is the
            most significant address bit.
        out: optional preallocated uint32 (tuple_count, batch) array.

    Returns:
        uint32 array (tuple_count, batch) of addresses in [0, 2**n_bits).
    """
    retina_len, batch = bits_t.shape
    padded = order.shape[0]
    if padded % n_bits != 0:
        raise InputError(f"order length {padded} is not a multiple of {n_bits}")
    tuple_count = padded // n_bits
    if out is None:
        out = np.empty((tuple_count, batch), dtype=np.uint32)

    # Padding positions gather from a sentinel all-zero row.
    ext = np.concatenate([bits_t, np.zeros((1, batch), dtype=np.uint8)], axis=0)
    src = np.where(order < retina_len, order, retina_len)
    gathered = ext[src].reshape(tuple_count, n_bits, batch).astype(np.uint32)
    weights = (np.uint32(1) << np.arange(n_bits - 1, -1, -1, dtype=np.uint32))
    np.sum(gathered * weights[None, :, None], axis=1, dtype=np.uint32, out=out)
    return out


def evaluate_rep(addr_t, n_bits, bleaching, ignore_zero,
                 syms0, w0, syms1, w1, table0, table1):
    """Train, score, and reset one two-class repetition in dense-table form.

    Args:
        addr_t: uint32 (tuple_count, batch) addresses for every distinct
            retina, as produced by ``extract_addresses_T``.
        n_bits: tuple width (tables have 2**n_bits columns).
        bleaching: resolve ties by raising the counter threshold.
        ignore_zero: skip all-zero tuples in both training and scoring.
        syms0, w0: class-0 training retina column indices and multiplicities.
        syms1, w1: same for class 1. Class 0 is the lexicographically
            smaller label; unresolved ties predict class 0.
        table0, table1: zeroed uint16 (tuple_count, 2**n_bits) scratch
            tables; restored to zero before returning.

    Returns:
        (pred, score, bleach, ambiguous) over the batch: pred is uint8 0/1,
        score int64 (responding tuples at the decisive threshold), bleach
        int64 (final threshold), ambiguous uint8.
    """
    tuple_count, batch = addr_t.shape
    total0 = int(np.sum(w0, dtype=np.int64)) if len(w0) else 0
    total1 = int(np.sum(w1, dtype=np.int64)) if len(w1) else 0
    if max(total0, total1) > np.iinfo(table0.dtype).max:
        raise ConfigurationError(
            f"training multiplicity {max(total0, total1)} overflows the "
            f"{table0.dtype} dense counter tables")

    rows = np.arange(tuple_count)[:, None]
    for table, syms, weights in ((table0, syms0, w0), (table1, syms1, w1)):
        if len(syms) == 0:
            continue
        cols = addr_t[:, syms]
        live = np.broadcast_to(weights[None, :], cols.shape).astype(table.dtype)
        if ignore_zero:
            live = np.where(cols != 0, live, 0).astype(table.dtype)
        np.add.at(table, (rows, cols), live)

    counters0 = table0[rows, addr_t].astype(np.int64)
    counters1 = table1[rows, addr_t].astype(np.int64)
    valid = (addr_t != 0) if ignore_zero else np.ones_like(addr_t, dtype=bool)
    counted = valid.sum(axis=0, dtype=np.int64)

    # Undo the training writes so the scratch tables leave zeroed.
    for table, syms, weights in ((table0, syms0, w0), (table1, syms1, w1)):
        if len(syms) == 0:
            continue
        cols = addr_t[:, syms]
        live = np.broadcast_to(weights[None, :], cols.shape).astype(table.dtype)
        if ignore_zero:
            live = np.where(cols != 0, live, 0).astype(table.dtype)
        np.subtract.at(table, (rows, cols), live)

    # Per-retina histograms of counter values along the address path.
    maxc = max(total0, total1)
    cols_idx = np.broadcast_to(np.arange(batch)[None, :], addr_t.shape)
    hist0 = np.zeros((batch, maxc + 1), dtype=np.int64)
    hist1 = np.zeros((batch, maxc + 1), dtype=np.int64)
    np.add.at(hist0, (cols_idx[valid], counters0[valid]), 1)
    np.add.at(hist1, (cols_idx[valid], counters1[valid]), 1)

    # score_c(b) = |{tuples with counter > b}| = counted - cumsum(hist)[b]
    s0 = counted[:, None] - np.cumsum(hist0, axis=1)
    s1 = counted[:, None] - np.cumsum(hist1, axis=1)

    pred = np.zeros(batch, dtype=np.uint8)
    score = np.empty(batch, dtype=np.int64)
    bleach = np.zeros(batch, dtype=np.int64)
    ambiguous = np.zeros(batch, dtype=np.uint8)

    if not bleaching:
        a0, a1 = s0[:, 0], s1[:, 0]
        pred[:] = (a1 > a0).astype(np.uint8)
        score[:] = np.maximum(a0, a1)
        ambiguous[:] = (a0 == a1).astype(np.uint8)
        return pred, score, bleach, ambiguous

    diff = s0 != s1
    both_zero = (s0 == 0) & (s1 == 0)
    has_diff = diff.any(axis=1)
    first_diff = np.argmax(diff, axis=1)
    first_zero = np.argmax(both_zero, axis=1)  # always exists at b = maxc
    resolved = has_diff & (first_diff < first_zero)

    final_b = np.where(resolved, first_diff, np.maximum(first_zero - 1, 0))
    take = np.arange(batch)
    f0 = s0[take, final_b]
    f1 = s1[take, final_b]
    pred[:] = (resolved & (f1 > f0)).astype(np.uint8)
    score[:] = np.maximum(f0, f1)
    bleach[:] = final_b
    ambiguous[:] = (~resolved).astype(np.uint8)
    return pred, score, bleach, ambiguous
