# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: mapping shuffle, address extraction, repetition evaluation.

Bit-identical to ``wisardflow._kernels.fallback`` (the semantic reference);
the test suite enforces equality on randomized inputs. Loops release the GIL
so curve repetitions can run on a thread pool.
"""

import numpy as np

from ..errors import ConfigurationError, InputError

from libc.stdint cimport uint8_t, uint16_t, uint32_t, uint64_t, int64_t

BACKEND = "compiled"

cdef uint64_t _GOLDEN = 0x9E3779B97F4A7C15
cdef uint64_t _MIX1 = 0xBF58476D1CE4E5B9
cdef uint64_t _MIX2 = 0x94D049BB133111EB
cdef uint64_t _U64_MAX = 0xFFFFFFFFFFFFFFFF


cdef inline uint64_t _next_u64(uint64_t* state) nogil:
    state[0] = state[0] + _GOLDEN
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline uint64_t _randbelow(uint64_t* state, uint64_t bound) nogil:
    # Accept r <= 2^64 - (2^64 mod bound) - 1; (0 - bound) % bound == 2^64 mod bound.
    cdef uint64_t limit = _U64_MAX - ((<uint64_t>0 - bound) % bound)
    cdef uint64_t r
    while True:
        r = _next_u64(state)
        if r <= limit:
            return r % bound


def shuffle_indices(Py_ssize_t count, seed):
    """Seeded permutation of [0, count) as uint32 (SplitMix64 Fisher-Yates)."""
    arr = np.arange(count, dtype=np.uint32)
    cdef uint32_t[::1] a = arr
    cdef uint64_t state = <uint64_t><unsigned long long>seed
    cdef Py_ssize_t i
    cdef uint64_t j
    cdef uint32_t tmp
    with nogil:
        for i in range(count - 1, 0, -1):
            j = _randbelow(&state, <uint64_t>(i + 1))
            tmp = a[i]
            a[i] = a[<Py_ssize_t>j]
            a[<Py_ssize_t>j] = tmp
    return arr


def extract_addresses_T(const uint8_t[:, ::1] bits_t, const uint32_t[::1] order,
                        int n_bits, out=None):
    """Tuple addresses for a retina batch; see the fallback twin for the contract."""
    cdef Py_ssize_t retina_len = bits_t.shape[0]
    cdef Py_ssize_t batch = bits_t.shape[1]
    cdef Py_ssize_t padded = order.shape[0]
    if padded % n_bits != 0:
        raise InputError(f"order length {padded} is not a multiple of {n_bits}")
    cdef Py_ssize_t tuple_count = padded // n_bits
    if out is None:
        out = np.empty((tuple_count, batch), dtype=np.uint32)
    cdef uint32_t[:, ::1] o = out
    cdef Py_ssize_t k, j, m
    cdef Py_ssize_t src
    with nogil:
        for k in range(tuple_count):
            for m in range(batch):
                o[k, m] = 0
            for j in range(n_bits):
                src = <Py_ssize_t>order[k * n_bits + j]
                if src < retina_len:
                    for m in range(batch):
                        o[k, m] = (o[k, m] << 1) | bits_t[src, m]
                else:
                    for m in range(batch):
                        o[k, m] = o[k, m] << 1
    return out


def evaluate_rep(const uint32_t[:, ::1] addr_t, int n_bits,
                 bint bleaching, bint ignore_zero,
                 const int64_t[::1] syms0, const int64_t[::1] w0,
                 const int64_t[::1] syms1, const int64_t[::1] w1,
                 uint16_t[:, ::1] table0, uint16_t[:, ::1] table1):
    """Train, score, and reset one two-class repetition; see the fallback twin."""
    cdef Py_ssize_t tuple_count = addr_t.shape[0]
    cdef Py_ssize_t batch = addr_t.shape[1]
    cdef int64_t total0 = 0, total1 = 0
    cdef Py_ssize_t t
    for t in range(syms0.shape[0]):
        total0 += w0[t]
    for t in range(syms1.shape[0]):
        total1 += w1[t]
    cdef int64_t maxc = total0 if total0 > total1 else total1
    if maxc > 65535:
        raise ConfigurationError(
            f"training multiplicity {maxc} overflows the uint16 dense counter tables")

    hist0_arr = np.zeros((batch, maxc + 1), dtype=np.int64)
    hist1_arr = np.zeros((batch, maxc + 1), dtype=np.int64)
    counted_arr = np.zeros(batch, dtype=np.int64)
    pred_arr = np.zeros(batch, dtype=np.uint8)
    score_arr = np.empty(batch, dtype=np.int64)
    bleach_arr = np.zeros(batch, dtype=np.int64)
    amb_arr = np.zeros(batch, dtype=np.uint8)

    cdef int64_t[:, ::1] h0 = hist0_arr
    cdef int64_t[:, ::1] h1 = hist1_arr
    cdef int64_t[::1] counted = counted_arr
    cdef uint8_t[::1] pred = pred_arr
    cdef int64_t[::1] score = score_arr
    cdef int64_t[::1] bleach = bleach_arr
    cdef uint8_t[::1] amb = amb_arr

    cdef Py_ssize_t k, m
    cdef uint32_t a
    cdef int64_t s0, s1, b, prev, sc
    cdef Py_ssize_t n0 = syms0.shape[0], n1 = syms1.shape[0]

    with nogil:
        # Training writes (weights are per-retina multiplicities).
        for k in range(tuple_count):
            for t in range(n0):
                a = addr_t[k, syms0[t]]
                if ignore_zero and a == 0:
                    continue
                table0[k, a] = table0[k, a] + <uint16_t>w0[t]
            for t in range(n1):
                a = addr_t[k, syms1[t]]
                if ignore_zero and a == 0:
                    continue
                table1[k, a] = table1[k, a] + <uint16_t>w1[t]

        # Histogram counter values along every retina's address path.
        for k in range(tuple_count):
            for m in range(batch):
                a = addr_t[k, m]
                if ignore_zero and a == 0:
                    continue
                h0[m, <Py_ssize_t>table0[k, a]] += 1
                h1[m, <Py_ssize_t>table1[k, a]] += 1
                counted[m] += 1

        # Undo the writes: scratch tables leave zeroed.
        for k in range(tuple_count):
            for t in range(n0):
                a = addr_t[k, syms0[t]]
                if ignore_zero and a == 0:
                    continue
                table0[k, a] = table0[k, a] - <uint16_t>w0[t]
            for t in range(n1):
                a = addr_t[k, syms1[t]]
                if ignore_zero and a == 0:
                    continue
                table1[k, a] = table1[k, a] - <uint16_t>w1[t]

        # Per-retina decision: raise b until a unique winner or max score 0.
        for m in range(batch):
            s0 = counted[m] - h0[m, 0]
            s1 = counted[m] - h1[m, 0]
            if not bleaching:
                pred[m] = 1 if s1 > s0 else 0
                score[m] = s0 if s0 > s1 else s1
                bleach[m] = 0
                amb[m] = 1 if s0 == s1 else 0
                continue
            b = 0
            prev = 0
            while True:
                if s0 != s1:
                    pred[m] = 1 if s1 > s0 else 0
                    score[m] = s0 if s0 > s1 else s1
                    bleach[m] = b
                    amb[m] = 0
                    break
                if s0 == 0:
                    pred[m] = 0
                    amb[m] = 1
                    if b == 0:
                        bleach[m] = 0
                        score[m] = 0
                    else:
                        bleach[m] = b - 1
                        score[m] = prev
                    break
                prev = s0
                b += 1
                s0 -= h0[m, <Py_ssize_t>b]
                s1 -= h1[m, <Py_ssize_t>b]

    return pred_arr, score_arr, bleach_arr, amb_arr
