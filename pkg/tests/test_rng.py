"""The deterministic generator is the reproducibility contract; pin it hard."""

import numpy as np
import pytest

from wisardflow.rng import SplitMix64, U64_MASK, derive_seed, index_permutation

# Published reference outputs of the SplitMix64 recurrence.
REFERENCE_SEED0 = (0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F)
REFERENCE_SEED1234567 = (0x599ED017FB08FC85, 0x2C73F08458540FA5, 0x883EBCE5A3F27C77)


class TestSplitMix64:
    def test_reference_vectors_seed0(self):
        gen = SplitMix64(0)
        assert tuple(gen.next_u64() for _ in range(3)) == REFERENCE_SEED0

    def test_reference_vectors_seed1234567(self):
        gen = SplitMix64(1234567)
        assert tuple(gen.next_u64() for _ in range(3)) == REFERENCE_SEED1234567

    def test_outputs_are_64_bit(self):
        gen = SplitMix64(U64_MASK)
        for _ in range(100):
            assert 0 <= gen.next_u64() <= U64_MASK

    def test_randbelow_range_and_determinism(self):
        for bound in (1, 2, 3, 7, 64, 1000, 2**40):
            a = SplitMix64(99)
            b = SplitMix64(99)
            draws = [a.randbelow(bound) for _ in range(50)]
            assert draws == [b.randbelow(bound) for _ in range(50)]
            assert all(0 <= d < bound for d in draws)

    def test_randbelow_rejects_bad_bound(self):
        with pytest.raises(ValueError):
            SplitMix64(0).randbelow(0)

    def test_random_unit_interval(self):
        gen = SplitMix64(5)
        values = [gen.random() for _ in range(1000)]
        assert all(0.0 <= v < 1.0 for v in values)
        assert 0.3 < sum(values) / len(values) < 0.7

    def test_shuffle_is_permutation(self):
        items = list(range(300))
        SplitMix64(17).shuffle(items)
        assert sorted(items) == list(range(300))
        assert items != list(range(300))

    def test_split_draw_and_remainder(self):
        pool = list(range(20))
        chosen, rest = SplitMix64(3).split(pool, 6)
        assert len(chosen) == 6 and len(rest) == 14
        assert sorted(chosen + rest) == pool
        assert rest == sorted(rest)  # remainder keeps original order
        again, rest2 = SplitMix64(3).split(pool, 6)
        assert again == chosen and rest2 == rest

    def test_split_bounds(self):
        full, none = SplitMix64(1).split([1, 2, 3], 3)
        assert sorted(full) == [1, 2, 3] and none == []
        with pytest.raises(ValueError):
            SplitMix64(1).split([1, 2], 3)


def test_index_permutation_partition():
    for seed in (0, 1, 42, U64_MASK):
        perm = index_permutation(257, seed)
        assert sorted(perm) == list(range(257))
    assert index_permutation(100, 7) == index_permutation(100, 7)
    assert index_permutation(100, 7) != index_permutation(100, 8)


def test_derive_seed_is_stable_and_distinct():
    base = derive_seed(0, "n02-b1-z0", 10, 3, "sample")
    assert base == derive_seed(0, "n02-b1-z0", 10, 3, "sample")
    assert 0 <= base <= U64_MASK
    others = {derive_seed(0, "n02-b1-z0", 10, rep, "sample") for rep in range(100)}
    assert len(others) == 100
    assert derive_seed(1, 2) != derive_seed(12, "")
