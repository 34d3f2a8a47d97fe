"""Core classifier: mapping, addressing, training, scoring, bleaching."""

import numpy as np
import pytest

from helpers import brute_force_classify, random_retina
from wisardflow.core import (Discriminator, WisardModel, WnnConfig, build_mapping,
                             extract_addresses)
from wisardflow.errors import ConfigurationError, InputError, StateError
from wisardflow.model_io import serialize_model



def identity_model(n, retina_len, **kw):
    model = WisardModel(WnnConfig(bits_per_tuple=n, **kw), retina_len)
    order = np.arange(model.mapping.padded_len, dtype=np.uint32)
    order.setflags(write=False)
    object.__setattr__(model.mapping, "order", order)
    return model


class TestConfig:
    def test_valid_range(self):
        WnnConfig(bits_per_tuple=1)
        WnnConfig(bits_per_tuple=24)

    @pytest.mark.parametrize("bad", [0, 25, -3, 2.5])
    def test_bad_bits(self, bad):
        with pytest.raises(ConfigurationError):
            WnnConfig(bits_per_tuple=bad)

    def test_bad_seed(self):
        with pytest.raises(ConfigurationError):
            WnnConfig(bits_per_tuple=2, mapping_seed=-1)
        with pytest.raises(ConfigurationError):
            WnnConfig(bits_per_tuple=2, mapping_seed=1 << 64)


class TestBuildMapping:
    def test_exact_fit(self):
        mapping = build_mapping(8, WnnConfig(bits_per_tuple=2, mapping_seed=11))
        assert mapping.padded_len == 8 and mapping.tuple_count == 4
        assert sorted(mapping.order) == list(range(8))

    def test_padding_geometry(self):
        mapping = build_mapping(13494, WnnConfig(bits_per_tuple=16, mapping_seed=0))
        assert mapping.padded_len == 13504
        assert mapping.tuple_count == 844

    def test_determinism(self):
        cfg = WnnConfig(bits_per_tuple=3, mapping_seed=99)
        a = build_mapping(50, cfg)
        b = build_mapping(50, cfg)
        assert np.array_equal(a.order, b.order)

    def test_partition_property_random(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            length = int(rng.integers(1, 500))
            n = int(rng.integers(1, 17))
            cfg = WnnConfig(bits_per_tuple=n, mapping_seed=int(rng.integers(0, 2**63)))
            mapping = build_mapping(length, cfg)
            assert mapping.padded_len - length < n
            assert mapping.padded_len % n == 0
            assert sorted(mapping.order) == list(range(mapping.padded_len))

    def test_errors(self):
        with pytest.raises(ConfigurationError):
            build_mapping(0, WnnConfig(bits_per_tuple=2))


class TestExtractAddresses:
    def test_hand_example_identity_order(self):
        model = identity_model(2, 8, mapping_seed=0)
        retina = np.array([1, 0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        assert extract_addresses(retina, model.mapping).tolist() == [2, 3, 1, 0]

    def test_all_zero(self):
        mapping = build_mapping(16, WnnConfig(bits_per_tuple=4, mapping_seed=5))
        assert extract_addresses(np.zeros(16, np.uint8), mapping).tolist() == [0] * 4

    def test_all_ones_any_order(self):
        for seed in range(5):
            mapping = build_mapping(8, WnnConfig(bits_per_tuple=2, mapping_seed=seed))
            assert extract_addresses(np.ones(8, np.uint8), mapping).tolist() == [3] * 4

    def test_padding_reads_zero(self):
        # retina_len 5, n 4 -> padded 8; three padding positions contribute 0
        mapping = build_mapping(5, WnnConfig(bits_per_tuple=4, mapping_seed=2))
        addrs = extract_addresses(np.ones(5, np.uint8), mapping)
        total_ones = sum(bin(int(a)).count("1") for a in addrs)
        assert total_ones == 5

    def test_length_mismatch(self):
        mapping = build_mapping(8, WnnConfig(bits_per_tuple=2))
        with pytest.raises(InputError):
            extract_addresses(np.ones(7, np.uint8), mapping)

    def test_rejects_non_binary(self):
        mapping = build_mapping(4, WnnConfig(bits_per_tuple=2))
        with pytest.raises(InputError):
            extract_addresses(np.array([0, 1, 2, 0]), mapping)


class TestTrain:
    def test_single_example_counters(self):
        model = identity_model(2, 8)
        retina = np.array([1, 0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        model.train(retina, "A")
        disc = model.discriminators["A"]
        assert [dict(r) for r in disc.rams] == [{2: 1}, {3: 1}, {1: 1}, {0: 1}]
        assert model.trained_counts == {"A": 1}

    def test_repeat_increments(self):
        model = identity_model(2, 8)
        retina = np.array([1, 0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        model.train(retina, "A")
        model.train(retina, "A")
        assert all(c == 2 for ram in model.discriminators["A"].rams for c in ram.values())
        assert model.trained_counts["A"] == 2

    def test_ignore_zero_skips_zero_tuples(self):
        model = identity_model(2, 8, ignore_zero=True)
        model.train(np.array([1, 1, 0, 0, 0, 0, 0, 0], dtype=np.uint8), "A")
        rams = model.discriminators["A"].rams
        assert dict(rams[0]) == {3: 1}
        assert all(not rams[k] for k in (1, 2, 3))

    def test_other_discriminators_untouched(self):
        model = identity_model(2, 8)
        r1 = np.array([1, 0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        r2 = np.array([0, 1, 0, 0, 1, 0, 1, 1], dtype=np.uint8)
        model.train(r1, "A")
        before = [dict(r) for r in model.discriminators["A"].rams]
        model.train(r2, "B")
        assert [dict(r) for r in model.discriminators["A"].rams] == before


class TestScore:
    def test_untrained_scores_zero(self):
        disc = Discriminator(4)
        assert disc.score([1, 2, 3, 0]) == 0

    def test_perfect_recall_after_one_example(self):
        model = identity_model(2, 8)
        retina = np.array([1, 0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        model.train(retina, "A")
        addrs = extract_addresses(retina, model.mapping)
        assert model.discriminators["A"].score(addrs) == 4

    def test_bleach_threshold_example(self):
        # counters along the path: [2, 1, 1, 0]; only one exceeds b=1
        disc = Discriminator(4)
        disc.rams = [{5: 2}, {1: 1}, {2: 1}, {}]
        addrs = [5, 1, 2, 7]
        assert disc.score(addrs, bleach=0) == 3
        assert disc.score(addrs, bleach=1) == 1
        assert disc.score(addrs, bleach=2) == 0

    def test_ignore_zero_restricts(self):
        disc = Discriminator(3)
        disc.rams = [{0: 4}, {2: 1}, {0: 2}]
        assert disc.score([0, 2, 0], bleach=0, ignore_zero=True) == 1
        assert disc.score([0, 2, 0], bleach=0, ignore_zero=False) == 3

    def test_length_check(self):
        with pytest.raises(InputError):
            Discriminator(3).score([0, 1])


class TestClassify:
    def test_single_class_full_response(self):
        model = identity_model(2, 8)
        retina = np.array([1, 1, 0, 1, 1, 0, 0, 1], dtype=np.uint8)
        model.train(retina, "A")
        result = model.classify(retina)
        assert (result.label, result.score, result.final_bleach, result.ambiguous) == \
            ("A", 4, 0, False)
        assert result.per_class_scores == {"A": 4}

    def test_disjoint_patterns_separate(self):
        model = identity_model(2, 8)
        pa = np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=np.uint8)
        pb = np.array([0, 0, 0, 0, 1, 1, 1, 1], dtype=np.uint8)
        model.train(pa, "A")
        model.train(pb, "B")
        ra = model.classify(pa)
        rb = model.classify(pb)
        assert ra.label == "A" and rb.label == "B"
        assert ra.per_class_scores["A"] > ra.per_class_scores["B"]
        assert rb.per_class_scores["B"] > rb.per_class_scores["A"]

    def test_bleaching_resolves_depth_tie(self):
        model = identity_model(2, 8, bleaching=True)
        p = np.array([1, 0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        model.train(p, "A")
        model.train(p, "A")
        model.train(p, "B")
        result = model.classify(p)
        assert (result.label, result.score, result.final_bleach, result.ambiguous) == \
            ("A", 4, 1, False)

    def test_bleaching_off_reports_tie(self):
        model = identity_model(2, 8, bleaching=False)
        p = np.array([1, 0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        model.train(p, "A")
        model.train(p, "A")
        model.train(p, "B")
        result = model.classify(p)
        assert (result.label, result.final_bleach, result.ambiguous) == ("A", 0, True)
        assert result.per_class_scores == {"A": 4, "B": 4}

    def test_unresolved_tie_reports_last_positive_threshold(self):
        model = identity_model(2, 8, bleaching=True)
        p = np.array([1, 0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        model.train(p, "B")
        model.train(p, "A")
        result = model.classify(p)
        # both saturate identically at every threshold; tie breaks to "A"
        assert (result.label, result.score, result.final_bleach, result.ambiguous) == \
            ("A", 4, 0, True)

    def test_untrained_model_is_state_error(self):
        model = identity_model(2, 8)
        with pytest.raises(StateError):
            model.classify(np.zeros(8, np.uint8))

    def test_classify_never_mutates(self):
        model = identity_model(2, 8)
        rng = np.random.default_rng(3)
        for label in ("A", "B"):
            for _ in range(3):
                model.train(random_retina(rng, 8), label)
        before = serialize_model(model)
        for _ in range(20):
            model.classify(random_retina(rng, 8))
        assert serialize_model(model) == before


class TestAgainstBruteForce:
    def test_randomized_differential(self):
        rng = np.random.default_rng(1234)
        for _ in range(300):
            length = int(rng.integers(2, 17))
            n = int(rng.integers(1, 5))
            cfg = WnnConfig(
                bits_per_tuple=n,
                bleaching=bool(rng.integers(0, 2)),
                ignore_zero=bool(rng.integers(0, 2)),
                mapping_seed=int(rng.integers(0, 2**63)),
            )
            model = WisardModel(cfg, length)
            for label in ("A", "B", "C")[: int(rng.integers(1, 4))]:
                for _ in range(int(rng.integers(1, 5))):
                    model.train(random_retina(rng, length), label)
            probe = random_retina(rng, length)
            assert model.classify(probe) == brute_force_classify(model, probe)


class TestInvariants:
    def test_bleaching_monotone_and_bounded(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            length = int(rng.integers(2, 40))
            n = int(rng.integers(1, 6))
            cfg = WnnConfig(bits_per_tuple=n, mapping_seed=int(rng.integers(0, 2**63)))
            model = WisardModel(cfg, length)
            for _ in range(int(rng.integers(1, 8))):
                model.train(random_retina(rng, length), "A")
            addrs = extract_addresses(random_retina(rng, length), model.mapping)
            disc = model.discriminators["A"]
            previous = None
            for b in range(10):
                s = disc.score(addrs, bleach=b)
                assert 0 <= s <= model.mapping.tuple_count
                if previous is not None:
                    assert s <= previous
                previous = s

    def test_training_monotonicity(self):
        rng = np.random.default_rng(8)
        cfg = WnnConfig(bits_per_tuple=2, mapping_seed=12)
        model = WisardModel(cfg, 12)
        probes = [random_retina(rng, 12) for _ in range(10)]
        model.train(random_retina(rng, 12), "A")
        for _ in range(10):
            disc = model.discriminators["A"]
            before = [disc.score(extract_addresses(p, model.mapping)) for p in probes]
            model.train(random_retina(rng, 12), "A")
            after = [disc.score(extract_addresses(p, model.mapping)) for p in probes]
            assert all(b2 >= b1 for b1, b2 in zip(before, after))

    def test_seed_determinism_end_to_end(self):
        rng = np.random.default_rng(9)
        examples = [(random_retina(rng, 10), "AB"[int(rng.integers(0, 2))])
                    for _ in range(8)]
        probes = [random_retina(rng, 10) for _ in range(5)]

        def run():
            cfg = WnnConfig(bits_per_tuple=3, bleaching=True, mapping_seed=77)
            model = WisardModel(cfg, 10)
            for retina, label in examples:
                model.train(retina, label)
            return [model.classify(p) for p in probes]

        assert run() == run()

    def test_ignore_zero_consistency_when_no_zero_tuples(self):
        model = identity_model(2, 8)
        for label, pattern in (("A", [1, 1, 1, 1, 1, 1, 1, 1]),
                               ("B", [1, 0, 0, 1, 1, 0, 0, 1])):
            model.train(np.array(pattern, np.uint8), label)
        probe = np.array([1, 0, 1, 0, 1, 0, 1, 0], np.uint8)  # every pair nonzero
        addrs = extract_addresses(probe, model.mapping)
        for label in ("A", "B"):
            disc = model.discriminators[label]
            for b in range(3):
                assert disc.score(addrs, b, ignore_zero=True) == \
                    disc.score(addrs, b, ignore_zero=False)
