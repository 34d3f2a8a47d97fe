"""Shared test utilities: independent brute-force references.

The evaluators here deliberately avoid the library's vectorized or
histogram-based shortcuts: addresses are computed bit by bit, scores by
walking every RAM dict, and the bleaching loop literally rescores at each
threshold. They exist to check the real implementations against a second,
dumber route.
"""

from __future__ import annotations

import numpy as np

from wisardflow.core import ClassificationResult, WisardModel


def brute_force_addresses(retina, model: WisardModel) -> list[int]:
    """Addresses by direct bit walking (first-listed position most significant)."""
    mapping = model.mapping
    n = model.config.bits_per_tuple
    padded = list(int(b) for b in retina) + [0] * (mapping.padded_len - mapping.retina_len)
    addresses = []
    for k in range(mapping.tuple_count):
        value = 0
        for j in range(n):
            value = value * 2 + padded[int(mapping.order[k * n + j])]
        addresses.append(value)
    return addresses


def brute_force_score(model: WisardModel, label: str, addresses, bleach: int) -> int:
    disc = model.discriminators[label]
    score = 0
    for k, a in enumerate(addresses):
        if model.config.ignore_zero and a == 0:
            continue
        if disc.rams[k].get(a, 0) > bleach:
            score += 1
    return score


def brute_force_classify(model: WisardModel, retina) -> ClassificationResult:
    """Literal rescoring loop: raise b by one while tied and the max is positive."""
    addresses = brute_force_addresses(retina, model)
    labels = sorted(model.discriminators)

    def all_scores(b):
        return {lab: brute_force_score(model, lab, addresses, b) for lab in labels}

    b = 0
    last_positive = None
    while True:
        scores = all_scores(b)
        top = max(scores.values())
        winners = [lab for lab in labels if scores[lab] == top]
        if len(winners) == 1:
            return ClassificationResult(winners[0], top, b, False, scores)
        if not model.config.bleaching:
            return ClassificationResult(winners[0], top, 0, True, scores)
        if top == 0:
            final_b = last_positive if last_positive is not None else 0
            final = all_scores(final_b)
            final_top = max(final.values())
            tied = [lab for lab in labels if final[lab] == final_top]
            return ClassificationResult(tied[0], final_top, final_b, True, final)
        last_positive = b
        b += 1


def random_retina(rng: np.random.Generator, length: int) -> np.ndarray:
    return rng.integers(0, 2, size=length).astype(np.uint8)


def count_distinct_pairwise(retinas) -> int:
    """Symbol counting by brute-force pairwise equality (no hashing)."""
    distinct = []
    for r in retinas:
        if not any(np.array_equal(r, d) for d in distinct):
            distinct.append(r)
    return len(distinct)
