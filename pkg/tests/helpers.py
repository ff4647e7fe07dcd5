"""Shared builders for randomized test corpora and reference fixtures."""

from __future__ import annotations

import numpy as np

from neighbortypes.annotations import (
    TYPE_ORDER,
    Dataset,
    InstanceRecord,
    SentenceLabel,
)
from neighbortypes.bundles import AlignedCorpus, EmbeddingBundle, VariantTag, align

# Reference matching-only heatmap, as integer percentages. Row = lexical
# type of the source instances, column = neighbor type. Axis order here is
# animal, artifact, activity, food, human, info, location, mood, process,
# state (not canonical); reference_type_matrix() reindexes and normalizes.
REFERENCE_NTP_AXIS = (
    "animal", "artifact", "activity", "food", "human",
    "info", "location", "mood", "process", "state",
)
REFERENCE_NTP_PERCENT = np.array(
    [
        [86, 4, 0, 2, 7, 0, 1, 0, 0, 0],
        [3, 79, 0, 10, 0, 0, 4, 0, 2, 0],
        [0, 1, 88, 2, 0, 0, 2, 1, 6, 0],
        [1, 6, 1, 91, 1, 1, 0, 0, 0, 0],
        [6, 5, 1, 1, 86, 0, 2, 0, 0, 0],
        [0, 0, 0, 0, 0, 85, 1, 1, 0, 13],
        [0, 11, 1, 0, 1, 0, 84, 0, 2, 0],
        [0, 0, 0, 0, 0, 13, 1, 61, 1, 24],
        [0, 1, 17, 0, 1, 0, 3, 4, 70, 5],
        [0, 0, 3, 0, 1, 22, 3, 15, 12, 44],
    ],
    dtype=np.float64,
)


def reference_type_matrix():
    """The reference heatmap as a canonical-order, row-normalized
    TypeMatrix. Integer rows do not all sum to exactly 100 (they were read
    off at percent precision), so each row is renormalized."""
    from neighbortypes.reports import TypeMatrix

    canonical = [t.value for t in TYPE_ORDER]
    order = [REFERENCE_NTP_AXIS.index(name) for name in canonical]
    values = REFERENCE_NTP_PERCENT[np.ix_(order, order)]
    values = values / values.sum(axis=1, keepdims=True)
    return TypeMatrix(values)


def make_records(
    rng: np.random.Generator,
    n_instances: int,
    n_lemmas: int,
    coercion_fraction: float = 0.15,
    other_mismatch_fraction: float = 0.05,
    unrestricted_fraction: float = 0.10,
) -> list[InstanceRecord]:
    """Valid records with round-robin lemma assignment so every lemma keeps
    a healthy pool of different-lemma neighbor candidates."""
    lemma_names = [f"word{j:03d}" for j in range(n_lemmas)]
    lemma_types = [TYPE_ORDER[int(rng.integers(0, len(TYPE_ORDER)))] for _ in lemma_names]
    records = []
    for i in range(n_instances):
        j = i % n_lemmas
        lemma = lemma_names[j]
        lexical_type = lemma_types[j]
        draw = rng.random()
        contextual_type = None
        if draw < coercion_fraction:
            label = SentenceLabel.COERCION
        elif draw < coercion_fraction + other_mismatch_fraction:
            label = SentenceLabel.OTHER_MISMATCH
        elif draw < coercion_fraction + other_mismatch_fraction + unrestricted_fraction:
            label = SentenceLabel.UNRESTRICTED
        else:
            label = SentenceLabel.MATCHING
        if label in (SentenceLabel.COERCION, SentenceLabel.OTHER_MISMATCH):
            shift = int(rng.integers(1, len(TYPE_ORDER)))
            t = TYPE_ORDER.index(lexical_type)
            contextual_type = TYPE_ORDER[(t + shift) % len(TYPE_ORDER)]
        sentence = f"They saw the {lemma} yesterday."
        start = sentence.index(lemma)
        records.append(
            InstanceRecord(
                instance_id=f"inst{i:04d}",
                lemma=lemma,
                sentence=sentence,
                span=(start, start + len(lemma)),
                lexical_type=lexical_type,
                label=label,
                contextual_type=contextual_type,
            )
        )
    return records


def make_corpus(
    seed: int,
    n_instances: int = 60,
    dim: int = 8,
    n_lemmas: int = 12,
    model_id: str = "testmodel",
    masked: bool = False,
) -> AlignedCorpus:
    rng = np.random.default_rng(seed)
    records = make_records(rng, n_instances, n_lemmas)
    dataset = Dataset.from_records(records)
    matrix = rng.normal(size=(n_instances, dim))
    bundle = EmbeddingBundle(
        variant=VariantTag(model_id=model_id, masked=masked),
        ids=dataset.ids,
        matrix=matrix,
    )
    return align(bundle, dataset)


def crafted_corpus(rows, lemmas=None, types=None, labels=None, contextual=None):
    """Corpus from explicit vectors; ids a0, a1, ... with one lemma each by
    default (so only same-id edges are excluded)."""
    n = len(rows)
    lemmas = lemmas or [f"lemma{i}" for i in range(n)]
    types = types or [TYPE_ORDER[3]] * n  # food
    labels = labels or [SentenceLabel.MATCHING] * n
    contextual = contextual or [None] * n
    records = []
    for i in range(n):
        sentence = f"the {lemmas[i]} appeared"
        start = sentence.index(lemmas[i])
        records.append(
            InstanceRecord(
                instance_id=f"a{i}",
                lemma=lemmas[i],
                sentence=sentence,
                span=(start, start + len(lemmas[i])),
                lexical_type=types[i],
                label=labels[i],
                contextual_type=contextual[i],
            )
        )
    dataset = Dataset.from_records(records)
    bundle = EmbeddingBundle(
        variant=VariantTag("crafted", masked=False),
        ids=dataset.ids,
        matrix=np.array(rows, dtype=np.float64),
    )
    return align(bundle, dataset)
