"""Synthetic dataset and embedding generator with controllable type geometry.

Places one unit centroid per semantic type, then samples instance vectors
around the centroids so that a plain-space graph favors lexical types while
a masked-space graph reflects contextual types:

- plain: matching and unrestricted vectors sit at the lexical centroid plus
  Gaussian noise; coercion vectors sit at a convex mix of lexical and
  contextual centroids.
- masked: matching vectors stay near the lexical centroid, coercion vectors
  move to the contextual centroid, unrestricted vectors scatter widely
  around the global centroid mean.

Generation is a single sequential PRNG stream, so equal seeds give
byte-identical bundles. The draw order is: centroid attempts; then per
instance in dataset order, the contextual type (coercion only), the plain
noise vector, the masked noise vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .annotations import TYPE_ORDER, Dataset, InstanceRecord, SemanticType, SentenceLabel
from .bundles import EmbeddingBundle, VariantTag

SYNTH_MODEL_ID = "synthetic"

CENTROID_ATTEMPTS = 1000


class SynthError(ValueError):
    """Raised for invalid configs or unsatisfiable geometry constraints."""


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 42
    dim: int = 32
    lemmas_per_type: int = 5
    instances_per_lemma: int = 12
    within_type_sigma: float = 0.1
    coercion_fraction: float = 0.1
    unrestricted_fraction: float = 0.1
    coercion_mix: float = 0.5
    masked_context_sigma: float = 0.15

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise SynthError(f"dim must be positive, got {self.dim}")
        if self.lemmas_per_type < 1:
            raise SynthError(f"lemmas_per_type must be positive, got {self.lemmas_per_type}")
        if self.instances_per_lemma < 1:
            raise SynthError(
                f"instances_per_lemma must be positive, got {self.instances_per_lemma}"
            )
        if self.within_type_sigma <= 0:
            raise SynthError(f"within_type_sigma must be positive, got {self.within_type_sigma}")
        if self.masked_context_sigma <= 0:
            raise SynthError(
                f"masked_context_sigma must be positive, got {self.masked_context_sigma}"
            )
        for name in ("coercion_fraction", "unrestricted_fraction", "coercion_mix"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise SynthError(f"{name} must be in [0, 1], got {value}")
        if self.coercion_fraction + self.unrestricted_fraction > 1.0:
            raise SynthError(
                "coercion_fraction + unrestricted_fraction must not exceed 1, got "
                f"{self.coercion_fraction} + {self.unrestricted_fraction}"
            )


def _draw_centroids(rng: np.random.Generator, config: SynthConfig) -> np.ndarray:
    """10 unit vectors with pairwise separation >= 4 * within_type_sigma."""
    n = len(TYPE_ORDER)
    min_sep = 4.0 * config.within_type_sigma
    for _ in range(CENTROID_ATTEMPTS):
        pts = rng.normal(0.0, 1.0, size=(n, config.dim))
        norms = np.linalg.norm(pts, axis=1)
        if (norms == 0.0).any():
            continue
        pts /= norms[:, None]
        gaps = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        if gaps[~np.eye(n, dtype=bool)].min() >= min_sep:
            return pts
    raise SynthError(
        f"could not place {n} centroids with separation >= {min_sep} "
        f"in dim {config.dim} after {CENTROID_ATTEMPTS} attempts"
    )


def _label_plan(config: SynthConfig) -> list[SentenceLabel]:
    """Per-lemma label sequence: coercion first, then unrestricted, then
    matching, with counts rounded from the configured fractions."""
    m = config.instances_per_lemma
    n_coercion = round(config.coercion_fraction * m)
    n_unrestricted = min(round(config.unrestricted_fraction * m), m - n_coercion)
    plan = [SentenceLabel.COERCION] * n_coercion
    plan += [SentenceLabel.UNRESTRICTED] * n_unrestricted
    plan += [SentenceLabel.MATCHING] * (m - len(plan))
    return plan


_SENTENCE_TEMPLATES = {
    SentenceLabel.MATCHING: "The {lemma} was exactly what everyone expected.",
    SentenceLabel.COERCION: "They finished the {lemma} before noon.",
    SentenceLabel.UNRESTRICTED: "There was a {lemma}.",
}


def _make_record(lemma: str, index: int, lexical_type: SemanticType,
                 label: SentenceLabel, contextual_type: Optional[SemanticType]) -> InstanceRecord:
    sentence = _SENTENCE_TEMPLATES[label].format(lemma=lemma)
    start = sentence.index(lemma)
    return InstanceRecord(
        instance_id=f"{lemma}-{index:02d}",
        lemma=lemma,
        sentence=sentence,
        span=(start, start + len(lemma)),
        lexical_type=lexical_type,
        label=label,
        contextual_type=contextual_type,
    )


def generate(config: SynthConfig) -> tuple[Dataset, EmbeddingBundle, EmbeddingBundle]:
    """Build the dataset and its plain and masked embedding bundles."""
    rng = np.random.default_rng(config.seed)
    centroids = _draw_centroids(rng, config)
    global_mean = centroids.mean(axis=0)
    plan = _label_plan(config)
    alpha = config.coercion_mix
    sigma_w = config.within_type_sigma
    sigma_m = config.masked_context_sigma

    records: list[InstanceRecord] = []
    plain_rows: list[np.ndarray] = []
    masked_rows: list[np.ndarray] = []
    for t, lexical_type in enumerate(TYPE_ORDER):
        for j in range(config.lemmas_per_type):
            lemma = f"{lexical_type.value}_w{j:02d}"
            for i, label in enumerate(plan):
                contextual_type = None
                if label is SentenceLabel.COERCION:
                    shift = int(rng.integers(1, len(TYPE_ORDER)))
                    contextual_type = TYPE_ORDER[(t + shift) % len(TYPE_ORDER)]
                records.append(_make_record(lemma, i, lexical_type, label, contextual_type))

                if label is SentenceLabel.COERCION:
                    c = TYPE_ORDER.index(contextual_type)
                    plain_center = (1.0 - alpha) * centroids[t] + alpha * centroids[c]
                    masked_center = centroids[c]
                    masked_sigma = sigma_m
                elif label is SentenceLabel.UNRESTRICTED:
                    plain_center = centroids[t]
                    masked_center = global_mean
                    masked_sigma = 3.0 * sigma_m
                else:
                    plain_center = centroids[t]
                    masked_center = centroids[t]
                    masked_sigma = sigma_m
                plain_rows.append(plain_center + rng.normal(0.0, sigma_w, config.dim))
                masked_rows.append(masked_center + rng.normal(0.0, masked_sigma, config.dim))

    dataset = Dataset.from_records(records)
    ids = dataset.ids
    plain = EmbeddingBundle(
        variant=VariantTag(model_id=SYNTH_MODEL_ID, masked=False),
        ids=ids,
        matrix=np.vstack(plain_rows),
    )
    masked = EmbeddingBundle(
        variant=VariantTag(model_id=SYNTH_MODEL_ID, masked=True),
        ids=ids,
        matrix=np.vstack(masked_rows),
    )
    return dataset, plain, masked
