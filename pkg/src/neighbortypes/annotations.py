"""Semantic-type vocabulary, sentence labels, and annotated datasets.

An annotated dataset is a list of noun instances. Each instance records the
target noun (lemma), the sentence it occurs in, the character span of the
target word, the noun's own semantic type (the lexical type), a sentence
label classifying the relation between the noun and its context, and, for
mismatch sentences, the type the context selects for (the contextual type).

On-disk format: UTF-8 JSON Lines, one object per record with keys ``id``,
``lemma``, ``sentence``, ``span`` (two-integer array, [start, end) character
offsets), ``lexical_type``, ``label``, and optional ``contextual_type``.
Type and label strings are lowercase.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union


class DatasetError(ValueError):
    """Raised for malformed or inconsistent annotation data."""


class SemanticType(Enum):
    """The ten semantic types. Declaration order is alphabetical and is the
    canonical order used for every matrix and CSV layout."""

    ACTIVITY = "activity"
    ANIMAL = "animal"
    ARTIFACT = "artifact"
    FOOD = "food"
    HUMAN = "human"
    INFO = "info"
    LOCATION = "location"
    MOOD = "mood"
    PROCESS = "process"
    STATE = "state"


#: Canonical (alphabetical) type order for deterministic layouts.
TYPE_ORDER: tuple[SemanticType, ...] = tuple(SemanticType)

#: SemanticType -> position in TYPE_ORDER.
TYPE_INDEX: dict[SemanticType, int] = {t: i for i, t in enumerate(TYPE_ORDER)}


class SentenceLabel(Enum):
    """Relation between a noun's lexical type and its context."""

    MATCHING = "matching"
    COERCION = "coercion"
    OTHER_MISMATCH = "other_mismatch"
    UNRESTRICTED = "unrestricted"


#: Labels whose records carry a contextual type different from the lexical one.
MISMATCH_LABELS = frozenset({SentenceLabel.COERCION, SentenceLabel.OTHER_MISMATCH})


def parse_semantic_type(value: str) -> SemanticType:
    try:
        return SemanticType(value)
    except ValueError:
        valid = ", ".join(t.value for t in TYPE_ORDER)
        raise DatasetError(f"unknown semantic type {value!r} (expected one of: {valid})") from None


def parse_sentence_label(value: str) -> SentenceLabel:
    try:
        return SentenceLabel(value)
    except ValueError:
        valid = ", ".join(l.value for l in SentenceLabel)
        raise DatasetError(f"unknown sentence label {value!r} (expected one of: {valid})") from None


def _spanned_text_matches_lemma(spanned: str, lemma: str) -> bool:
    # Loose check: the span may hold an inflected form ("gulps" vs "gulp"),
    # so require containment or a shared prefix, not equality.
    s = spanned.lower()
    l = lemma.lower()
    if not s or not l:
        return False
    if l in s or s in l:
        return True
    common = 0
    for a, b in zip(s, l):
        if a != b:
            break
        common += 1
    return common >= min(3, len(s), len(l))


@dataclass(frozen=True)
class InstanceRecord:
    """One annotated noun occurrence.

    The contextual type is normalized on construction: matching records may
    omit it (it is set to the lexical type), unrestricted records must omit
    it, and mismatch records must carry one different from the lexical type.
    """

    instance_id: str
    lemma: str
    sentence: str
    span: tuple[int, int]
    lexical_type: SemanticType
    label: SentenceLabel
    contextual_type: Optional[SemanticType] = None

    def __post_init__(self) -> None:
        rid = self.instance_id
        if not rid:
            raise DatasetError("instance_id must be a non-empty string")
        if not self.lemma:
            raise DatasetError(f"record {rid!r}: lemma must be non-empty")
        start, end = self.span
        if not (0 <= start < end <= len(self.sentence)):
            raise DatasetError(
                f"record {rid!r}: span [{start}, {end}) out of bounds for "
                f"sentence of length {len(self.sentence)}"
            )
        spanned = self.sentence[start:end]
        if not _spanned_text_matches_lemma(spanned, self.lemma):
            raise DatasetError(
                f"record {rid!r}: span text {spanned!r} does not match lemma {self.lemma!r}"
            )
        ct = self.contextual_type
        if self.label is SentenceLabel.MATCHING:
            if ct is None:
                object.__setattr__(self, "contextual_type", self.lexical_type)
            elif ct is not self.lexical_type:
                raise DatasetError(
                    f"record {rid!r}: label is matching but contextual type "
                    f"{ct.value!r} differs from lexical type {self.lexical_type.value!r}"
                )
        elif self.label is SentenceLabel.UNRESTRICTED:
            if ct is not None:
                raise DatasetError(
                    f"record {rid!r}: label is unrestricted but a contextual "
                    f"type ({ct.value!r}) is present"
                )
        else:  # coercion / other_mismatch
            if ct is None:
                raise DatasetError(
                    f"record {rid!r}: label {self.label.value!r} requires a contextual type"
                )
            if ct is self.lexical_type:
                raise DatasetError(
                    f"record {rid!r}: label {self.label.value!r} requires a contextual "
                    f"type different from the lexical type {self.lexical_type.value!r}"
                )


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of instance records with id, lemma, and type
    indexes. Safe for concurrent read access."""

    records: tuple[InstanceRecord, ...]
    by_id: dict[str, InstanceRecord] = field(compare=False)
    lemma_index: dict[str, tuple[str, ...]] = field(compare=False)
    type_index: dict[SemanticType, tuple[str, ...]] = field(compare=False)

    @classmethod
    def from_records(cls, records: Sequence[InstanceRecord]) -> "Dataset":
        by_id: dict[str, InstanceRecord] = {}
        lemma_types: dict[str, SemanticType] = {}
        lemma_ids: dict[str, list[str]] = {}
        type_ids: dict[SemanticType, list[str]] = {}
        for rec in records:
            if rec.instance_id in by_id:
                raise DatasetError(f"duplicate instance_id {rec.instance_id!r}")
            by_id[rec.instance_id] = rec
            seen = lemma_types.get(rec.lemma)
            if seen is None:
                lemma_types[rec.lemma] = rec.lexical_type
            elif seen is not rec.lexical_type:
                raise DatasetError(
                    f"lemma {rec.lemma!r} has conflicting lexical types "
                    f"{seen.value!r} and {rec.lexical_type.value!r} "
                    f"(record {rec.instance_id!r})"
                )
            lemma_ids.setdefault(rec.lemma, []).append(rec.instance_id)
            type_ids.setdefault(rec.lexical_type, []).append(rec.instance_id)
        return cls(
            records=tuple(records),
            by_id=by_id,
            lemma_index={k: tuple(v) for k, v in lemma_ids.items()},
            type_index={k: tuple(v) for k, v in type_ids.items()},
        )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[InstanceRecord]:
        return iter(self.records)

    def __getitem__(self, instance_id: str) -> InstanceRecord:
        try:
            return self.by_id[instance_id]
        except KeyError:
            raise DatasetError(f"unknown instance_id {instance_id!r}") from None

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.instance_id for r in self.records)

    def lemma_instances(self, lemma: str) -> tuple[InstanceRecord, ...]:
        try:
            ids = self.lemma_index[lemma]
        except KeyError:
            raise DatasetError(f"unknown lemma {lemma!r}") from None
        return tuple(self.by_id[i] for i in ids)

    def lemma_type(self, lemma: str) -> SemanticType:
        """Lexical type shared by all instances of the lemma."""
        return self.lemma_instances(lemma)[0].lexical_type


def _record_from_json(obj: dict, where: str) -> InstanceRecord:
    if not isinstance(obj, dict):
        raise DatasetError(f"{where}: expected a JSON object, got {type(obj).__name__}")
    required = ("id", "lemma", "sentence", "span", "lexical_type", "label")
    missing = [k for k in required if k not in obj]
    if missing:
        raise DatasetError(f"{where}: missing keys: {', '.join(missing)}")
    span = obj["span"]
    if (
        not isinstance(span, (list, tuple))
        or len(span) != 2
        or not all(isinstance(x, int) and not isinstance(x, bool) for x in span)
    ):
        raise DatasetError(f"{where}: span must be a two-integer array, got {span!r}")
    ct_raw = obj.get("contextual_type")
    try:
        return InstanceRecord(
            instance_id=str(obj["id"]),
            lemma=str(obj["lemma"]),
            sentence=str(obj["sentence"]),
            span=(span[0], span[1]),
            lexical_type=parse_semantic_type(obj["lexical_type"]),
            label=parse_sentence_label(obj["label"]),
            contextual_type=None if ct_raw is None else parse_semantic_type(ct_raw),
        )
    except DatasetError as exc:
        raise DatasetError(f"{where}: {exc}") from None


def parse_dataset(source: Union[str, Path]) -> Dataset:
    """Parse an annotation file (JSON Lines) into a validated Dataset.

    Raises DatasetError with the offending line number for malformed lines,
    and with the offending record id for per-record inconsistencies.
    """
    path = Path(source)
    records: list[InstanceRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path.name}: line {lineno}: invalid JSON: {exc}") from None
            records.append(_record_from_json(obj, where=f"{path.name}: line {lineno}"))
    return Dataset.from_records(records)


def serialize_dataset(dataset: Dataset, target: Union[str, Path]) -> None:
    """Write a Dataset back to the JSON Lines annotation format.

    Matching and unrestricted records are written without a contextual_type
    key (it is implied by the label); parsing the output reproduces the
    Dataset exactly.
    """
    path = Path(target)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in dataset:
            obj: dict = {
                "id": rec.instance_id,
                "lemma": rec.lemma,
                "sentence": rec.sentence,
                "span": list(rec.span),
                "lexical_type": rec.lexical_type.value,
                "label": rec.label.value,
            }
            if rec.label in MISMATCH_LABELS:
                obj["contextual_type"] = rec.contextual_type.value
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class DatasetSummary:
    """Counts per sentence label and per lexical type; the label counts
    partition the record set."""

    total: int
    label_counts: dict[SentenceLabel, int]
    type_counts: dict[SemanticType, int]


def dataset_summary(dataset: Dataset) -> DatasetSummary:
    label_counts = {label: 0 for label in SentenceLabel}
    type_counts = {t: 0 for t in TYPE_ORDER}
    for rec in dataset:
        label_counts[rec.label] += 1
        type_counts[rec.lexical_type] += 1
    return DatasetSummary(total=len(dataset), label_counts=label_counts, type_counts=type_counts)
