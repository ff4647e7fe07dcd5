"""Per-instance neighbor-type metrics.

For every node the out-neighborhood of the kNN graph is summarized as a
probability vector over the ten semantic types (the fraction of neighbors
carrying each type). From that distribution three scalar views are derived:

* the fraction at the instance's own lexical type,
* the fraction at its contextual type (only meaningful for mismatch rows),
* the entropy of the whole distribution (neighbor-type diversity).

Neighbors are always counted by their *lexical* type, on plain and masked
graphs alike; it is the one type defined for every neighbor. Entropy uses
the natural logarithm with the 0*log(0) = 0 convention; both conventions
are recorded in the metadata emitted next to metric exports.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .annotations import (
    MISMATCH_LABELS,
    TYPE_INDEX,
    TYPE_ORDER,
    Dataset,
    SemanticType,
    SentenceLabel,
    parse_semantic_type,
    parse_sentence_label,
)
from .graph import TIE_BREAK, NeighborGraph

#: Conventions recorded next to exported metric tables.
NTE_LOG_BASE = "e"
NEIGHBOR_TYPE_CONVENTION = "lexical"


class MetricError(ValueError):
    """Raised when a metric cannot be computed from the given graph/dataset."""


@dataclass(frozen=True)
class TypeDistribution:
    """Dense probability vector over the ten types, in canonical order."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(TYPE_ORDER),):
            raise MetricError(f"expected {len(TYPE_ORDER)} probabilities, got shape {vals.shape}")
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise MetricError("type probabilities must lie in [0, 1]")
        # tolerance sized for re-ingesting CSVs printed at 6 decimals
        # (10 cells x 5e-7 worst-case rounding); freshly computed
        # distributions are exact to 1e-12, asserted in the test suite
        if abs(float(vals.sum()) - 1.0) > 1e-5:
            raise MetricError(f"type probabilities sum to {vals.sum()}, expected 1")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, semantic_type: SemanticType) -> float:
        return float(self.values[TYPE_INDEX[semantic_type]])

    def as_dict(self) -> dict[SemanticType, float]:
        return {t: float(self.values[i]) for i, t in enumerate(TYPE_ORDER)}


@dataclass(frozen=True)
class MetricRow:
    """All per-instance metrics joined to the instance's annotation."""

    instance_id: str
    label: SentenceLabel
    lexical_type: SemanticType
    contextual_type: Optional[SemanticType]
    ntp: TypeDistribution
    ntmr_l: float
    ntmr_c: Optional[float]
    other_ratio: float
    nte: float


#: A metric table is simply the list of rows for one graph.
MetricTable = list


def ntp(graph: NeighborGraph, dataset: Dataset, node: str) -> TypeDistribution:
    """Fraction of the node's out-neighbors carrying each semantic type.

    The denominator is k; with an allow-deficit graph it is the node's
    actual out-degree instead, so the distribution still sums to 1.
    """
    neighbors = graph.neighbors(node)
    denom = len(neighbors) if graph.allow_deficit else graph.k
    if denom == 0:
        raise MetricError(f"node {node!r} has no out-neighbors; distribution undefined")
    counts = np.zeros(len(TYPE_ORDER), dtype=np.float64)
    for neighbor_id, _score in neighbors:
        try:
            record = dataset[neighbor_id]
        except Exception:
            raise MetricError(
                f"neighbor {neighbor_id!r} of node {node!r} is not in the dataset"
            ) from None
        counts[TYPE_INDEX[record.lexical_type]] += 1.0
    return TypeDistribution(values=counts / denom)


def nte(dist: TypeDistribution) -> float:
    """Entropy (natural log) of a type distribution; 0*log(0) counts as 0."""
    p = dist.values
    nonzero = p[p > 0.0]
    return float(-(nonzero * np.log(nonzero)).sum()) + 0.0


def metric_row(graph: NeighborGraph, dataset: Dataset, node: str) -> MetricRow:
    """Compute the full metric record for one instance."""
    record = dataset[node]
    dist = ntp(graph, dataset, node)
    ntmr_l = dist[record.lexical_type]
    if record.label in MISMATCH_LABELS:
        ntmr_c: Optional[float] = dist[record.contextual_type]
    else:
        ntmr_c = None
    other_ratio = 1.0 - ntmr_l - (ntmr_c if ntmr_c is not None else 0.0)
    return MetricRow(
        instance_id=node,
        label=record.label,
        lexical_type=record.lexical_type,
        contextual_type=record.contextual_type,
        ntp=dist,
        ntmr_l=ntmr_l,
        ntmr_c=ntmr_c,
        other_ratio=other_ratio,
        nte=nte(dist),
    )


def compute_metric_table(graph: NeighborGraph, dataset: Dataset) -> list[MetricRow]:
    """Metric rows for every node, in graph node order."""
    return [metric_row(graph, dataset, node) for node in graph.nodes]


_NTP_COLUMNS = [f"ntp_{t.value}" for t in TYPE_ORDER]
CSV_HEADER = [
    "id", "label", "lexical_type", "contextual_type",
    "ntmr_l", "ntmr_c", "other_ratio", "nte",
] + _NTP_COLUMNS


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.6f}"


def write_metric_csv(rows: Sequence[MetricRow], target: Union[str, Path]) -> None:
    """Write a metric table as CSV, floats with 6 decimal places, absent
    values as empty fields."""
    with open(Path(target), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.instance_id,
                    row.label.value,
                    row.lexical_type.value,
                    row.contextual_type.value if row.contextual_type is not None else "",
                    _fmt(row.ntmr_l),
                    _fmt(row.ntmr_c),
                    _fmt(row.other_ratio),
                    _fmt(row.nte),
                ]
                + [_fmt(v) for v in row.ntp.values]
            )


def read_metric_csv(source: Union[str, Path]) -> list[MetricRow]:
    """Read back a metric CSV written by :func:`write_metric_csv`."""
    rows: list[MetricRow] = []
    with open(Path(source), encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise MetricError(f"unexpected metric CSV header: {header}")
        for parts in reader:
            if not parts:
                continue
            values = np.array([float(v) for v in parts[8:18]], dtype=np.float64)
            rows.append(
                MetricRow(
                    instance_id=parts[0],
                    label=parse_sentence_label(parts[1]),
                    lexical_type=parse_semantic_type(parts[2]),
                    contextual_type=parse_semantic_type(parts[3]) if parts[3] else None,
                    ntp=TypeDistribution(values=values),
                    ntmr_l=float(parts[4]),
                    ntmr_c=float(parts[5]) if parts[5] else None,
                    other_ratio=float(parts[6]),
                    nte=float(parts[7]),
                )
            )
    return rows


def metric_metadata(graph: NeighborGraph) -> dict:
    """Conventions under which a metric table was computed; written as a
    JSON sidecar next to metric CSV exports."""
    return {
        "k": graph.k,
        "allow_deficit": graph.allow_deficit,
        "neighbor_type": NEIGHBOR_TYPE_CONVENTION,
        "nte_log_base": NTE_LOG_BASE,
        "model_id": graph.variant.model_id,
        "masked": graph.variant.masked,
        "tie_break": TIE_BREAK,
    }


def write_metric_metadata(meta: dict, target: Union[str, Path]) -> None:
    Path(target).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
