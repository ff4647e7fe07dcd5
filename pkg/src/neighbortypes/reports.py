"""Aggregate views over metric tables.

Builds the per-type heatmap matrix, the per-sentence-type summary table,
per-word matching-ratio tables, neighbor-word distributions for a single
lemma, and the agglomerative type hierarchy induced from a heatmap matrix.

All aggregates are unweighted means of per-instance values, so every number
here can be re-derived from an exported metric CSV by an independent
script. Per-type and per-word views default to matching sentences only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .annotations import (
    TYPE_INDEX,
    TYPE_ORDER,
    Dataset,
    SemanticType,
    SentenceLabel,
)
from .graph import NeighborGraph
from .metrics import MetricRow

N_TYPES = len(TYPE_ORDER)

DEFAULT_LABEL_FILTER = frozenset({SentenceLabel.MATCHING})

HEATMAP_CELL_FORMAT = "{:.12f}"


class ReportError(ValueError):
    """Raised when an aggregate cannot be formed or an input is malformed."""


@dataclass(frozen=True)
class TypeMatrix:
    """Mean NTP distribution per lexical type: row = lexical type of the
    source instances, column = neighbor type, canonical order both ways.

    Rows for types with no instances are all-NaN and flagged absent;
    present rows sum to 1."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (N_TYPES, N_TYPES):
            raise ReportError(f"type matrix must be {N_TYPES}x{N_TYPES}, got {values.shape}")
        for i, row in enumerate(values):
            mask = np.isnan(row)
            if mask.all():
                continue
            if mask.any():
                raise ReportError(
                    f"row {TYPE_ORDER[i].value}: partially missing values"
                )
            if (row < -1e-12).any() or (row > 1.0 + 1e-12).any():
                raise ReportError(f"row {TYPE_ORDER[i].value}: values outside [0, 1]")
            total = float(row.sum())
            if abs(total - 1.0) > 1e-9:
                raise ReportError(
                    f"row {TYPE_ORDER[i].value}: sums to {total!r}, expected 1"
                )
        object.__setattr__(self, "values", values)

    @property
    def present(self) -> tuple[bool, ...]:
        return tuple(not np.isnan(self.values[i]).any() for i in range(N_TYPES))

    def row(self, semantic_type: SemanticType) -> Optional[np.ndarray]:
        i = TYPE_INDEX[semantic_type]
        if np.isnan(self.values[i]).any():
            return None
        return self.values[i]

    def diagonal(self) -> dict[SemanticType, Optional[float]]:
        out: dict[SemanticType, Optional[float]] = {}
        for i, semantic_type in enumerate(TYPE_ORDER):
            cell = self.values[i, i]
            out[semantic_type] = None if np.isnan(cell) else float(cell)
        return out


def _percent(value: float) -> float:
    """value*100 rounded half-up to 2 decimals, as the tables print it."""
    quantized = Decimal(repr(value * 100.0)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return float(quantized)


def heatmap_by_lexical_type(
    metrics: Sequence[MetricRow],
    labels: frozenset[SentenceLabel] = DEFAULT_LABEL_FILTER,
) -> TypeMatrix:
    """Unweighted mean NTP distribution per lexical type over instances
    whose sentence label passes the filter. Types with no surviving
    instances yield absent (NaN) rows."""
    if not labels:
        raise ReportError("label filter must not be empty")
    sums = np.zeros((N_TYPES, N_TYPES), dtype=np.float64)
    counts = np.zeros(N_TYPES, dtype=np.int64)
    for row in metrics:
        if row.label not in labels:
            continue
        i = TYPE_INDEX[row.lexical_type]
        sums[i] += row.ntp.values
        counts[i] += 1
    values = np.full((N_TYPES, N_TYPES), np.nan)
    for i in range(N_TYPES):
        if counts[i]:
            values[i] = sums[i] / counts[i]
    return TypeMatrix(values)


@dataclass(frozen=True)
class LabelSummary:
    label: SentenceLabel
    count: int
    mean_ntmr_l: Optional[float]
    mean_ntmr_c: Optional[float]  # None for labels that never carry it
    mean_other_ratio: Optional[float]
    mean_nte: Optional[float]


def table_by_sentence_type(metrics: Sequence[MetricRow]) -> list[LabelSummary]:
    """Per-label unweighted means of NTMR_L, NTMR_C, other ratio and NTE.

    Every label appears even with zero instances; the NTMR_C mean covers
    only rows that carry a contextual ratio."""
    rows: list[LabelSummary] = []
    for label in SentenceLabel:
        subset = [row for row in metrics if row.label == label]
        ntmr_c_vals = [row.ntmr_c for row in subset if row.ntmr_c is not None]
        rows.append(
            LabelSummary(
                label=label,
                count=len(subset),
                mean_ntmr_l=float(np.mean([r.ntmr_l for r in subset])) if subset else None,
                mean_ntmr_c=float(np.mean(ntmr_c_vals)) if ntmr_c_vals else None,
                mean_other_ratio=float(np.mean([r.other_ratio for r in subset])) if subset else None,
                mean_nte=float(np.mean([r.nte for r in subset])) if subset else None,
            )
        )
    return rows


@dataclass(frozen=True)
class WordNtmr:
    lemma: str
    lexical_type: SemanticType
    count: int
    mean_ntmr_l: float
    percent: float  # mean_ntmr_l * 100, half-up to 2 decimals


def per_word_ntmr(
    metrics: Sequence[MetricRow],
    dataset: Dataset,
    labels: frozenset[SentenceLabel] = DEFAULT_LABEL_FILTER,
) -> list[WordNtmr]:
    """Mean NTMR_L per lemma over filtered instances, grouped by lexical
    type in canonical order, highest ratio first within a type."""
    if not labels:
        raise ReportError("label filter must not be empty")
    per_lemma: dict[str, list[float]] = {}
    for row in metrics:
        if row.label not in labels:
            continue
        record = dataset[row.instance_id]
        per_lemma.setdefault(record.lemma, []).append(row.ntmr_l)
    out: list[WordNtmr] = []
    for lemma, values in per_lemma.items():
        lexical_type = dataset.lemma_type(lemma)
        mean = float(np.mean(values))
        out.append(
            WordNtmr(
                lemma=lemma,
                lexical_type=lexical_type,
                count=len(values),
                mean_ntmr_l=mean,
                percent=_percent(mean),
            )
        )
    out.sort(key=lambda w: (TYPE_INDEX[w.lexical_type], -w.mean_ntmr_l, w.lemma))
    return out


@dataclass(frozen=True)
class NeighborWordDistribution:
    """Where a lemma's out-edges land: named peer lemmas first, remaining
    edges attributed to their neighbor's lexical type. Fractions sum to 1."""

    lemma: str
    edge_count: int
    peer_fractions: dict[str, float]
    type_fractions: dict[SemanticType, float]

    def rollup(self, display_types: Sequence[SemanticType]) -> dict[str, float]:
        """Collapse to the named peers plus the listed types, everything
        else under "other"."""
        shown = {lemma: frac for lemma, frac in self.peer_fractions.items()}
        rest = 0.0
        for semantic_type, frac in self.type_fractions.items():
            if semantic_type in display_types:
                shown[semantic_type.value] = frac
            else:
                rest += frac
        shown["other"] = rest
        return shown


def neighbor_word_distribution(
    graph: NeighborGraph,
    dataset: Dataset,
    lemma: str,
    peers: Sequence[str] = (),
) -> NeighborWordDistribution:
    """Distribution of the lemma's neighbors over named peer lemmas and,
    for edges not landing on a peer, over neighbor lexical types."""
    if lemma not in dataset.lemma_index:
        raise ReportError(f"lemma {lemma!r} not in dataset")
    peer_set = set(peers)
    peer_counts = {p: 0 for p in peers}
    type_counts = {t: 0 for t in TYPE_ORDER}
    edge_count = 0
    for record in dataset.lemma_instances(lemma):
        for neighbor_id, _score in graph.neighbors(record.instance_id):
            neighbor = dataset[neighbor_id]
            edge_count += 1
            if neighbor.lemma in peer_set:
                peer_counts[neighbor.lemma] += 1
            else:
                type_counts[neighbor.lexical_type] += 1
    if edge_count == 0:
        raise ReportError(f"lemma {lemma!r} has no out-edges in the graph")
    return NeighborWordDistribution(
        lemma=lemma,
        edge_count=edge_count,
        peer_fractions={p: peer_counts[p] / edge_count for p in peers},
        type_fractions={t: type_counts[t] / edge_count for t in TYPE_ORDER},
    )


@dataclass(frozen=True)
class MergeStep:
    left: frozenset[SemanticType]
    right: frozenset[SemanticType]
    similarity: float


@dataclass(frozen=True)
class DendrogramNode:
    """Leaf (semantic_type set, no children) or internal merge node."""

    similarity: Optional[float]
    semantic_type: Optional[SemanticType] = None
    children: Optional[tuple["DendrogramNode", "DendrogramNode"]] = None

    def leaves(self) -> frozenset[SemanticType]:
        if self.semantic_type is not None:
            return frozenset({self.semantic_type})
        assert self.children is not None
        return self.children[0].leaves() | self.children[1].leaves()


@dataclass(frozen=True)
class Dendrogram:
    root: DendrogramNode
    merges: tuple[MergeStep, ...] = field(compare=False)

    def cut(self, n_clusters: int) -> frozenset[frozenset[SemanticType]]:
        """Partition obtained by replaying merges until n_clusters remain."""
        if not 1 <= n_clusters <= N_TYPES:
            raise ReportError(f"n_clusters must be in [1, {N_TYPES}], got {n_clusters}")
        clusters = {frozenset({t}) for t in TYPE_ORDER}
        for step in self.merges:
            if len(clusters) <= n_clusters:
                break
            clusters.remove(step.left)
            clusters.remove(step.right)
            clusters.add(step.left | step.right)
        return frozenset(clusters)


def induce_hierarchy(matrix: TypeMatrix) -> Dendrogram:
    """Agglomerate the 10 types by average linkage over symmetrized
    neighbor-type affinities.

    Affinity S = (M + M^T)/2 off-diagonal; distance = max(S) - S. Linkage
    distance between clusters is the mean of the original pairwise
    distances. Distance ties are broken toward the pair whose smallest
    member indices come first in canonical type order, so the tree is
    deterministic. Each merge records its similarity max(S) - distance,
    which is non-increasing over the merge sequence."""
    if not all(matrix.present):
        absent = [t.value for t, ok in zip(TYPE_ORDER, matrix.present) if not ok]
        raise ReportError(f"hierarchy needs all type rows present, missing: {absent}")
    sym = (matrix.values + matrix.values.T) / 2.0
    off_diagonal = ~np.eye(N_TYPES, dtype=bool)
    smax = float(sym[off_diagonal].max())
    dist = smax - sym

    # Active clusters keyed by their smallest member index.
    members: dict[int, tuple[int, ...]] = {i: (i,) for i in range(N_TYPES)}
    nodes: dict[int, DendrogramNode] = {
        i: DendrogramNode(similarity=None, semantic_type=TYPE_ORDER[i])
        for i in range(N_TYPES)
    }
    merges: list[MergeStep] = []
    while len(members) > 1:
        best_key = None
        best_pair = None
        for a in sorted(members):
            for b in sorted(members):
                if b <= a:
                    continue
                pair_dist = float(
                    np.mean([dist[i, j] for i in members[a] for j in members[b]])
                )
                key = (pair_dist, a, b)
                if best_key is None or key < best_key:
                    best_key = key
                    best_pair = (a, b)
        assert best_pair is not None and best_key is not None
        a, b = best_pair
        similarity = smax - best_key[0]
        left_set = frozenset(TYPE_ORDER[i] for i in members[a])
        right_set = frozenset(TYPE_ORDER[i] for i in members[b])
        merges.append(MergeStep(left=left_set, right=right_set, similarity=similarity))
        merged = DendrogramNode(similarity=similarity, children=(nodes[a], nodes[b]))
        members[a] = tuple(sorted(members[a] + members[b]))
        nodes[a] = merged
        del members[b]
        del nodes[b]
    return Dendrogram(root=nodes[0], merges=tuple(merges))


# ---------------------------------------------------------------------------
# serialization

def write_heatmap_csv(matrix: TypeMatrix, target: Union[str, Path]) -> None:
    names = [t.value for t in TYPE_ORDER]
    lines = ["lexical_type," + ",".join(names)]
    for i, name in enumerate(names):
        row = matrix.values[i]
        if np.isnan(row).any():
            cells = [""] * N_TYPES
        else:
            cells = [HEATMAP_CELL_FORMAT.format(v) for v in row]
        lines.append(name + "," + ",".join(cells))
    Path(target).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_heatmap_csv(source: Union[str, Path]) -> TypeMatrix:
    path = Path(source)
    lines = path.read_text(encoding="utf-8").splitlines()
    names = [t.value for t in TYPE_ORDER]
    expected_header = "lexical_type," + ",".join(names)
    if not lines or lines[0] != expected_header:
        raise ReportError(f"{path.name}: unexpected heatmap header")
    if len(lines) != N_TYPES + 1:
        raise ReportError(f"{path.name}: expected {N_TYPES} data rows, found {len(lines) - 1}")
    values = np.full((N_TYPES, N_TYPES), np.nan)
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != N_TYPES + 1 or parts[0] != names[i]:
            raise ReportError(f"{path.name}: malformed row for {names[i]}")
        if any(parts[1:]):
            values[i] = [float(cell) for cell in parts[1:]]
    return TypeMatrix(values)


def write_sentence_type_csv(rows: Sequence[LabelSummary], target: Union[str, Path]) -> None:
    def fmt(value: Optional[float]) -> str:
        return "" if value is None else f"{value:.6f}"

    lines = ["label,count,mean_ntmr_l,mean_ntmr_c,mean_other_ratio,mean_nte"]
    for row in rows:
        lines.append(
            ",".join(
                [
                    row.label.value,
                    str(row.count),
                    fmt(row.mean_ntmr_l),
                    fmt(row.mean_ntmr_c),
                    fmt(row.mean_other_ratio),
                    fmt(row.mean_nte),
                ]
            )
        )
    Path(target).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_per_word_csv(rows: Sequence[WordNtmr], target: Union[str, Path]) -> None:
    lines = ["lexical_type,lemma,count,mean_ntmr_l,percent"]
    for row in rows:
        lines.append(
            ",".join(
                [
                    row.lexical_type.value,
                    row.lemma,
                    str(row.count),
                    f"{row.mean_ntmr_l:.6f}",
                    f"{row.percent:.2f}",
                ]
            )
        )
    Path(target).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _node_to_json(node: DendrogramNode) -> dict:
    if node.semantic_type is not None:
        return {"type": node.semantic_type.value}
    assert node.children is not None
    return {
        "similarity": node.similarity,
        "children": [_node_to_json(child) for child in node.children],
    }


def write_hierarchy_json(dendrogram: Dendrogram, target: Union[str, Path]) -> None:
    payload = {
        "linkage": "average",
        "tie_break": "canonical-type-order",
        "tree": _node_to_json(dendrogram.root),
    }
    Path(target).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_hierarchy_json(source: Union[str, Path]) -> Dendrogram:
    """Rebuild a dendrogram from its JSON export (merge order recovered
    from similarities, which are non-increasing top-down)."""
    payload = json.loads(Path(source).read_text(encoding="utf-8"))
    if payload.get("linkage") != "average":
        raise ReportError("unsupported linkage in hierarchy file")

    def parse(node: dict) -> DendrogramNode:
        if "type" in node:
            return DendrogramNode(similarity=None, semantic_type=SemanticType(node["type"]))
        children = node["children"]
        if not isinstance(children, list) or len(children) != 2:
            raise ReportError("hierarchy nodes must have exactly two children")
        return DendrogramNode(
            similarity=float(node["similarity"]),
            children=(parse(children[0]), parse(children[1])),
        )

    root = parse(payload["tree"])
    merges: list[MergeStep] = []

    def collect(node: DendrogramNode) -> None:
        if node.children is None:
            return
        collect(node.children[0])
        collect(node.children[1])
        assert node.similarity is not None
        merges.append(
            MergeStep(
                left=node.children[0].leaves(),
                right=node.children[1].leaves(),
                similarity=node.similarity,
            )
        )

    collect(root)
    merges.sort(key=lambda step: -step.similarity)
    return Dendrogram(root=root, merges=tuple(merges))
