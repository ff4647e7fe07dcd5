"""Directed k-nearest-neighbor graphs over instance embeddings.

Edges are ranked by cosine similarity and never connect two instances of the
same lemma, so neighborhoods reflect relations between different words
rather than repeated occurrences of one word. Construction is a full O(n^2)
pairwise scan; at the corpus sizes this library targets (a few thousand
instances) nothing faster is needed, and :func:`exhaustive_neighbors` keeps
an independently coded scan around as a verification oracle.

Similarity ties are broken deterministically: candidates are ordered by
(score descending, instance id ascending). The rule is recorded in the
export header so downstream readers can see it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .bundles import AlignedCorpus, VariantTag

TIE_BREAK = "score-desc,id-asc"


class GraphError(ValueError):
    """Raised for invalid graph construction inputs."""


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity of two vectors, accumulated in 64-bit.

    Raises GraphError on dimension mismatch or zero-norm input.
    """
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise GraphError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise GraphError("cosine similarity is undefined for zero-norm vectors")
    return float(np.dot(a, b) / (na * nb))


@dataclass(frozen=True)
class NeighborGraph:
    """Directed kNN graph. Every node has exactly ``k`` out-neighbors unless
    the graph was built with ``allow_deficit``, in which case nodes may have
    fewer (their actual out-degree then replaces ``k`` as the metric
    denominator downstream)."""

    k: int
    variant: VariantTag
    nodes: tuple[str, ...]
    adjacency: dict[str, tuple[tuple[str, float], ...]]
    allow_deficit: bool = False

    def neighbors(self, node: str) -> tuple[tuple[str, float], ...]:
        try:
            return self.adjacency[node]
        except KeyError:
            raise GraphError(f"unknown node {node!r}") from None

    def out_degree(self, node: str) -> int:
        return len(self.neighbors(node))

    def __len__(self) -> int:
        return len(self.nodes)


def _prepare(corpus: AlignedCorpus) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shared setup: 64-bit matrix, row norms, and lemma codes per row."""
    matrix = corpus.bundle.matrix.astype(np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise GraphError(f"zero-norm vector for id {corpus.ids[zero[0]]!r}")
    lemmas = [corpus.dataset[iid].lemma for iid in corpus.ids]
    _, lemma_codes = np.unique(lemmas, return_inverse=True)
    return matrix, norms, lemma_codes


def build_graph(corpus: AlignedCorpus, k: int, allow_deficit: bool = False) -> NeighborGraph:
    """Build the directed kNN graph over all instances of the corpus.

    For each node the k highest-cosine instances of *different* lemmas are
    selected (ties broken by ascending instance id). A node with fewer than
    k eligible candidates is an error unless ``allow_deficit`` is set, in
    which case it keeps all eligible candidates.
    """
    if k < 1:
        raise GraphError(f"k must be a positive integer, got {k}")
    ids = corpus.ids
    n = len(ids)
    matrix, norms, lemma_codes = _prepare(corpus)

    # Rank of each row's id in ascending lexicographic order, for tie-breaking.
    id_rank = np.empty(n, dtype=np.int64)
    id_rank[np.argsort(np.asarray(ids, dtype=object), kind="stable")] = np.arange(n)

    sims = matrix @ matrix.T
    sims /= np.outer(norms, norms)

    adjacency: dict[str, tuple[tuple[str, float], ...]] = {}
    for i in range(n):
        eligible = np.nonzero(lemma_codes != lemma_codes[i])[0]
        if eligible.size < k and not allow_deficit:
            raise GraphError(
                f"node {ids[i]!r} has only {eligible.size} different-lemma "
                f"candidate(s), need k={k} (use allow_deficit to keep reduced degree)"
            )
        scores = sims[i, eligible]
        order = np.lexsort((id_rank[eligible], -scores))
        top = eligible[order[:k]]
        adjacency[ids[i]] = tuple((ids[j], float(sims[i, j])) for j in top)

    return NeighborGraph(
        k=k, variant=corpus.bundle.variant, nodes=ids,
        adjacency=adjacency, allow_deficit=allow_deficit,
    )


def exhaustive_neighbors(
    corpus: AlignedCorpus, node: str, k: int, allow_deficit: bool = False
) -> list[tuple[str, float]]:
    """Brute-force oracle: rank one node's candidates by a plain per-pair
    scan with the same selection and tie rules as :func:`build_graph`.

    Deliberately avoids the vectorized similarity-matrix path so it can
    validate it (and any future accelerated implementation).
    """
    if k < 1:
        raise GraphError(f"k must be a positive integer, got {k}")
    ids = corpus.ids
    matrix, norms, _ = _prepare(corpus)
    try:
        row = corpus.row_of[node]
    except KeyError:
        raise GraphError(f"unknown node {node!r}") from None
    own_lemma = corpus.dataset[node].lemma
    query = matrix[row]
    query_norm = norms[row]

    candidates: list[tuple[str, float]] = []
    for j in range(len(ids)):
        if corpus.dataset[ids[j]].lemma == own_lemma:
            continue
        score = float(np.dot(matrix[j], query)) / (norms[j] * query_norm)
        candidates.append((ids[j], score))
    if len(candidates) < k and not allow_deficit:
        raise GraphError(
            f"node {node!r} has only {len(candidates)} different-lemma "
            f"candidate(s), need k={k} (use allow_deficit to keep reduced degree)"
        )
    candidates.sort(key=lambda pair: (-pair[1], pair[0]))
    return candidates[:k]


def _round9(x: float) -> float:
    return float(f"{x:.9g}")


def write_graph(graph: NeighborGraph, target: Union[str, Path]) -> None:
    """Export a graph as JSON Lines: a header object followed by one object
    per node, scores rounded to 9 significant digits."""
    path = Path(target)
    header = {
        "format": "knn-graph",
        "k": graph.k,
        "count": len(graph),
        "model_id": graph.variant.model_id,
        "masked": graph.variant.masked,
        "layer_policy": graph.variant.layer_policy,
        "allow_deficit": graph.allow_deficit,
        "tie_break": TIE_BREAK,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for node in graph.nodes:
            obj = {
                "id": node,
                "neighbors": [[nid, _round9(score)] for nid, score in graph.adjacency[node]],
            }
            fh.write(json.dumps(obj) + "\n")


def read_graph(source: Union[str, Path]) -> NeighborGraph:
    """Read a graph exported by :func:`write_graph`."""
    path = Path(source)
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise GraphError(f"{path.name}: missing header line")
        header = json.loads(header_line)
        if header.get("format") != "knn-graph":
            raise GraphError(f"{path.name}: not a knn-graph export")
        nodes: list[str] = []
        adjacency: dict[str, tuple[tuple[str, float], ...]] = {}
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            nodes.append(obj["id"])
            adjacency[obj["id"]] = tuple((nid, float(s)) for nid, s in obj["neighbors"])
    if len(nodes) != header["count"]:
        raise GraphError(
            f"{path.name}: header says count={header['count']} but found {len(nodes)} nodes"
        )
    variant = VariantTag(
        model_id=header["model_id"],
        masked=header["masked"],
        layer_policy=header["layer_policy"],
    )
    return NeighborGraph(
        k=header["k"], variant=variant, nodes=tuple(nodes),
        adjacency=adjacency, allow_deficit=header.get("allow_deficit", False),
    )
