import math

import numpy as np
import pytest
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from neighbortypes.annotations import SemanticType, SentenceLabel, TYPE_ORDER
from neighbortypes.graph import build_graph
from neighbortypes.metrics import MetricRow, TypeDistribution, compute_metric_table
from neighbortypes.reports import (
    Dendrogram,
    ReportError,
    TypeMatrix,
    heatmap_by_lexical_type,
    induce_hierarchy,
    neighbor_word_distribution,
    per_word_ntmr,
    read_heatmap_csv,
    read_hierarchy_json,
    table_by_sentence_type,
    write_heatmap_csv,
    write_hierarchy_json,
    write_per_word_csv,
    write_sentence_type_csv,
)
from helpers import crafted_corpus, make_corpus, reference_type_matrix

FOOD = SemanticType.FOOD
HUMAN = SemanticType.HUMAN


def metric(i, lexical_type, ntp_values, label=SentenceLabel.MATCHING, contextual=None):
    dist = TypeDistribution(np.asarray(ntp_values, dtype=np.float64))
    ntmr_c = dist[contextual] if contextual else None
    return MetricRow(
        instance_id=f"r{i}",
        label=label,
        lexical_type=lexical_type,
        contextual_type=contextual,
        ntp=dist,
        ntmr_l=dist[lexical_type],
        ntmr_c=ntmr_c,
        other_ratio=1.0 - dist[lexical_type] - (ntmr_c or 0.0),
        nte=0.0,
    )


def one_hot(semantic_type):
    values = np.zeros(10)
    values[TYPE_ORDER.index(semantic_type)] = 1.0
    return values


# --- type matrix -----------------------------------------------------------

def test_type_matrix_validation():
    with pytest.raises(ReportError):
        TypeMatrix(np.zeros((9, 10)))
    bad_sum = np.full((10, 10), np.nan)
    bad_sum[0] = 0.05
    with pytest.raises(ReportError):
        TypeMatrix(bad_sum)
    partial = np.full((10, 10), np.nan)
    partial[0] = 0.1
    partial[0, 3] = np.nan
    with pytest.raises(ReportError):
        TypeMatrix(partial)
    negative = np.full((10, 10), np.nan)
    negative[0] = 0.1
    negative[0, 0] = -0.1
    negative[0, 1] = 0.3
    with pytest.raises(ReportError):
        TypeMatrix(negative)

    ok = TypeMatrix(np.full((10, 10), 0.1))
    assert all(ok.present)
    assert ok.diagonal()[TYPE_ORDER[0]] == pytest.approx(0.1)


def test_heatmap_type_pure_neighborhoods_give_identity_rows():
    rows = [metric(0, FOOD, one_hot(FOOD)), metric(1, HUMAN, one_hot(HUMAN))]
    matrix = heatmap_by_lexical_type(rows)
    assert matrix.row(FOOD)[TYPE_ORDER.index(FOOD)] == 1.0
    assert matrix.row(HUMAN)[TYPE_ORDER.index(HUMAN)] == 1.0
    assert matrix.row(SemanticType.MOOD) is None
    present = [t for t, ok in zip(TYPE_ORDER, matrix.present) if ok]
    assert present == [FOOD, HUMAN]


def test_heatmap_averages_rows_per_type():
    r1 = np.array([0.0, 0.0, 0.0, 0.6, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0])
    r2 = np.array([0.0, 0.0, 0.2, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    rows = [metric(0, FOOD, r1), metric(1, FOOD, r2)]
    matrix = heatmap_by_lexical_type(rows)
    assert np.allclose(matrix.row(FOOD), (r1 + r2) / 2.0, atol=1e-15)


def test_heatmap_filter_defaults_to_matching_only():
    rows = [
        metric(0, FOOD, one_hot(FOOD)),
        metric(1, FOOD, one_hot(HUMAN), label=SentenceLabel.COERCION, contextual=HUMAN),
    ]
    matching_only = heatmap_by_lexical_type(rows)
    assert matching_only.row(FOOD)[TYPE_ORDER.index(FOOD)] == 1.0

    both = heatmap_by_lexical_type(
        rows, labels=frozenset({SentenceLabel.MATCHING, SentenceLabel.COERCION})
    )
    assert both.row(FOOD)[TYPE_ORDER.index(FOOD)] == 0.5

    with pytest.raises(ReportError):
        heatmap_by_lexical_type(rows, labels=frozenset())


def test_heatmap_diagonal_equals_mean_ntmr_l():
    corpus = make_corpus(seed=31, n_instances=100, dim=8, n_lemmas=20)
    graph = build_graph(corpus, k=10)
    table = compute_metric_table(graph, corpus.dataset)
    matrix = heatmap_by_lexical_type(table)
    for i, semantic_type in enumerate(TYPE_ORDER):
        values = [
            row.ntmr_l
            for row in table
            if row.label is SentenceLabel.MATCHING and row.lexical_type is semantic_type
        ]
        if values:
            assert matrix.values[i, i] == pytest.approx(float(np.mean(values)), abs=1e-12)
        else:
            assert not matrix.present[i]


# --- sentence-type table ----------------------------------------------------

def test_sentence_table_single_coercion_row_is_identity():
    ntp_values = np.array([0.1, 0.0, 0.0, 0.6, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0])
    rows = [metric(0, FOOD, ntp_values, label=SentenceLabel.COERCION, contextual=HUMAN)]
    table = table_by_sentence_type(rows)
    by_label = {entry.label: entry for entry in table}
    coercion = by_label[SentenceLabel.COERCION]
    assert coercion.count == 1
    assert coercion.mean_ntmr_l == pytest.approx(0.6)
    assert coercion.mean_ntmr_c == pytest.approx(0.3)
    assert coercion.mean_other_ratio == pytest.approx(0.1)
    # empty labels still appear, with no means
    assert by_label[SentenceLabel.MATCHING].count == 0
    assert by_label[SentenceLabel.MATCHING].mean_ntmr_l is None
    assert len(table) == 4


def test_sentence_table_means_are_per_instance():
    rows = [
        metric(0, FOOD, one_hot(FOOD)),
        metric(1, FOOD, np.array([0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0])),
    ]
    table = {entry.label: entry for entry in table_by_sentence_type(rows)}
    matching = table[SentenceLabel.MATCHING]
    assert matching.mean_ntmr_l == pytest.approx(0.75)
    assert matching.mean_ntmr_c is None
    assert matching.mean_other_ratio == pytest.approx(0.25)


# --- per-word table ---------------------------------------------------------

def test_per_word_percentages(tmp_path):
    corpus = crafted_corpus(
        [[1.0, 0.0], [1.0, 0.1], [0.1, 1.0], [0.0, 1.0]],
        lemmas=["apple", "bread", "crowd", "judge"],
        types=[FOOD, FOOD, HUMAN, HUMAN],
    )
    graph = build_graph(corpus, k=2)
    table = compute_metric_table(graph, corpus.dataset)
    words = per_word_ntmr(table, corpus.dataset)
    by_lemma = {w.lemma: w for w in words}
    # apple's two neighbors: bread (same type) then crowd -> 0.5
    assert by_lemma["apple"].mean_ntmr_l == pytest.approx(0.5)
    assert by_lemma["apple"].percent == 50.0
    assert by_lemma["apple"].lexical_type is FOOD
    # grouped by canonical type order
    assert [w.lexical_type for w in words] == [FOOD, FOOD, HUMAN, HUMAN]

    write_per_word_csv(words, tmp_path / "w.csv")
    lines = (tmp_path / "w.csv").read_text().splitlines()
    assert lines[0] == "lexical_type,lemma,count,mean_ntmr_l,percent"
    assert lines[1].endswith(",50.00")


def test_per_word_rounds_half_up():
    # 0.03125 is binary-exact; 3.125% must print as 3.13, not banker's 3.12
    values = np.zeros(10)
    values[TYPE_ORDER.index(FOOD)] = 0.03125
    values[TYPE_ORDER.index(HUMAN)] = 1.0 - 0.03125
    corpus = crafted_corpus([[1.0, 0.0]], lemmas=["apple"], types=[FOOD])
    rows = [metric(0, FOOD, values)]
    # dataset needs the lemma; reuse the single-record corpus but swap ids
    row = rows[0]
    fixed = MetricRow(
        instance_id="a0", label=row.label, lexical_type=row.lexical_type,
        contextual_type=row.contextual_type, ntp=row.ntp, ntmr_l=row.ntmr_l,
        ntmr_c=row.ntmr_c, other_ratio=row.other_ratio, nte=row.nte,
    )
    words = per_word_ntmr([fixed], corpus.dataset)
    assert words[0].percent == 3.13


# --- neighbor word distribution ---------------------------------------------

def test_neighbor_word_distribution_with_peers():
    # focus lemma has two instances; their 2-neighborhoods land on the peer
    # lemma three times and on an unrelated human lemma once
    corpus = crafted_corpus(
        [
            [1.0, 0.0],     # a0 focus instance 1
            [1.0, 0.05],    # a1 focus instance 2
            [1.0, 0.02],    # a2 peer
            [1.0, 0.03],    # a3 peer
            [0.9, 0.5],     # a4 other lemma, human
        ],
        lemmas=["alien", "alien", "robot", "robot", "judge"],
        types=[HUMAN, HUMAN, SemanticType.ARTIFACT, SemanticType.ARTIFACT, HUMAN],
    )
    graph = build_graph(corpus, k=2)
    dist = neighbor_word_distribution(graph, corpus.dataset, "alien", peers=("robot",))
    assert dist.edge_count == 4
    assert dist.peer_fractions["robot"] + sum(dist.type_fractions.values()) == pytest.approx(
        1.0, abs=1e-12
    )
    recount = sum(
        1
        for node in ("a0", "a1")
        for nid, _ in graph.neighbors(node)
        if corpus.dataset[nid].lemma == "robot"
    )
    assert dist.peer_fractions["robot"] == pytest.approx(recount / 4.0)

    rolled = dist.rollup([HUMAN])
    assert set(rolled) == {"robot", "human", "other"}
    assert sum(rolled.values()) == pytest.approx(1.0, abs=1e-12)


def test_neighbor_word_distribution_single_peer_case():
    corpus = crafted_corpus(
        [[1.0, 0.0], [1.0, 0.01]],
        lemmas=["alien", "robot"],
        types=[HUMAN, SemanticType.ARTIFACT],
    )
    graph = build_graph(corpus, k=1)
    dist = neighbor_word_distribution(graph, corpus.dataset, "alien", peers=("robot",))
    assert dist.peer_fractions == {"robot": 1.0}
    assert all(v == 0.0 for v in dist.type_fractions.values())


def test_neighbor_word_distribution_matches_recount_on_random_corpus():
    corpus = make_corpus(seed=37, n_instances=60, dim=8, n_lemmas=12)
    graph = build_graph(corpus, k=5)
    lemma = corpus.dataset[corpus.ids[0]].lemma
    dist = neighbor_word_distribution(graph, corpus.dataset, lemma)
    counts = {t: 0 for t in TYPE_ORDER}
    total = 0
    for record in corpus.dataset:
        if record.lemma != lemma:
            continue
        for nid, _ in graph.neighbors(record.instance_id):
            counts[corpus.dataset[nid].lexical_type] += 1
            total += 1
    for semantic_type in TYPE_ORDER:
        assert dist.type_fractions[semantic_type] == pytest.approx(counts[semantic_type] / total)


def test_neighbor_word_distribution_unknown_lemma():
    corpus = make_corpus(seed=2, n_instances=20, dim=4, n_lemmas=5)
    graph = build_graph(corpus, k=3)
    with pytest.raises(ReportError):
        neighbor_word_distribution(graph, corpus.dataset, "nonexistent")


# --- hierarchy ---------------------------------------------------------------

def cluster_names(clusters):
    return sorted(sorted(t.value for t in cluster) for cluster in clusters)


def test_reference_matrix_first_merge_and_cut():
    dendrogram = induce_hierarchy(reference_type_matrix())
    first = dendrogram.merges[0]
    assert first.left | first.right == {SemanticType.MOOD, SemanticType.STATE}
    assert first.similarity == pytest.approx(0.195, abs=1e-12)
    assert cluster_names(dendrogram.cut(4)) == [
        ["activity", "process"],
        ["animal", "human"],
        ["artifact", "food", "location"],
        ["info", "mood", "state"],
    ]


def test_merge_similarities_non_increasing():
    dendrogram = induce_hierarchy(reference_type_matrix())
    sims = [step.similarity for step in dendrogram.merges]
    assert len(sims) == 9
    assert all(a >= b - 1e-12 for a, b in zip(sims, sims[1:]))


def test_block_diagonal_matrix_splits_at_blocks():
    values = np.zeros((10, 10))
    values[:5, :5] = 0.2
    values[5:, 5:] = 0.2
    dendrogram = induce_hierarchy(TypeMatrix(values))
    assert cluster_names(dendrogram.cut(2)) == [
        ["activity", "animal", "artifact", "food", "human"],
        ["info", "location", "mood", "process", "state"],
    ]


def test_cut_bounds_and_extremes():
    dendrogram = induce_hierarchy(reference_type_matrix())
    assert len(dendrogram.cut(10)) == 10
    assert len(dendrogram.cut(1)) == 1
    with pytest.raises(ReportError):
        dendrogram.cut(0)
    with pytest.raises(ReportError):
        dendrogram.cut(11)


def test_hierarchy_requires_all_rows():
    values = np.full((10, 10), np.nan)
    values[0] = 0.1
    with pytest.raises(ReportError) as err:
        induce_hierarchy(TypeMatrix(values))
    assert "animal" in str(err.value)


def random_type_matrix(seed):
    rng = np.random.default_rng(seed)
    return TypeMatrix(rng.dirichlet(np.ones(10), size=10))


def test_linkage_matches_scipy_average():
    for seed in (0, 1, 2, 3, 4):
        matrix = random_type_matrix(seed)
        dendrogram = induce_hierarchy(matrix)

        sym = (matrix.values + matrix.values.T) / 2.0
        off = ~np.eye(10, dtype=bool)
        smax = sym[off].max()
        dist = smax - sym
        np.fill_diagonal(dist, 0.0)
        z = linkage(squareform(dist, checks=False), method="average")

        mine = [smax - step.similarity for step in dendrogram.merges]
        assert np.allclose(mine, z[:, 2], atol=1e-12)

        for n_clusters in (2, 3, 4, 5):
            labels = fcluster(z, t=n_clusters, criterion="maxclust")
            scipy_clusters = {}
            for name, lab in zip(TYPE_ORDER, labels):
                scipy_clusters.setdefault(lab, set()).add(name)
            assert cluster_names(dendrogram.cut(n_clusters)) == cluster_names(
                scipy_clusters.values()
            )


def test_hierarchy_invariant_under_type_relabeling():
    rng = np.random.default_rng(99)
    matrix = random_type_matrix(7)
    perm = rng.permutation(10)
    permuted = TypeMatrix(matrix.values[np.ix_(perm, perm)])

    base = induce_hierarchy(matrix)
    relabeled = induce_hierarchy(permuted)

    # row i of the permuted matrix holds the data of base type perm[i], so
    # mapping each relabeled type forward through perm must recover the
    # base partition at every cut level
    forward = {TYPE_ORDER[i]: TYPE_ORDER[int(perm[i])] for i in range(10)}
    for n_clusters in range(2, 10):
        mapped = [
            sorted(forward[t].value for t in cluster) for cluster in relabeled.cut(n_clusters)
        ]
        assert sorted(mapped) == cluster_names(base.cut(n_clusters))


# --- serialization -----------------------------------------------------------

def test_heatmap_csv_round_trip(tmp_path):
    rows = [
        metric(0, FOOD, one_hot(FOOD)),
        metric(1, HUMAN, np.array([0.0, 0.1, 0.0, 0.2, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0])),
    ]
    matrix = heatmap_by_lexical_type(rows)
    path = tmp_path / "heatmap.csv"
    write_heatmap_csv(matrix, path)

    lines = path.read_text().splitlines()
    assert lines[0].startswith("lexical_type,activity,animal,")
    assert len(lines) == 11
    mood_line = lines[1 + TYPE_ORDER.index(SemanticType.MOOD)]
    assert mood_line == "mood" + "," * 10  # absent row -> empty cells

    reread = read_heatmap_csv(path)
    assert reread.present == matrix.present
    for i in range(10):
        if matrix.present[i]:
            assert np.allclose(reread.values[i], matrix.values[i], atol=1e-9)


def test_heatmap_csv_rejects_malformed(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("lexical_type,a,b\nfood,1,0\n")
    with pytest.raises(ReportError):
        read_heatmap_csv(path)


def test_sentence_type_csv_layout(tmp_path):
    rows = [metric(0, FOOD, one_hot(FOOD))]
    path = tmp_path / "st.csv"
    write_sentence_type_csv(table_by_sentence_type(rows), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "label,count,mean_ntmr_l,mean_ntmr_c,mean_other_ratio,mean_nte"
    assert lines[1] == "matching,1,1.000000,,0.000000,0.000000"
    assert lines[2] == "coercion,0,,,,"


def test_hierarchy_json_round_trip(tmp_path):
    dendrogram = induce_hierarchy(reference_type_matrix())
    path = tmp_path / "hierarchy.json"
    write_hierarchy_json(dendrogram, path)

    text = path.read_text()
    assert '"linkage": "average"' in text
    assert '"tie_break": "canonical-type-order"' in text

    reread = read_hierarchy_json(path)
    assert reread.root.leaves() == frozenset(TYPE_ORDER)
    assert [step.similarity for step in reread.merges] == pytest.approx(
        [step.similarity for step in dendrogram.merges]
    )
    assert cluster_names(reread.cut(4)) == cluster_names(dendrogram.cut(4))
