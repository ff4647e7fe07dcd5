"""Command-line interface.

Subcommands cover the full pipeline: build-graph, metrics, aggregate,
compare, hierarchy, synth. Each writes deterministic artifacts into
--out-dir and prints the paths it wrote. Validation problems exit with
status 2 and a message on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .annotations import TYPE_ORDER, Dataset, SentenceLabel, parse_dataset, serialize_dataset
from .bundles import align, load_bundle, write_bundle
from .graph import NeighborGraph, build_graph, read_graph, write_graph
from .metrics import (
    MetricRow,
    compute_metric_table,
    metric_metadata,
    read_metric_csv,
    write_metric_csv,
    write_metric_metadata,
)
from .reports import (
    heatmap_by_lexical_type,
    induce_hierarchy,
    per_word_ntmr,
    read_heatmap_csv,
    table_by_sentence_type,
    write_heatmap_csv,
    write_hierarchy_json,
    write_per_word_csv,
    write_sentence_type_csv,
)
from .stats import compare_sentence_types, write_comparison_csv, write_means_csv
from .synth import SynthConfig, generate

LABEL_CHOICES = tuple(label.value for label in SentenceLabel)


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _label_filter(values: Optional[Sequence[str]]) -> frozenset[SentenceLabel]:
    if not values:
        return frozenset({SentenceLabel.MATCHING})
    return frozenset(SentenceLabel(v) for v in values)


def _emit(path: Path) -> None:
    print(path)


def _build_graph_for(args: argparse.Namespace, dataset: Dataset) -> NeighborGraph:
    bundle = load_bundle(args.bundle)
    corpus = align(bundle, dataset)
    return build_graph(corpus, k=args.k, allow_deficit=args.allow_deficit)


def _cmd_build_graph(args: argparse.Namespace) -> int:
    dataset = parse_dataset(args.dataset)
    graph = _build_graph_for(args, dataset)
    out = _out_dir(args)
    target = out / f"graph_{graph.variant.slug()}.jsonl"
    write_graph(graph, target)
    _emit(target)
    return 0


def _metric_rows(args: argparse.Namespace, dataset: Dataset) -> tuple[NeighborGraph, list[MetricRow]]:
    if getattr(args, "graph", None):
        graph = read_graph(args.graph)
    else:
        if not args.bundle:
            raise ValueError("either --graph or --bundle is required")
        graph = _build_graph_for(args, dataset)
    return graph, compute_metric_table(graph, dataset)


def _cmd_metrics(args: argparse.Namespace) -> int:
    dataset = parse_dataset(args.dataset)
    graph, rows = _metric_rows(args, dataset)
    out = _out_dir(args)
    slug = graph.variant.slug()
    csv_path = out / f"metrics_{slug}.csv"
    meta_path = out / f"metrics_{slug}.meta.json"
    write_metric_csv(rows, csv_path)
    write_metric_metadata(metric_metadata(graph), meta_path)
    _emit(csv_path)
    _emit(meta_path)
    return 0


def _slug_from_metrics_path(path: Path, override: Optional[str]) -> str:
    if override:
        return override
    stem = path.stem
    prefix = "metrics_"
    return stem[len(prefix):] if stem.startswith(prefix) else stem


def _cmd_aggregate(args: argparse.Namespace) -> int:
    dataset = parse_dataset(args.dataset)
    metrics_path = Path(args.metrics)
    rows = read_metric_csv(metrics_path)
    labels = _label_filter(args.filter_label)
    slug = _slug_from_metrics_path(metrics_path, args.name)
    out = _out_dir(args)

    matrix = heatmap_by_lexical_type(rows, labels)
    heatmap_path = out / f"heatmap_{slug}.csv"
    write_heatmap_csv(matrix, heatmap_path)
    _emit(heatmap_path)

    table_path = out / f"sentence_types_{slug}.csv"
    write_sentence_type_csv(table_by_sentence_type(rows), table_path)
    _emit(table_path)

    words_path = out / f"per_word_{slug}.csv"
    write_per_word_csv(per_word_ntmr(rows, dataset, labels), words_path)
    _emit(words_path)

    if all(matrix.present):
        hierarchy_path = out / f"hierarchy_{slug}.json"
        write_hierarchy_json(induce_hierarchy(matrix), hierarchy_path)
        _emit(hierarchy_path)
    else:
        absent = [t.value for t, ok in zip(TYPE_ORDER, matrix.present) if not ok]
        print(
            "hierarchy skipped, no instances for: " + " ".join(absent),
            file=sys.stderr,
        )
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    dataset = parse_dataset(args.dataset)
    tables: dict[str, list[MetricRow]] = {}
    for bundle_dir in args.bundle:
        bundle = load_bundle(bundle_dir)
        corpus = align(bundle, dataset)
        graph = build_graph(corpus, k=args.k, allow_deficit=args.allow_deficit)
        tables[graph.variant.slug()] = compute_metric_table(graph, dataset)
    report = compare_sentence_types(tables)
    out = _out_dir(args)
    comparisons_path = out / "comparisons.csv"
    means_path = out / "nte_means.csv"
    write_comparison_csv(report, comparisons_path)
    write_means_csv(report, means_path)
    _emit(comparisons_path)
    _emit(means_path)
    return 0


def _cmd_hierarchy(args: argparse.Namespace) -> int:
    heatmap_path = Path(args.heatmap)
    matrix = read_heatmap_csv(heatmap_path)
    dendrogram = induce_hierarchy(matrix)
    name = args.name
    if not name:
        stem = heatmap_path.stem
        prefix = "heatmap_"
        name = stem[len(prefix):] if stem.startswith(prefix) else stem
    out = _out_dir(args)
    target = out / f"hierarchy_{name}.json"
    write_hierarchy_json(dendrogram, target)
    _emit(target)
    if args.cut:
        clusters = sorted(
            (sorted(t.value for t in cluster) for cluster in dendrogram.cut(args.cut)),
            key=lambda names: names[0],
        )
        for names in clusters:
            print("cluster: " + " ".join(names))
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    config = SynthConfig(
        seed=args.seed,
        dim=args.dim,
        lemmas_per_type=args.lemmas_per_type,
        instances_per_lemma=args.instances_per_lemma,
        within_type_sigma=args.within_type_sigma,
        coercion_fraction=args.coercion_fraction,
        unrestricted_fraction=args.unrestricted_fraction,
        coercion_mix=args.coercion_mix,
        masked_context_sigma=args.masked_context_sigma,
    )
    dataset, plain, masked = generate(config)
    out = _out_dir(args)
    dataset_path = out / "dataset.jsonl"
    serialize_dataset(dataset, dataset_path)
    _emit(dataset_path)
    for bundle, name in ((plain, "plain"), (masked, "masked")):
        bundle_dir = out / name
        write_bundle(bundle, bundle_dir)
        _emit(bundle_dir)
    return 0


def _add_common_io(parser: argparse.ArgumentParser, *, bundle_required: bool = True) -> None:
    parser.add_argument("--dataset", required=True, help="annotation JSONL file")
    parser.add_argument(
        "--bundle", required=bundle_required, help="embedding bundle directory"
    )
    parser.add_argument("--k", type=int, default=10, help="neighbors per node (default 10)")
    parser.add_argument(
        "--allow-deficit",
        action="store_true",
        help="permit nodes with fewer than k eligible neighbors",
    )
    parser.add_argument("--out-dir", default=".", help="directory for outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neighbortypes",
        description="Neighbor-type metrics over kNN graphs of word embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="build a kNN graph and export it")
    _add_common_io(p)
    p.set_defaults(func=_cmd_build_graph)

    p = sub.add_parser("metrics", help="compute per-instance NTP/NTMR/NTE rows")
    _add_common_io(p, bundle_required=False)
    p.add_argument("--graph", help="reuse an exported graph instead of rebuilding")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("aggregate", help="aggregate a metric table into report files")
    p.add_argument("--dataset", required=True, help="annotation JSONL file")
    p.add_argument("--metrics", required=True, help="metric CSV from the metrics command")
    p.add_argument(
        "--filter-label",
        action="append",
        choices=LABEL_CHOICES,
        help="labels for per-type/per-word views (default: matching; repeatable)",
    )
    p.add_argument("--name", help="graph name for output files (default: from filename)")
    p.add_argument("--out-dir", default=".", help="directory for outputs")
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("compare", help="test entropy orderings across bundles")
    p.add_argument("--dataset", required=True, help="annotation JSONL file")
    p.add_argument(
        "--bundle",
        action="append",
        required=True,
        help="embedding bundle directory (repeatable)",
    )
    p.add_argument("--k", type=int, default=10, help="neighbors per node (default 10)")
    p.add_argument(
        "--allow-deficit",
        action="store_true",
        help="permit nodes with fewer than k eligible neighbors",
    )
    p.add_argument("--out-dir", default=".", help="directory for outputs")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("hierarchy", help="induce the type hierarchy from a heatmap CSV")
    p.add_argument("--heatmap", required=True, help="heatmap CSV from the aggregate command")
    p.add_argument("--name", help="output name (default: from filename)")
    p.add_argument("--cut", type=int, help="also print the clusters at this cut size")
    p.add_argument("--out-dir", default=".", help="directory for outputs")
    p.set_defaults(func=_cmd_hierarchy)

    p = sub.add_parser("synth", help="generate a synthetic dataset and bundles")
    defaults = SynthConfig()
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--dim", type=int, default=defaults.dim)
    p.add_argument("--lemmas-per-type", type=int, default=defaults.lemmas_per_type)
    p.add_argument("--instances-per-lemma", type=int, default=defaults.instances_per_lemma)
    p.add_argument("--within-type-sigma", type=float, default=defaults.within_type_sigma)
    p.add_argument("--coercion-fraction", type=float, default=defaults.coercion_fraction)
    p.add_argument("--unrestricted-fraction", type=float, default=defaults.unrestricted_fraction)
    p.add_argument("--coercion-mix", type=float, default=defaults.coercion_mix)
    p.add_argument("--masked-context-sigma", type=float, default=defaults.masked_context_sigma)
    p.add_argument("--out-dir", default=".", help="directory for outputs")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
