import json
import subprocess
import sys

import pytest

from neighbortypes.cli import main

SMALL_SYNTH = [
    "--dim", "8",
    "--lemmas-per-type", "3",
    "--instances-per-lemma", "5",
]


@pytest.fixture()
def workdir(tmp_path):
    rc = main(["synth", "--out-dir", str(tmp_path)] + SMALL_SYNTH)
    assert rc == 0
    return tmp_path


def run(args):
    return main([str(a) for a in args])


def test_synth_writes_dataset_and_bundles(workdir):
    assert (workdir / "dataset.jsonl").is_file()
    for name in ("plain", "masked"):
        assert (workdir / name / "meta.json").is_file()
        assert (workdir / name / "manifest.txt").is_file()
        assert (workdir / name / "vectors.f32le").is_file()
    meta = json.loads((workdir / "masked" / "meta.json").read_text())
    assert meta["masked"] is True and meta["dim"] == 8


def test_build_graph_and_metrics(workdir):
    rc = run([
        "build-graph", "--dataset", workdir / "dataset.jsonl",
        "--bundle", workdir / "plain", "--out-dir", workdir,
    ])
    assert rc == 0
    graph_path = workdir / "graph_synthetic.jsonl"
    assert graph_path.is_file()

    rc = run([
        "metrics", "--dataset", workdir / "dataset.jsonl",
        "--bundle", workdir / "plain", "--out-dir", workdir,
    ])
    assert rc == 0
    assert (workdir / "metrics_synthetic.csv").is_file()
    meta = json.loads((workdir / "metrics_synthetic.meta.json").read_text())
    assert meta["k"] == 10 and meta["neighbor_type"] == "lexical"

    # metrics computed from the exported graph agree with the direct run
    rc = run([
        "metrics", "--dataset", workdir / "dataset.jsonl",
        "--graph", graph_path, "--out-dir", workdir / "via_graph",
    ])
    assert rc == 0
    direct = (workdir / "metrics_synthetic.csv").read_text()
    via_graph = (workdir / "via_graph" / "metrics_synthetic.csv").read_text()
    assert via_graph == direct


def test_metrics_requires_bundle_or_graph(workdir, capsys):
    rc = run(["metrics", "--dataset", workdir / "dataset.jsonl", "--out-dir", workdir])
    assert rc == 2
    assert "bundle" in capsys.readouterr().err


def test_metrics_deterministic_across_runs(workdir):
    for sub in ("run1", "run2"):
        rc = run([
            "metrics", "--dataset", workdir / "dataset.jsonl",
            "--bundle", workdir / "masked", "--out-dir", workdir / sub,
        ])
        assert rc == 0
    a = (workdir / "run1" / "metrics_synthetic_masked.csv").read_bytes()
    b = (workdir / "run2" / "metrics_synthetic_masked.csv").read_bytes()
    assert a == b


def test_aggregate_and_hierarchy(workdir):
    run([
        "metrics", "--dataset", workdir / "dataset.jsonl",
        "--bundle", workdir / "plain", "--out-dir", workdir,
    ])
    rc = run([
        "aggregate", "--dataset", workdir / "dataset.jsonl",
        "--metrics", workdir / "metrics_synthetic.csv", "--out-dir", workdir,
    ])
    assert rc == 0
    for name in (
        "heatmap_synthetic.csv",
        "sentence_types_synthetic.csv",
        "per_word_synthetic.csv",
        "hierarchy_synthetic.json",
    ):
        assert (workdir / name).is_file()

    payload = json.loads((workdir / "hierarchy_synthetic.json").read_text())
    assert payload["linkage"] == "average"
    assert "tree" in payload

    rc = run([
        "hierarchy", "--heatmap", workdir / "heatmap_synthetic.csv",
        "--out-dir", workdir / "h", "--cut", "4",
    ])
    assert rc == 0
    assert (workdir / "h" / "hierarchy_synthetic.json").is_file()


def test_aggregate_with_label_filter(workdir):
    run([
        "metrics", "--dataset", workdir / "dataset.jsonl",
        "--bundle", workdir / "plain", "--out-dir", workdir,
    ])
    rc = run([
        "aggregate", "--dataset", workdir / "dataset.jsonl",
        "--metrics", workdir / "metrics_synthetic.csv",
        "--filter-label", "coercion", "--name", "coerced",
        "--out-dir", workdir,
    ])
    assert rc == 0
    assert (workdir / "heatmap_coerced.csv").is_file()


def test_compare_writes_reports(workdir):
    rc = run([
        "compare", "--dataset", workdir / "dataset.jsonl",
        "--bundle", workdir / "plain", "--bundle", workdir / "masked",
        "--out-dir", workdir,
    ])
    assert rc == 0
    comparisons = (workdir / "comparisons.csv").read_text().splitlines()
    assert comparisons[0] == "graph,hypothesis,alternative,u,p,method,n1,n2,stars"
    graphs = {line.split(",")[0] for line in comparisons[1:]}
    assert graphs == {"synthetic", "synthetic_masked"}
    means = (workdir / "nte_means.csv").read_text().splitlines()
    assert len(means) == 1 + 2 * 4


def test_missing_input_exits_2(tmp_path, capsys):
    rc = run([
        "build-graph", "--dataset", tmp_path / "nope.jsonl",
        "--bundle", tmp_path / "plain", "--out-dir", tmp_path,
    ])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "neighbortypes", "synth", "--out-dir", str(tmp_path)]
        + SMALL_SYNTH,
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert (tmp_path / "dataset.jsonl").is_file()
