"""End-to-end tests of the command-line interface (in process)."""

import json

import numpy as np
import pytest

from graphmetric.cli import main
from graphmetric.metric_io import load_metric
from graphmetric.synthetic import two_cluster_dataset


@pytest.fixture()
def cluster_csv(tmp_path):
    # separation keeps raw-feature cross-pair weights away from underflow
    # (learning has signal) while both classifiers stay exact
    ds = two_cluster_dataset(np.random.default_rng(0), n_per_class=10,
                             num_features=2, separation=3.0)
    path = tmp_path / "clusters.csv"
    lines = ["f0,f1,label"]
    for row, y in zip(ds.features, ds.labels):
        lines.append(f"{float(row[0])!r},{float(row[1])!r},c{y}")
    path.write_text("\n".join(lines) + "\n")
    return path


def test_learn_writes_valid_metric(cluster_csv, tmp_path):
    out = tmp_path / "metric.json"
    rc = main(["learn", "--dataset", str(cluster_csv), "--label-col", "label",
               "--out", str(out)])
    assert rc == 0
    metric, cfg = load_metric(out)
    assert metric.dim == 2
    assert cfg["positive_class"] == 0
    assert cfg["converged"] is True
    # feature 0 separates the clusters; it should carry the weight
    assert metric.matrix.entries[0, 0] > metric.matrix.entries[1, 1]


def test_classify_knn_roundtrip(cluster_csv, tmp_path, capsys):
    metric_path = tmp_path / "metric.json"
    main(["learn", "--dataset", str(cluster_csv), "--label-col", "label",
          "--out", str(metric_path)])
    rc = main(["classify", "--metric", str(metric_path),
               "--train", str(cluster_csv), "--test", str(cluster_csv),
               "--label-col", "label", "--classifier", "knn", "--k", "3"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    ds_labels = [0] * 10 + [1] * 10
    assert payload["predictions"] == ds_labels


def test_classify_graph(cluster_csv, tmp_path, capsys):
    metric_path = tmp_path / "metric.json"
    main(["learn", "--dataset", str(cluster_csv), "--label-col", "label",
          "--out", str(metric_path)])
    rc = main(["classify", "--metric", str(metric_path),
               "--train", str(cluster_csv), "--test", str(cluster_csv),
               "--label-col", "label", "--classifier", "graph"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["predictions"] == [0] * 10 + [1] * 10


def test_classify_features_only_test_file(cluster_csv, tmp_path, capsys):
    metric_path = tmp_path / "metric.json"
    main(["learn", "--dataset", str(cluster_csv), "--label-col", "label",
          "--out", str(metric_path)])
    test_path = tmp_path / "unlabeled.csv"
    test_path.write_text("0.1,0.0\n3.0,0.2\n")
    rc = main(["classify", "--metric", str(metric_path),
               "--train", str(cluster_csv), "--label-col", "label",
               "--test", str(test_path), "--test-label-col", "none",
               "--classifier", "knn", "--k", "3"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["predictions"] == [0, 1]


def test_experiment_json_deterministic(cluster_csv, tmp_path):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    args = ["experiment", "--dataset", str(cluster_csv), "--label-col",
            "label", "--classifier", "graph", "--seeds", "0..1",
            "--format", "json"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    payload = json.loads(out1.read_text())
    assert payload["mean_error"]["graph"] <= 0.1


def test_experiment_table(cluster_csv, capsys):
    rc = main(["experiment", "--dataset", str(cluster_csv), "--label-col",
               "label", "--seeds", "0", "--format", "table"])
    assert rc == 0
    assert "mean error" in capsys.readouterr().out


def test_config_file_merge_and_flag_override(cluster_csv, tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"outer_max_iters": 2, "rho": 1e-5}))
    out = tmp_path / "metric.json"
    rc = main(["learn", "--dataset", str(cluster_csv), "--label-col", "label",
               "--config", str(cfg_path), "--rho", "2e-5",
               "--out", str(out)])
    assert rc == 0
    _, echo = load_metric(out)
    assert echo["outer_max_iters"] == 2  # from config file
    assert echo["rho"] == 2e-5           # flag wins over file


def test_verify_quick(capsys):
    rc = main(["verify", "--quick", "--seed", "1"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in out
    assert "FAIL" not in out
