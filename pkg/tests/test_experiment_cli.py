import json

import numpy as np
import pytest

from edgeids.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from edgeids.exceptions import ConfigError
from edgeids.experiment import ExperimentConfig, load_config, run_experiment
from edgeids.flow_ingest import read_cache
from edgeids.synthetic import generate_synthetic

FAST = {"seed": 3, "synthetic": {"n": 600}, "train": {"n_trees": 10}}


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def files_of(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.fixture
def flow_csv(tmp_path):
    """A small CICFlowMeter-like export with identifier columns and dirty rows."""
    m = generate_synthetic(300, 3, 8.0, 0.4, seed=5)
    rows = ["Flow ID, Source IP,Timestamp, Flow Duration, Fwd Pkts,Bwd Pkts, Label"]
    for i, (x, y) in enumerate(zip(m.features, m.labels)):
        label = "DDoS" if y else "BENIGN"
        a, b, c = map(float, x)
        rows.append(f"f{i},10.0.0.{i % 250},t{i},{a!r},{b!r},{c!r},{label}")
    rows.append("bad,10.0.0.1,t,Infinity,1,2,BENIGN")
    rows.append("bad,10.0.0.1,t,NaN,1,2,DDoS")
    p = tmp_path / "flows.csv"
    p.write_text("\n".join(rows) + "\n")
    return p


def test_synthetic_baseline_all_models(tmp_path):
    cfg = ExperimentConfig.from_dict({**FAST, "models": "all", "output_dir": str(tmp_path)})
    bundle = run_experiment(cfg, "baseline")
    assert [m["model"] for m in bundle.report["models"]] == ["rf", "dt", "svm"]
    for m in bundle.report["models"]:
        assert m["metrics"]["accuracy"] >= 0.99
    assert {"report.json", "metrics.csv", "roc_rf.csv", "roc_dt.csv", "roc_svm.csv"} <= set(files_of(tmp_path))
    support = bundle.report["data"]["class_support"]["test"]
    assert support["benign"] + support["attack"] == bundle.report["data"]["test_rows"]


def test_honest_federation_strategies_agree(tmp_path):
    cfg = ExperimentConfig.from_dict({**FAST, "output_dir": str(tmp_path)})
    runs = run_experiment(cfg, "federate").report["runs"]
    assert [r["strategy"] for r in runs] == ["fedavg", "trust_aware"]
    f1 = [r["rounds"][-1]["metrics"]["f1"] for r in runs]
    assert abs(f1[0] - f1[1]) <= 0.005
    lines = (tmp_path / "trust_trajectory.csv").read_text().splitlines()
    assert lines[0] == "strategy,round,client,trust,weight,validation_f1"
    assert len(lines) == 1 + 2 * 5 * 5


@pytest.mark.parametrize("mode", ["baseline", "federate"])
def test_reruns_are_byte_identical(tmp_path, mode):
    cfg_path = write_json(tmp_path / "cfg.json", {**FAST, "save_models": True})
    assert main([mode, "--config", cfg_path, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main([mode, "--config", cfg_path, "--out", str(tmp_path / "b")]) == EXIT_OK
    assert files_of(tmp_path / "a") == files_of(tmp_path / "b")


@pytest.mark.parametrize("mode", ["baseline", "federate"])
def test_rerun_from_embedded_config(tmp_path, mode):
    cfg_path = write_json(tmp_path / "cfg.json", {**FAST, "seed": 9})
    assert main([mode, "--config", cfg_path, "--out", str(tmp_path / "a")]) == EXIT_OK
    report = tmp_path / "a" / "report.json"
    assert json.loads(report.read_text())["config"]["seed"] == 9
    assert main([mode, "--config", str(report), "--out", str(tmp_path / "b")]) == EXIT_OK
    assert files_of(tmp_path / "a") == files_of(tmp_path / "b")


def test_flags_override_config_file(tmp_path):
    cfg_path = write_json(tmp_path / "cfg.json", FAST)
    assert main(["baseline", "--config", cfg_path, "--seed", "12", "--models", "dt,svm",
                 "--out", str(tmp_path / "o")]) == EXIT_OK
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["config"]["seed"] == 12
    assert [m["model"] for m in report["models"]] == ["dt", "svm"]


def test_federate_single_strategy(tmp_path):
    cfg_path = write_json(tmp_path / "cfg.json", FAST)
    assert main(["federate", "--config", cfg_path, "--strategy", "trust_aware",
                 "--out", str(tmp_path / "o")]) == EXIT_OK
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert [r["strategy"] for r in report["runs"]] == ["trust_aware"]


def test_prepare_then_baseline_from_cache(tmp_path, flow_csv, capsys):
    cache = tmp_path / "cache"
    assert main(["prepare", str(flow_csv), "--label-col", "Label", "--out", str(cache), "--seed", "1"]) == EXIT_OK
    assert "test support" in capsys.readouterr().out
    train, test, meta = read_cache(cache)
    assert train.feature_names == ("Flow Duration", "Fwd Pkts", "Bwd Pkts")
    assert train.n_rows + test.n_rows == 300
    assert abs(train.features.mean(axis=0)).max() < 1e-9
    cfg_path = write_json(tmp_path / "cfg.json", {**FAST, "dataset": str(cache)})
    assert main(["baseline", "--config", cfg_path, "--out", str(tmp_path / "o")]) == EXIT_OK
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["data"]["source"] == "prepared"
    assert report["data"]["test_rows"] == test.n_rows


def test_baseline_from_raw_csv(tmp_path, flow_csv):
    cfg_path = write_json(tmp_path / "cfg.json", {**FAST, "dataset": str(flow_csv), "models": ["dt"]})
    assert main(["baseline", "--config", cfg_path, "--out", str(tmp_path / "o")]) == EXIT_OK
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    support = report["data"]["class_support"]
    assert report["data"]["n_features"] == 3
    assert sum(support["train"].values()) + sum(support["test"].values()) == 300


def test_dataset_resolved_against_data_dir_env(tmp_path, flow_csv, monkeypatch):
    monkeypatch.setenv("EDGEIDS_DATA_DIR", str(flow_csv.parent))
    monkeypatch.chdir(tmp_path / "..")
    cfg_path = write_json(tmp_path / "cfg.json", {**FAST, "dataset": flow_csv.name, "models": ["dt"]})
    assert main(["baseline", "--config", cfg_path, "--out", str(tmp_path / "o")]) == EXIT_OK


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_report_subcommand(tmp_path, fmt, capsys):
    cfg_path = write_json(tmp_path / "cfg.json", FAST)
    main(["baseline", "--config", cfg_path, "--out", str(tmp_path / "o")])
    capsys.readouterr()
    out = tmp_path / f"table.{fmt}"
    assert main(["report", "--in", str(tmp_path / "o"), "--format", fmt, "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    if fmt == "json":
        assert json.loads(text)["mode"] == "baseline"
    else:
        lines = text.splitlines()
        assert lines[0].startswith("model,accuracy") and len(lines) == 4
    assert main(["report", "--in", str(tmp_path / "o" / "report.json"), "--format", fmt]) == EXIT_OK
    assert capsys.readouterr().out == text


@pytest.mark.parametrize("bad, field", [
    ({}, "seed"),
    ({"seed": "x"}, "seed"),
    ({"seed": 0, "split_ratio": 1.5}, "split_ratio"),
    ({"seed": 0, "models": ["knn"]}, "models"),
    ({"seed": 0, "train": {"max_depth": 0}}, "train"),
    ({"seed": 0, "train": {"depth": 3}}, "train"),
    ({"seed": 0, "federation": {"rounds": 0}}, "federation"),
    ({"seed": 0, "federation": {"model_kind": "dt"}}, "federation.model_kind"),
    ({"seed": 0, "federation": {"strategies": ["median"]}}, "federation.strategies"),
    ({"seed": 0, "federation": {"adversary": {"kind": "label_flip", "client_ids": [9]}}}, "federation"),
    ({"seed": 0, "colour": "red"}, "colour"),
])
def test_config_errors_name_the_field(bad, field):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(bad)
    assert info.value.field == field
    assert str(info.value).startswith(f"{field}:")


def test_exit_code_config_errors(tmp_path, capsys):
    assert main(["baseline", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    cfg_path = write_json(tmp_path / "cfg.json", {"seed": 0, "models": ["knn"]})
    assert main(["baseline", "--config", cfg_path]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG
    assert main(["report", "--in", "x", "--format", "xml"]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_exit_code_data_errors(tmp_path, capsys):
    cfg_path = write_json(tmp_path / "cfg.json", {**FAST, "dataset": str(tmp_path / "nope.csv")})
    assert main(["baseline", "--config", cfg_path, "--out", str(tmp_path / "o")]) == EXIT_DATA
    broken = tmp_path / "broken.csv"
    broken.write_text("a,b,Label\n1,2\n")
    assert main(["prepare", str(broken), "--out", str(tmp_path / "c")]) == EXIT_DATA
    assert main(["report", "--in", str(tmp_path / "nowhere")]) == EXIT_DATA
    assert "data error" in capsys.readouterr().err


def test_load_config_overrides_skip_none(tmp_path):
    cfg = load_config(write_json(tmp_path / "c.json", FAST), {"seed": None, "dataset": None})
    assert cfg.seed == 3 and cfg.dataset == "synthetic"


def test_report_embeds_no_output_dir(tmp_path):
    cfg = ExperimentConfig.from_dict({**FAST, "output_dir": str(tmp_path)})
    report = run_experiment(cfg, "baseline").report
    assert "output_dir" not in report["config"]
    assert np.isfinite(report["models"][0]["metrics"]["roc_auc"])
