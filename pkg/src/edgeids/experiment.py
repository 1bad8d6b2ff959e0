"""Batch experiments: centralized baselines and federated scenarios.

Every report written here embeds the resolved configuration (minus the
output directory), so feeding a report back in as a config reproduces it
byte for byte.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .classifiers import (
    TrainConfig,
    decision_scores,
    predict,
    save_model,
    train_decision_tree,
    train_linear_svm,
    train_random_forest,
)
from .exceptions import ConfigError, DataError
from .federated import MODEL_KINDS, Adversary, AggregationConfig, normalize_strategy, run_federation, trust_csv
from .flow_ingest import apply_scaler, clean, default_data_dir, fit_scaler, load_flow_csv, read_cache, stratified_split
from .metrics import error_profile, evaluate
from .synthetic import generate_synthetic

logger = logging.getLogger(__name__)

REPORT_FORMAT = "edgeids-report"
REPORT_VERSION = 1
MODEL_NAMES = ("rf", "dt", "svm")
SYNTHETIC_DEFAULTS = {"n": 2000, "d": 3, "separation": 8.0, "class_ratio": 0.5}
FEDERATION_DEFAULTS = {
    "strategies": ["fedavg", "trust_aware"],
    "model_kind": "svm",
    "rounds": 5,
    "clients": 5,
    "local_epochs": 1,
    "validation_fraction": 0.2,
    "partition": "iid",
    "alpha": 0.5,
    "beta": 0.5,
    "global_trees": None,
    "adversary": {"kind": "none", "client_ids": [], "fraction": 0.0, "sigma": 0.0},
}


def _require(cond, field_name, message):
    if not cond:
        raise ConfigError(message, field_name)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    dataset: str = "synthetic"
    label_column: str = "Label"
    split_ratio: float = 0.8
    models: tuple = MODEL_NAMES
    drop_duplicates: bool = True
    synthetic: dict = field(default_factory=lambda: dict(SYNTHETIC_DEFAULTS))
    train: TrainConfig = TrainConfig()
    federation: dict = field(default_factory=lambda: dict(FEDERATION_DEFAULTS))
    save_models: bool = False
    output_dir: str = "results"

    @classmethod
    def from_dict(cls, d):
        """Validate a plain mapping, reporting the first bad field by name.

        A report file is accepted too: its embedded ``config`` is used.
        """
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a mapping")
        if "config" in d and d.get("format") == REPORT_FORMAT:
            d = d["config"]
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        _require(not unknown, unknown[0] if unknown else None, "unknown configuration field")
        _require("seed" in d, "seed", "a seed is required")
        _require(isinstance(d["seed"], int) and not isinstance(d["seed"], bool), "seed", "must be an integer")

        kw = dict(d)
        split = kw.get("split_ratio", 0.8)
        _require(isinstance(split, (int, float)) and 0 < split < 1, "split_ratio", "must lie in (0, 1)")

        models = kw.get("models", list(MODEL_NAMES))
        if models == "all" or models == ["all"]:
            models = list(MODEL_NAMES)
        if isinstance(models, str):
            models = [models]
        bad = [m for m in models if m not in MODEL_NAMES]
        _require(models and not bad, "models", f"choose from {list(MODEL_NAMES)} or 'all', got {models}")
        kw["models"] = tuple(m for m in MODEL_NAMES if m in models)

        syn = dict(SYNTHETIC_DEFAULTS)
        extra = set(kw.get("synthetic", {})) - set(syn)
        _require(not extra, "synthetic", f"unknown keys {sorted(extra)}")
        syn.update(kw.get("synthetic", {}))
        kw["synthetic"] = syn

        try:
            kw["train"] = TrainConfig.from_dict(kw.get("train", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "train") from exc

        fed = json.loads(json.dumps(FEDERATION_DEFAULTS))
        extra = set(kw.get("federation", {})) - set(fed)
        _require(not extra, "federation", f"unknown keys {sorted(extra)}")
        for k, v in kw.get("federation", {}).items():
            if k == "adversary":
                fed["adversary"].update(v)
            else:
                fed[k] = v
        _require(fed["model_kind"] in MODEL_KINDS, "federation.model_kind", f"choose from {list(MODEL_KINDS)}")
        try:
            fed["strategies"] = [normalize_strategy(s) for s in fed["strategies"]]
        except (ValueError, AttributeError) as exc:
            raise ConfigError(str(exc), "federation.strategies") from exc
        _require(fed["strategies"], "federation.strategies", "at least one strategy required")
        fed["adversary"]["client_ids"] = list(fed["adversary"]["client_ids"])
        kw["federation"] = fed

        cfg = cls(**kw)
        for strategy in fed["strategies"]:
            cfg.aggregation_config(strategy)
        return cfg

    def aggregation_config(self, strategy) -> AggregationConfig:
        fed = {k: v for k, v in self.federation.items() if k not in ("strategies", "model_kind")}
        try:
            return AggregationConfig(
                strategy=strategy,
                adversary=Adversary(**fed.pop("adversary")),
                seed=self.seed,
                train=self.train,
                **fed,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "federation") from exc

    def to_dict(self, include_output=False):
        d = {
            "seed": self.seed,
            "dataset": self.dataset,
            "label_column": self.label_column,
            "split_ratio": self.split_ratio,
            "models": list(self.models),
            "drop_duplicates": self.drop_duplicates,
            "synthetic": dict(self.synthetic),
            "train": self.train.to_dict(),
            "federation": json.loads(json.dumps(self.federation)),
            "save_models": self.save_models,
        }
        if include_output:
            d["output_dir"] = self.output_dir
        return d


def load_config(path, overrides=None) -> ExperimentConfig:
    """Read a JSON config (or a previous report) and apply flag overrides."""
    try:
        d = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(d, dict) and d.get("format") == REPORT_FORMAT:
        d = d["config"]
    d = dict(d) if isinstance(d, dict) else d
    for k, v in (overrides or {}).items():
        if v is not None:
            d[k] = v
    return ExperimentConfig.from_dict(d)


@dataclass
class ReportBundle:
    mode: str
    report: dict
    files: dict


# --------------------------------------------------------------------------
# data


def resolve_dataset_path(dataset):
    p = Path(dataset)
    if p.exists() or p.is_absolute():
        return p
    return default_data_dir() / p


def load_dataset(cfg: ExperimentConfig):
    """Return scaled ``(train, test, info)`` for the configured dataset."""
    if cfg.dataset == "synthetic":
        s = cfg.synthetic
        m = generate_synthetic(int(s["n"]), int(s["d"]), float(s["separation"]), float(s["class_ratio"]), cfg.seed)
        source = "synthetic"
    else:
        path = resolve_dataset_path(cfg.dataset)
        if path.is_dir():
            train, test, meta = read_cache(path)
            return train, test, {"source": "prepared", "cache_seed": meta.get("seed")}
        if not path.is_file():
            raise DataError(f"dataset not found: {cfg.dataset}")
        m = clean(load_flow_csv(path), cfg.label_column, cfg.drop_duplicates)
        source = "csv"
    split = stratified_split(m, cfg.split_ratio, cfg.seed)
    scaler = fit_scaler(split.train)
    return apply_scaler(scaler, split.train), apply_scaler(scaler, split.test), {"source": source}


def _support(m):
    benign, attack = m.class_counts()
    return {"benign": benign, "attack": attack}


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# modes

TRAINERS = {"rf": train_random_forest, "dt": train_decision_tree, "svm": train_linear_svm}


def run_baseline(cfg: ExperimentConfig, out: Path) -> ReportBundle:
    train, test, info = load_dataset(cfg)
    files = {}
    models = []
    rows = []
    for name in cfg.models:
        logger.info("training %s on %d rows", name, train.n_rows)
        model = TRAINERS[name](train.features, train.labels, cfg.train)
        cm, rep, curve = evaluate(test.labels, predict(model, test.features), decision_scores(model, test.features))
        fp, fn = error_profile(cm)
        models.append({
            "model": name,
            "confusion": cm.to_dict(),
            "metrics": rep.to_dict(),
            "error_profile": {"fp": fp, "fn": fn},
        })
        rows.append([name, rep.accuracy, rep.precision, rep.recall, rep.f1, rep.roc_auc, cm.tp, cm.tn, cm.fp, cm.fn])
        if curve is not None:
            files[f"roc_{name}"] = out / f"roc_{name}.csv"
            files[f"roc_{name}"].write_text(curve.to_csv())
        if cfg.save_models:
            files[f"model_{name}"] = out / f"model_{name}.json"
            save_model(model, files[f"model_{name}"])

    report = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "mode": "baseline",
        "config": cfg.to_dict(),
        "data": {
            **info,
            "n_features": train.n_cols,
            "train_rows": train.n_rows,
            "test_rows": test.n_rows,
            "class_support": {"train": _support(train), "test": _support(test)},
        },
        "models": models,
    }
    files["report"] = out / "report.json"
    files["report"].write_text(_dump(report))
    files["metrics"] = out / "metrics.csv"
    files["metrics"].write_text(_csv(
        ["model", "accuracy", "precision", "recall", "f1", "roc_auc", "tp", "tn", "fp", "fn"], rows))
    return ReportBundle("baseline", report, files)


def run_federate(cfg: ExperimentConfig, out: Path) -> ReportBundle:
    train, test, info = load_dataset(cfg)
    kind = cfg.federation["model_kind"]
    runs = []
    trust_parts = []
    for strategy in cfg.federation["strategies"]:
        agg = cfg.aggregation_config(strategy)
        reports = run_federation(train, test, agg, kind)
        runs.append({
            "strategy": agg.strategy,
            "model_kind": kind,
            "rounds": [r.to_dict() for r in reports],
        })
        trust_parts.append(trust_csv(reports, agg.strategy))

    report = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "mode": "federate",
        "config": cfg.to_dict(),
        "data": {
            **info,
            "n_features": train.n_cols,
            "train_rows": train.n_rows,
            "test_rows": test.n_rows,
            "class_support": {"train": _support(train), "test": _support(test)},
        },
        "runs": runs,
    }
    files = {"report": out / "report.json", "trust": out / "trust_trajectory.csv"}
    files["report"].write_text(_dump(report))
    # one header, then the body of every per-strategy block
    header, *_ = trust_parts[0].splitlines(keepends=True)
    files["trust"].write_text(header + "".join(p.split("\n", 1)[1] for p in trust_parts))
    return ReportBundle("federate", report, files)


def run_experiment(config: ExperimentConfig, mode: str = "baseline") -> ReportBundle:
    """Run one experiment and write its outputs to ``config.output_dir``."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if mode == "baseline":
        return run_baseline(config, out)
    if mode == "federate":
        return run_federate(config, out)
    raise ConfigError(f"unknown mode {mode!r}", "mode")


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else ("" if v is None else v) for v in row])
    return buf.getvalue()


def report_table(report):
    """Flatten a report to ``(header, rows)`` for CSV rendering."""
    if report.get("mode") == "baseline":
        header = ["model", "accuracy", "precision", "recall", "f1", "roc_auc", "tp", "tn", "fp", "fn"]
        rows = [
            [m["model"]] + [m["metrics"][k] for k in header[1:6]] + [m["confusion"][k] for k in header[6:]]
            for m in report["models"]
        ]
        return header, rows
    if report.get("mode") == "federate":
        header = ["strategy", "round", "accuracy", "precision", "recall", "f1", "roc_auc", "tp", "tn", "fp", "fn"]
        rows = [
            [run["strategy"], r["round"]] + [r["metrics"][k] for k in header[2:7]]
            + [r["confusion"][k] for k in header[7:]]
            for run in report["runs"]
            for r in run["rounds"]
        ]
        return header, rows
    raise DataError("not an experiment report")


def render_report(report, fmt="json"):
    if fmt == "json":
        return _dump(report)
    if fmt == "csv":
        return _csv(*report_table(report))
    raise ConfigError(f"unknown format {fmt!r}", "format")
