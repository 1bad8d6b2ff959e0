"""Command-line driver.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .exceptions import ConfigError, DataError, FederationError
from .experiment import REPORT_FORMAT, load_config, render_report, run_experiment
from .flow_ingest import apply_scaler, clean, fit_scaler, load_flow_csv, stratified_split, write_cache

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("edgeids")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _overrides(args):
    o = {"seed": args.seed, "dataset": args.dataset}
    if args.models:
        o["models"] = args.models.split(",")
    return o


def cmd_prepare(args):
    table = load_flow_csv(args.csv)
    m = clean(table, args.label_col, drop_duplicates=not args.keep_duplicates)
    split = stratified_split(m, args.ratio, args.seed)
    scaler = fit_scaler(split.train)
    split = type(split)(
        apply_scaler(scaler, split.train), apply_scaler(scaler, split.test),
        split.seed, split.ratio, split.train_index, split.test_index,
    )
    write_cache(args.out, split, scaler, {
        "source_csv": str(Path(args.csv)),
        "label_column": args.label_col,
        "drop_duplicates": not args.keep_duplicates,
    })
    b, a = split.test.class_counts()
    print(f"wrote {args.out}: {split.train.n_rows} train / {split.test.n_rows} test rows "
          f"(test support benign={b} attack={a}), {m.n_cols} features")


def cmd_baseline(args):
    cfg = load_config(args.config, _overrides(args))
    if args.out:
        cfg = dataclasses.replace(cfg, output_dir=args.out)
    bundle = run_experiment(cfg, "baseline")
    for m in bundle.report["models"]:
        r = m["metrics"]
        print(f"{m['model']:>4}  acc={r['accuracy']:.6f} prec={r['precision']:.6f} "
              f"rec={r['recall']:.6f} f1={r['f1']:.6f} auc={r['roc_auc']}  "
              f"fp={m['error_profile']['fp']} fn={m['error_profile']['fn']}")
    print(f"report: {bundle.files['report']}")


def cmd_federate(args):
    overrides = _overrides(args)
    cfg = load_config(args.config, overrides)
    if args.strategy:
        strategies = ["fedavg", "trust_aware"] if args.strategy == "both" else [args.strategy]
        raw = cfg.to_dict()
        raw["federation"]["strategies"] = strategies
        raw["output_dir"] = cfg.output_dir
        cfg = type(cfg).from_dict(raw)
    if args.out:
        cfg = dataclasses.replace(cfg, output_dir=args.out)
    bundle = run_experiment(cfg, "federate")
    for run in bundle.report["runs"]:
        last = run["rounds"][-1]
        trust = ", ".join(f"{c}:{t:.3f}" for c, t in last["trust"].items())
        print(f"{run['strategy']:>12}  final f1={last['metrics']['f1']:.6f}  trust[{trust}]")
    print(f"report: {bundle.files['report']}")


def cmd_report(args):
    path = Path(args.input)
    if path.is_dir():
        path = path / "report.json"
    try:
        report = json.loads(path.read_text())
    except FileNotFoundError:
        raise DataError(f"no report at {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    if report.get("format") != REPORT_FORMAT:
        raise DataError(f"{path}: not an edgeids report")
    text = render_report(report, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser():
    p = _Parser(prog="edgeids", description="Flow-based intrusion detection baselines and federated simulation.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("prepare", help="clean, split and scale a flow CSV into a cache directory")
    s.add_argument("csv")
    s.add_argument("--label-col", default="Label")
    s.add_argument("--out", required=True)
    s.add_argument("--ratio", type=float, default=0.8, help="train share (default 0.8)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--keep-duplicates", action="store_true")
    s.set_defaults(func=cmd_prepare)

    for name, func, help_ in (
        ("baseline", cmd_baseline, "train and evaluate centralized models"),
        ("federate", cmd_federate, "run federated aggregation scenarios"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="JSON config or a previous report.json")
        s.add_argument("--seed", type=int)
        s.add_argument("--dataset", help="'synthetic', a CSV path or a prepared cache directory")
        s.add_argument("--models", help="comma-separated subset of rf,dt,svm")
        s.add_argument("--out", help="output directory")
        if name == "federate":
            s.add_argument("--strategy", choices=["fedavg", "trust_aware", "both"])
        s.set_defaults(func=func)

    s = sub.add_parser("report", help="render a report as JSON or CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FederationError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
