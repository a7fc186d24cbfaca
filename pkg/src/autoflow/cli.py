"""Command-line front end.

Subcommands: ``setup``, ``compare``, ``create``, ``tune``, ``plot``,
``predict`` and ``save``. Tables go to stdout; files go to the output
directory (``--out``, else ``$AUTOFLOW_OUTPUT_DIR``, else ``autoflow_out``).

Exit codes: 0 success, 1 user error (bad flags, bad data, unknown model),
2 internal error. Every failure prints one line starting with ``error:``.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from . import analysis
from .datasets import DATASETS, TARGETS, dataset_path
from .errors import AutoflowError, UnknownColumn
from .experiment import (
    ExperimentConfig,
    compare_models,
    create_model,
    predict_model,
    read_model_file,
    save_model,
    setup,
    tune_model,
)
from .metrics import METRIC_LABELS, METRIC_NAMES, render_csv, render_table
from .models import model_info
from .tabular import TargetSpec, read_csv

OUTPUT_ENV = "AUTOFLOW_OUTPUT_DIR"
DEFAULT_OUT = "autoflow_out"

# config-file key -> (argparse dest, converter)
_CONFIG_KEYS = {
    "data": ("data", str),
    "target": ("target", str),
    "positive_label": ("positive_label", str),
    "session_id": ("session_id", int),
    "folds": ("folds", int),
    "train_size": ("train_size", float),
    "sort": ("sort", str),
    "n_select": ("n_select", int),
    "include": ("include", str),
    "exclude": ("exclude", str),
    "out": ("out", str),
    "n_iter": ("n_iter", int),
}
_DEFAULTS = {"data": "diabetes", "session_id": 123, "folds": 10, "train_size": 0.7, "sort": "accuracy",
             "n_select": 1, "n_iter": 10}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def load_config_file(path):
    """Parse ``key = value`` lines (``#`` comments, blank lines ignored) into a dict."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            dest, conv = _CONFIG_KEYS[key]
            try:
                out[dest] = conv(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return out


def _resolve(args):
    """Merge flags over the config file over defaults, in place."""
    file_cfg = load_config_file(args.config) if args.config else {}
    for dest in {d for d, _ in _CONFIG_KEYS.values()}:
        if not hasattr(args, dest):
            continue
        if getattr(args, dest) is None:
            setattr(args, dest, file_cfg.get(dest, _DEFAULTS.get(dest)))
    if args.out is None:
        args.out = os.environ.get(OUTPUT_ENV) or DEFAULT_OUT
    return args


def _parse_value(text):
    if text in ("None", "none", "null"):
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _parse_params(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def _id_list(text):
    if text is None:
        return None
    return [t.strip() for t in text.split(",") if t.strip()]


# ---------------------------------------------------------------- data


def _load_table(data):
    if not Path(data).exists() and data in DATASETS:
        return read_csv(dataset_path(data)), TARGETS[data]
    return read_csv(data), None


def _experiment(args):
    table, builtin_target = _load_table(args.data)
    target = args.target or builtin_target or table.names[-1]
    if target not in table:
        raise UnknownColumn(f"target column {target!r} not found; columns: {table.names}")
    cfg = ExperimentConfig(TargetSpec(target, args.positive_label), session_id=args.session_id,
                           train_size=args.train_size, fold_number=args.folds)
    return setup(table, cfg)


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def _saved_config(exp):
    c = exp.config
    return {"target": c.target_spec.column, "session_id": c.session_id, "train_size": c.train_size,
            "fold_number": c.fold_number}


# ---------------------------------------------------------------- commands


def cmd_setup(args):
    exp, report = _experiment(args)
    out = _outdir(args)
    text = exp.report_text()
    sys.stdout.write(text)
    _write(out / "setup.txt", text)
    _write(out / "setup.csv", render_csv(["Description", "Value"], [list(r) for r in report]))
    return 0


def cmd_compare(args):
    exp, _ = _experiment(args)
    best, board = compare_models(exp, sort=args.sort, n_select=args.n_select,
                                 include=_id_list(args.include), exclude=_id_list(args.exclude))
    out = _outdir(args)
    sys.stdout.write(board.render_text(timings=True))
    _write(out / "leaderboard.txt", board.render_text(timings=False))
    _write(out / "leaderboard.csv", board.to_csv())
    for fp in best:
        save_model(fp, out / f"{fp.model_id}.afpl", config=_saved_config(exp))
    print(f"best: {', '.join(board.selected)}")
    return 0


def cmd_create(args):
    model_info(args.model)
    exp, _ = _experiment(args)
    fp, report = create_model(exp, args.model, _parse_params(args.param))
    out = _outdir(args)
    sys.stdout.write(report.render_text())
    _write(out / f"cv_{args.model}.txt", report.render_text())
    _write(out / f"cv_{args.model}.csv", report.to_csv())
    save_model(fp, out / f"{args.model}.afpl", model_only=args.model_only, config=_saved_config(exp))
    return 0


def cmd_tune(args):
    model_info(args.model)
    exp, _ = _experiment(args)
    fp, report, params = tune_model(exp, args.model, n_iter=args.n_iter)
    out = _outdir(args)
    chosen = ", ".join(f"{k}={v!r}" for k, v in params.items()) or "(defaults)"
    print(f"chosen: {chosen}")
    sys.stdout.write(report.render_text())
    _write(out / f"tuned_{args.model}.txt", f"chosen: {chosen}\n" + report.render_text())
    _write(out / f"tuned_{args.model}.csv", report.to_csv())
    save_model(fp, out / f"tuned_{args.model}.afpl", model_only=args.model_only, config=_saved_config(exp))
    return 0


def cmd_plot(args):
    model_info(args.model)
    exp, _ = _experiment(args)
    if args.kind == "learning":
        chart = analysis.learning_curve(exp, args.model)
        for w in chart.warnings:
            print(f"warning: {w}", file=sys.stderr)
    else:
        from . import pipeline as pl
        from .models import create_estimator

        fp = pl.fit(exp.pipeline_for(create_estimator(args.model)), exp.X_train, exp.y_train, exp.seed)
        if args.kind == "gain":
            chart = analysis.model_gain_curve(fp, exp.X_holdout, exp.y_holdout)
        else:
            chart = analysis.feature_importance(fp)
    out = _outdir(args)
    stem = out / f"{args.kind}_{args.model}"
    analysis.render_svg(chart, f"{stem}.svg")
    analysis.render_csv(chart, f"{stem}.csv")
    print(f"wrote {stem}.svg and {stem}.csv")
    return 0


def cmd_predict(args):
    fp, model_only, saved_cfg = read_model_file(args.saved)
    table, builtin_target = _load_table(args.data)
    target = args.target or saved_cfg.get("target") or builtin_target
    names = [n for n, _ in fp.feature_schema]
    missing = [n for n in names if n not in table]
    if missing:
        raise UnknownColumn(f"data lacks the model's feature columns {missing}")
    X = table.select(names)
    labels = fp.predict(X)
    scores = fp.predict_proba(X) if fp.estimator.supports_proba else None
    rows = [[i, int(labels[i])] + ([float(scores[i])] if scores is not None else [])
            for i in range(len(labels))]
    out = _outdir(args)
    header = ["row", "label"] + (["score"] if scores is not None else [])
    _write(out / "predictions.csv", render_csv(header, rows))
    print(f"{len(labels)} predictions written to {out / 'predictions.csv'}")
    if target and target in table:
        from .metrics import evaluate
        from .tabular import split_xy

        _, y = split_xy(table, TargetSpec(target, args.positive_label))
        row = evaluate(y, labels, scores)
        sys.stdout.write(render_table([METRIC_LABELS[m] for m in METRIC_NAMES],
                                      [[row.metric(m) for m in METRIC_NAMES]]))
    return 0


def cmd_save(args):
    model_info(args.model)
    exp, _ = _experiment(args)
    from . import pipeline as pl
    from .models import create_estimator

    est = create_estimator(args.model, _parse_params(args.param))
    fp = pl.fit(exp.pipeline_for(est), exp.X_train, exp.y_train, exp.seed)
    out = _outdir(args)
    path = out / f"{args.model}.afpl"
    save_model(fp, path, model_only=args.model_only, config=_saved_config(exp))
    _, holdout = predict_model(exp, fp)
    print(f"saved {path} (holdout accuracy {holdout.accuracy:.4f})")
    return 0


# ---------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--data", help="CSV path or bundled dataset name (default: diabetes)")
    p.add_argument("--target", help="target column (default: the dataset's last column)")
    p.add_argument("--positive-label", dest="positive_label")
    p.add_argument("--session-id", dest="session_id", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--train-size", dest="train_size", type=float)
    p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or {DEFAULT_OUT})")
    p.add_argument("--config", help="file of 'key = value' lines; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = _Parser(prog="autoflow", description="AutoML workflow for binary classification.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("setup", help="split the data and print the configuration report")
    _common(p)
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("compare", help="cross-validate every model and print the leaderboard")
    _common(p)
    p.add_argument("--sort", choices=METRIC_NAMES)
    p.add_argument("--n-select", dest="n_select", type=int)
    p.add_argument("--include", help="comma-separated model ids")
    p.add_argument("--exclude", help="comma-separated model ids")
    p.set_defaults(func=cmd_compare)

    for name, func, helptext in (("create", cmd_create, "cross-validate one model and save it"),
                                 ("tune", cmd_tune, "random-search a model's grid"),
                                 ("save", cmd_save, "fit a model on the train split and save it")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("model")
        _common(p)
        p.add_argument("--model-only", dest="model_only", action="store_true",
                       help="save only the estimator, without the preprocessing stages")
        if name == "tune":
            p.add_argument("--n-iter", dest="n_iter", type=int)
        else:
            p.add_argument("--param", action="append", metavar="KEY=VALUE",
                           help="hyperparameter override (repeatable)")
        p.set_defaults(func=func)

    p = sub.add_parser("plot", help="write a gain, learning or feature chart (SVG and CSV)")
    p.add_argument("model")
    p.add_argument("--kind", required=True, choices=analysis.CHART_KINDS)
    _common(p)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("predict", help="score a data file with a saved model")
    p.add_argument("saved")
    _common(p)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _resolve(args)
        return args.func(args)
    except (UsageError, AutoflowError, ValueError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {msg}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is a bug
        print(f"error: internal: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
