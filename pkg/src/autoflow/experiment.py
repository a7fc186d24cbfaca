"""The workflow: setup, compare_models, create_model, tune_model, predict_model, save/load.

``setup`` fixes everything random up front (the holdout split and the fold
plan over the training split), so every model compared afterwards sees
exactly the same folds.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import pipeline as pl
from .errors import NothingToCompare
from .metrics import METRIC_LABELS, METRIC_NAMES, cross_validate, evaluate, render_csv, render_table
from .models import MODEL_IDS, MODEL_NAMES, create_estimator, model_info, search_space
from .preprocess import SplitSpec, preprocessing_stages, stratified_kfold, stratified_split
from .rng import SplitMix64, derive_seed
from .serialize import load_model, read_model_file, save_model  # noqa: F401  re-exported
from .tabular import TargetSpec, split_xy, target_labels

log = logging.getLogger(__name__)

TUNE_STREAM = 60
USI_STREAM = 99


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one experiment; defaults follow the classic diabetes demo."""

    target: object
    session_id: int = 123
    train_size: float = 0.7
    fold_number: int = 10
    fold_strategy: str = "stratifiedkfold"
    numeric_imputation: str = "mean"
    categorical_imputation: str = "mode"
    preprocess: bool = True
    experiment_name: str = "clf-default-name"

    @property
    def target_spec(self):
        return self.target if isinstance(self.target, TargetSpec) else TargetSpec(self.target)


@dataclass(frozen=True, eq=False)
class Experiment:
    config: ExperimentConfig
    full_table: object
    labels: tuple
    X_train: object
    y_train: np.ndarray
    X_holdout: object
    y_holdout: np.ndarray
    train_idx: np.ndarray
    holdout_idx: np.ndarray
    fold_plan: object
    prefix: object
    report: tuple = field(default=())

    @property
    def seed(self):
        return self.config.session_id

    def preprocessing(self):
        """Fresh, unfitted preprocessing stages."""
        if not self.config.preprocess:
            return []
        return preprocessing_stages(self.config.numeric_imputation, self.config.categorical_imputation)

    def pipeline_for(self, estimator):
        return pl.make_pipeline(self.preprocessing() + [("model", estimator)])

    def report_text(self):
        return render_table(["Description", "Value"], [[d, v] for d, v in self.report])

    def compare_models(self, **kw):
        return compare_models(self, **kw)

    def create_model(self, model_id, **kw):
        return create_model(self, model_id, **kw)

    def tune_model(self, model_id, **kw):
        return tune_model(self, model_id, **kw)

    def predict_model(self, fp):
        return predict_model(self, fp)


def _usi(session_id):
    return f"{derive_seed(session_id, USI_STREAM) & 0xFFFF:04x}"


def _label(v):
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def _missing_rows(X):
    miss = np.zeros(X.n_rows, dtype=bool)
    for n in X.names:
        miss |= X.column(n).missing
    return int(miss.sum())


def setup(data, config):
    """Split ``data`` into train/holdout, plan the folds and fit the preprocessing prefix.

    Returns ``(experiment, report_rows)`` where the report is a list of
    ``(description, value)`` string pairs.
    """
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig(config)
    if config.fold_strategy.lower() != "stratifiedkfold":
        raise ValueError(f"unsupported fold strategy {config.fold_strategy!r}")
    target = config.target_spec
    neg, pos = target_labels(data, target)
    X, y = split_xy(data, target)
    train_idx, holdout_idx = stratified_split(X, y, SplitSpec(config.train_size, config.session_id))
    X_train, y_train = X.take(train_idx), y[train_idx]
    X_holdout, y_holdout = X.take(holdout_idx), y[holdout_idx]
    plan = stratified_kfold(y_train, config.fold_number, config.session_id)
    stages = (preprocessing_stages(config.numeric_imputation, config.categorical_imputation)
              if config.preprocess else [])
    if stages:
        prefix = pl.fit(pl.make_pipeline(stages), X_train, y_train)
        width = len(prefix.feature_names_out)
    else:
        prefix = None
        width = X.shape[1]

    def shape(n):
        return f"({n}, {width + 1})"

    report = [
        ("Session id", str(config.session_id)),
        ("Target", target.column),
        ("Target type", "Binary"),
        ("Target mapping", f"{_label(neg)}: 0, {_label(pos)}: 1"),
        ("Original data shape", f"{data.shape}"),
        ("Transformed data shape", shape(data.n_rows)),
        ("Transformed train set shape", shape(len(train_idx))),
        ("Transformed test set shape", shape(len(holdout_idx))),
        ("Numeric features", str(len(X.numeric_names()))),
    ]
    if X.categorical_names():
        report.append(("Categorical features", str(len(X.categorical_names()))))
    if X.has_missing():
        report.append(("Rows with missing values", f"{_missing_rows(X) / X.n_rows:.1%}"))
    report += [
        ("Preprocess", str(config.preprocess)),
        ("Imputation type", "simple" if config.preprocess else "none"),
        ("Numeric imputation", config.numeric_imputation),
        ("Categorical imputation", config.categorical_imputation),
        ("Fold Generator", "StratifiedKFold"),
        ("Fold Number", str(config.fold_number)),
        ("CPU Jobs", "1"),
        ("Use GPU", "False (not supported)"),
        ("Log Experiment", "False (not supported)"),
        ("Experiment Name", config.experiment_name),
        ("USI", _usi(config.session_id)),
    ]
    exp = Experiment(config, data, (neg, pos), X_train, y_train, X_holdout, y_holdout,
                     train_idx, holdout_idx, plan, prefix, tuple(report))
    return exp, list(report)


# ---------------------------------------------------------------- leaderboard


@dataclass(frozen=True)
class Leaderboard:
    rows: tuple
    sort_metric: str
    selected: tuple

    def ids(self):
        return [mid for mid, _ in self.rows]

    def row(self, model_id):
        for mid, r in self.rows:
            if mid == model_id:
                return r
        raise KeyError(model_id)

    def _table(self, timings):
        header = ["", "Model"] + [METRIC_LABELS[m] for m in METRIC_NAMES]
        if timings:
            header.append(METRIC_LABELS["fit_time"])
        body = []
        for mid, r in self.rows:
            line = [mid, MODEL_NAMES[mid]] + [r.metric(m) for m in METRIC_NAMES]
            if timings:
                line.append(r.fit_time)
            body.append(line)
        return header, body

    def render_text(self, timings=True):
        return render_table(*self._table(timings))

    def to_csv(self, timings=False):
        """CSV export. Timings are off by default so the file is reproducible byte for byte."""
        header, body = self._table(timings)
        header[0] = "ID"
        return render_csv(header, body)


def sort_rows(rows, metric):
    """Non-increasing ``metric``; equal values ordered by model id."""
    if metric not in METRIC_NAMES:
        raise ValueError(f"unknown sort metric {metric!r}; choose from {', '.join(METRIC_NAMES)}")
    return sorted(rows, key=lambda item: (-item[1].metric(metric), item[0]))


def _candidates(include, exclude):
    explicit = include is not None
    include = list(MODEL_IDS) if include is None else list(include)
    exclude = list(exclude or [])
    for mid in include + exclude:
        model_info(mid)
    if explicit and set(include) & set(exclude):
        raise ValueError(f"models both included and excluded: {sorted(set(include) & set(exclude))}")
    ids = [m for m in include if m not in exclude]
    if not ids:
        raise NothingToCompare("no candidate models left after include/exclude")
    return ids


def compare_models(exp, sort="accuracy", n_select=1, include=None, exclude=None):
    """Cross-validate every candidate on the shared fold plan and rank them.

    Returns ``(best, leaderboard)``; ``best`` lists the top ``n_select``
    pipelines, each refit on the whole training split.
    """
    if sort not in METRIC_NAMES:
        raise ValueError(f"unknown sort metric {sort!r}; choose from {', '.join(METRIC_NAMES)}")
    ids = _candidates(include, exclude)
    reports = {}
    for mid in ids:
        t0 = time.perf_counter()
        reports[mid] = cross_validate(exp.pipeline_for(create_estimator(mid)), exp.X_train,
                                      exp.y_train, exp.fold_plan, exp.seed)
        log.info("cross-validated %s in %.2fs", mid, time.perf_counter() - t0)
    rows = sort_rows([(mid, reports[mid].mean_row) for mid in ids], sort)
    n_select = max(0, min(int(n_select), len(rows)))
    selected = tuple(mid for mid, _ in rows[:n_select])
    best = [pl.fit(exp.pipeline_for(create_estimator(mid)), exp.X_train, exp.y_train, exp.seed)
            for mid in selected]
    return best, Leaderboard(tuple(rows), sort, selected)


def create_model(exp, model_id, overrides=None):
    """Cross-validate one model, then refit it on the whole training split."""
    est = create_estimator(model_id, overrides)
    p = exp.pipeline_for(est)
    report = cross_validate(p, exp.X_train, exp.y_train, exp.fold_plan, exp.seed)
    return pl.fit(p, exp.X_train, exp.y_train, exp.seed), report


def tune_model(exp, model_id, n_iter=10, seed=None, grid=None):
    """Seeded random search over the model's grid, scored by CV mean accuracy.

    Draws ``n_iter`` distinct grid points (all of them when the grid is
    smaller). The best point wins; ties go to the earliest draw. Returns
    ``(fitted_pipeline, cv_report, chosen_hyperparams)``.
    """
    model_info(model_id)
    if grid is None:
        space = search_space(model_id)
    else:
        keys = list(grid)
        space = [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    seed = exp.seed if seed is None else seed
    order = SplitMix64(derive_seed(seed, TUNE_STREAM)).permutation(len(space))
    drawn = [space[i] for i in order[:max(1, int(n_iter))]]
    best = None
    for params in drawn:
        est = create_estimator(model_id, params)
        report = cross_validate(exp.pipeline_for(est), exp.X_train, exp.y_train, exp.fold_plan, exp.seed)
        log.info("tune %s %s -> %.4f", model_id, params, report.mean_row.accuracy)
        if best is None or report.mean_row.accuracy > best[1].mean_row.accuracy:
            best = (est, report, params)
    est, report, params = best
    fp = pl.fit(exp.pipeline_for(est), exp.X_train, exp.y_train, exp.seed)
    return fp, report, dict(params)


@dataclass(frozen=True)
class Predictions:
    labels: np.ndarray
    scores: object


def predict_model(exp, fp):
    """Predict the holdout split; returns ``(Predictions, MetricRow)``."""
    labels = fp.predict(exp.X_holdout)
    scores = fp.predict_proba(exp.X_holdout) if fp.estimator.supports_proba else None
    return Predictions(labels, scores), evaluate(exp.y_holdout, labels, scores)
