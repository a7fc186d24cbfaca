"""Binary classification metrics and the cross-validation engine.

Counts are Python ints and the rational metrics (kappa, MCC) are formed from
exact integer numerators and denominators, so degenerate cases such as a
constant predictor give exactly 0.0 rather than rounding noise.
"""

import csv
import io
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DegenerateFold, UndefinedAUC

METRIC_NAMES = ("accuracy", "auc", "recall", "precision", "f1", "kappa", "mcc")
METRIC_LABELS = {"accuracy": "Accuracy", "auc": "AUC", "recall": "Recall", "precision": "Prec.",
                 "f1": "F1", "kappa": "Kappa", "mcc": "MCC", "fit_time": "TT (Sec)"}


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0 or self.n == 0:
            raise ValueError(f"invalid confusion counts {self}")

    @property
    def n(self):
        return self.tp + self.fp + self.fn + self.tn

    def swapped(self):
        """The same matrix with the roles of the two classes exchanged."""
        return Confusion(self.tn, self.fn, self.fp, self.tp)


def confusion(y_true, y_pred):
    """Confusion counts with label 1 as the positive class."""
    t = np.asarray(y_true).astype(bool)
    p = np.asarray(y_pred).astype(bool)
    if t.shape != p.shape:
        raise ValueError("y_true and y_pred differ in length")
    return Confusion(int(np.sum(t & p)), int(np.sum(~t & p)), int(np.sum(t & ~p)), int(np.sum(~t & ~p)))


def basic_metrics(c):
    """``(accuracy, precision, recall, f1)``; a zero denominator yields 0."""
    accuracy = (c.tp + c.tn) / c.n
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    # 2PR/(P+R) in exact counts is 2tp / (2tp + fp + fn)
    f1 = 2 * c.tp / (2 * c.tp + c.fp + c.fn) if c.tp else 0.0
    return accuracy, precision, recall, f1


def cohen_kappa(c):
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e); 0 when p_e = 1."""
    n = c.n
    chance = (c.tp + c.fp) * (c.tp + c.fn) + (c.fn + c.tn) * (c.fp + c.tn)
    denom = n * n - chance
    if denom == 0:
        return 0.0
    return (n * (c.tp + c.tn) - chance) / denom


def mcc(c):
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    prod = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if prod == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(prod)


def average_ranks(x):
    """1-based ranks of ``x``; tied values share the mean of their positions."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ranks = np.empty(len(x))
    start = 0
    n = len(x)
    while start < n:
        end = start + 1
        while end < n and xs[end] == xs[start]:
            end += 1
        ranks[order[start:end]] = (start + 1 + end) / 2.0
        start = end
    return ranks


def roc_auc(y_true, scores):
    """Area under the ROC curve via the Mann-Whitney rank-sum statistic."""
    y = np.asarray(y_true).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape:
        raise ValueError("y_true and scores differ in length")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUC("AUC needs both classes present")
    r_pos = float(average_ranks(s)[y].sum())
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class MetricRow:
    accuracy: float
    auc: float
    recall: float
    precision: float
    f1: float
    kappa: float
    mcc: float
    fit_time: float = 0.0

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def metric(self, name):
        if name not in METRIC_NAMES and name != "fit_time":
            raise KeyError(f"unknown metric {name!r}; choose from {', '.join(METRIC_NAMES)}")
        return getattr(self, name)


def evaluate(y_true, y_pred, scores=None, fit_time=0.0):
    """Score one prediction set. ``scores=None`` means no probabilities: AUC is reported as 0."""
    c = confusion(y_true, y_pred)
    accuracy, precision, recall, f1 = basic_metrics(c)
    auc = 0.0 if scores is None else roc_auc(y_true, scores)
    return MetricRow(accuracy, auc, recall, precision, f1, cohen_kappa(c), mcc(c), fit_time)


def _aggregate(rows, fn):
    return MetricRow(**{f.name: float(fn(np.array([getattr(r, f.name) for r in rows])))
                        for f in fields(MetricRow)})


def mean_row(rows):
    return _aggregate(rows, np.mean)


def std_row(rows):
    """Population (ddof=0) standard deviation per metric."""
    return _aggregate(rows, np.std)


@dataclass(frozen=True)
class CVReport:
    model_id: str
    fold_rows: tuple
    mean_row: MetricRow
    std_row: MetricRow
    test_indices: tuple = ()
    train_rows: tuple = ()

    @property
    def k(self):
        return len(self.fold_rows)

    @property
    def train_mean_row(self):
        return mean_row(self.train_rows) if self.train_rows else None

    def rows(self):
        """``(label, MetricRow)`` pairs: folds 0..k-1, then Mean and Std."""
        return [(str(i), r) for i, r in enumerate(self.fold_rows)] + [
            ("Mean", self.mean_row), ("Std", self.std_row)]

    def render_text(self):
        return render_table(["Fold"] + [METRIC_LABELS[m] for m in METRIC_NAMES],
                            [[label] + [r.metric(m) for m in METRIC_NAMES] for label, r in self.rows()])

    def to_csv(self):
        return render_csv(["Fold"] + [METRIC_LABELS[m] for m in METRIC_NAMES],
                          [[label] + [r.metric(m) for m in METRIC_NAMES] for label, r in self.rows()])


def format_cell(v):
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def render_table(header, rows):
    """Fixed-width text table; floats shown with 4 decimals."""
    cells = [[format_cell(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[j]) for r in cells)) if cells else len(h)
              for j, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) if j == 0 else h.rjust(w)
                       for j, (h, w) in enumerate(zip(header, widths)))]
    for r in cells:
        lines.append("  ".join(c.ljust(w) if j == 0 else c.rjust(w)
                               for j, (c, w) in enumerate(zip(r, widths))))
    return "\n".join(lines) + "\n"


def render_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def cross_validate(spec, X, y, plan, seed=0, return_train_score=False):
    """k-fold evaluation of a pipeline (or a bare estimator).

    For each fold the whole pipeline, preprocessing included, is refit on the
    rows outside the fold and scored on the fold. A bare
    :class:`~autoflow.models.Estimator` is wrapped in the standard
    preprocessing prefix (imputation and one-hot encoding).
    """
    from . import pipeline as pl
    from .models import Estimator
    from .preprocess import preprocessing_stages

    if isinstance(spec, Estimator):
        spec = pl.make_pipeline(preprocessing_stages() + [("model", spec)])
    if not spec.has_estimator:
        raise ValueError("cross_validate needs a pipeline ending in an estimator")
    y = np.asarray(y)
    if plan.n_rows != X.n_rows or len(y) != X.n_rows:
        raise ValueError("fold plan, X and y must cover the same rows")
    model_id = spec.stages[-1].step.model_id
    rows, train_rows, tests = [], [], []
    for f, train_idx, test_idx in plan.folds():
        if len(test_idx) == 0:
            raise DegenerateFold(f, "empty validation fold")
        if len(np.unique(y[train_idx])) < 2:
            raise DegenerateFold(f, "training rows contain a single class")
        fp = pl.fit(spec, X.take(train_idx), y[train_idx], seed)
        est = fp.estimator
        rows.append(_score(fp, X.take(test_idx), y[test_idx], est.fit_time_seconds, f))
        if return_train_score:
            train_rows.append(_score(fp, X.take(train_idx), y[train_idx], est.fit_time_seconds, f))
        tests.append(test_idx)
    return CVReport(model_id, tuple(rows), mean_row(rows), std_row(rows), tuple(tests), tuple(train_rows))


def _score(fp, X, y, fit_time, fold):
    pred = fp.predict(X)
    scores = None
    if fp.estimator.supports_proba:
        scores = fp.predict_proba(X)
    try:
        return evaluate(y, pred, scores, fit_time)
    except UndefinedAUC as exc:
        raise DegenerateFold(fold, str(exc)) from None

