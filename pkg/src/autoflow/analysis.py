"""Chart data for the three model plots (gain, learning, feature) and their SVG/CSV renderers.

A :class:`ChartSpec` is plain data: named point series plus axis labels.
Rendering is deterministic, so the same chart always produces the same bytes.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .errors import CannotStratify, EmptyChart, NoImportance, NoProbability
from .metrics import cross_validate
from .models import LINEAR_MODELS, TREE_MODELS, FittedModel
from .models.trees import impurity_importances
from .preprocess import SplitSpec, stratified_kfold, stratified_split

CHART_KINDS = ("gain", "learning", "feature")
DEFAULT_FRACTIONS = tuple(round(0.1 * i, 1) for i in range(1, 11))


@dataclass(frozen=True)
class Series:
    name: str
    x: tuple
    y: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValueError(f"series {self.name!r}: x and y differ in length")
        if not all(math.isfinite(v) for v in self.x + self.y):
            raise ValueError(f"series {self.name!r} has non-finite points")
        if any(b < a for a, b in zip(self.x, self.x[1:])):
            raise ValueError(f"series {self.name!r}: x must be non-decreasing")

    def points(self):
        return list(zip(self.x, self.y))


@dataclass(frozen=True)
class ChartSpec:
    """One chart.

    ``categories`` labels the x positions of a bar chart; ``reference`` is an
    optional dashed guide line; ``warnings`` records skipped points.
    """

    kind: str
    series: tuple
    x_label: str
    y_label: str
    title: str = ""
    reference: Series = None
    categories: tuple = ()
    warnings: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in CHART_KINDS:
            raise ValueError(f"unknown chart kind {self.kind!r}")

    def get(self, name):
        for s in self.series:
            if s.name == name:
                return s
        raise KeyError(name)


# ---------------------------------------------------------------- gain


def gain_curve(y_true, scores):
    """Cumulative-gain chart: share of positives captured vs share of rows, by descending score.

    Ties in score keep the original row order.

    Examples
    --------
    >>> c = gain_curve([1, 0, 1, 0], [0.9, 0.8, 0.7, 0.1])
    >>> c.series[0].points()
    [(0.0, 0.0), (0.25, 0.5), (0.5, 0.5), (0.75, 1.0), (1.0, 1.0)]
    """
    if scores is None:
        raise NoProbability("gain chart needs probability scores")
    y = np.asarray(y_true).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise ValueError("y_true and scores must be 1-D and of equal length")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise ValueError("gain chart needs both classes present")
    n = len(y)
    order = np.lexsort((np.arange(n), -s))
    hits = np.concatenate([[0], np.cumsum(y[order])])
    xs = np.arange(n + 1) / n
    ys = hits / n_pos
    return ChartSpec("gain", (Series("model", xs, ys),), "fraction of rows", "fraction of positives",
                     title="Cumulative gain", reference=Series("random", (0.0, 1.0), (0.0, 1.0)))


def model_gain_curve(fp, X, y):
    """Gain chart of a fitted pipeline (or model) on ``(X, y)``."""
    return gain_curve(y, fp.predict_proba(X))


# ---------------------------------------------------------------- learning


def learning_curve(exp, model_id, fractions=DEFAULT_FRACTIONS, overrides=None):
    """Mean train-fold and validation accuracy versus training-set size.

    For each fraction ``f`` a stratified, seeded subsample of the training
    split is cross-validated with a fresh fold plan; ``f = 1`` reuses the
    experiment's own plan, so that point equals ``create_model``'s CV mean.
    Fractions too small to stratify into the experiment's fold count are
    skipped and recorded in ``warnings``.
    """
    from .models import create_estimator

    est = create_estimator(model_id, overrides)
    k = exp.config.fold_number
    xs, train_acc, valid_acc, warnings = [], [], [], []
    for f in sorted(float(v) for v in fractions):
        if not 0.0 < f <= 1.0:
            raise ValueError(f"fraction {f} outside (0, 1]")
        if f == 1.0:
            idx = np.arange(exp.X_train.n_rows)
            plan = exp.fold_plan
        else:
            try:
                idx, _ = stratified_split(None, exp.y_train, SplitSpec(f, exp.seed))
                plan = stratified_kfold(exp.y_train[idx], k, exp.seed)
            except (CannotStratify, ValueError) as exc:
                warnings.append(f"fraction {f:g} skipped: {exc}")
                continue
        report = cross_validate(exp.pipeline_for(est), exp.X_train.take(idx), exp.y_train[idx],
                                plan, exp.seed, return_train_score=True)
        xs.append(len(idx))
        train_acc.append(report.train_mean_row.accuracy)
        valid_acc.append(report.mean_row.accuracy)
    return ChartSpec("learning", (Series("training", xs, train_acc), Series("validation", xs, valid_acc)),
                     "training rows", "accuracy", title=f"Learning curve ({model_id})",
                     warnings=tuple(warnings))


# ---------------------------------------------------------------- feature


def importances(model):
    """Raw importance vector of a fitted model (unsorted, one entry per input feature).

    Linear models use ``|coefficient| * feature std``, i.e. the coefficient
    magnitude on standardized inputs. Tree models use the impurity decrease,
    normalized to sum to 1 (AdaBoost weights each stump by its vote).
    """
    mid = model.model_id
    if mid in LINEAR_MODELS:
        return np.abs(model.params["coef"]) * model.params["feature_std"]
    if mid in TREE_MODELS:
        weights = model.params["alphas"] if mid == "ada" else None
        return impurity_importances(model.params, model.n_features_in, weights)
    raise NoImportance("model has no feature importances")


def feature_importance(model, feature_names=None):
    """Bar chart of importances, sorted descending (ties by feature order)."""
    if not isinstance(model, FittedModel):
        if feature_names is None:
            feature_names = list(model.feature_names_out)
        model = model.estimator
        if model is None:
            raise NoImportance("model has no feature importances")
    imp = importances(model)
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(len(imp))]
    if len(feature_names) != len(imp):
        raise ValueError(f"{len(feature_names)} names for {len(imp)} features")
    order = np.lexsort((np.arange(len(imp)), -imp))
    return ChartSpec("feature", (Series("importance", np.arange(len(imp)), imp[order]),),
                     "feature", "importance", title=f"Feature importance ({model.model_id})",
                     categories=tuple(str(feature_names[j]) for j in order))


# ---------------------------------------------------------------- rendering

_W, _H = 640, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 170, 40, 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd")


def _check_nonempty(chart):
    if not chart.series or any(len(s.x) == 0 for s in chart.series):
        raise EmptyChart(f"{chart.kind} chart has no points to draw")


def _fmt(v):
    return f"{v:.2f}"


def _tick(v):
    return f"{v:.3g}"


def _bounds(chart):
    xs = [v for s in chart.series for v in s.x]
    ys = [v for s in chart.series for v in s.y]
    if chart.reference is not None:
        xs += list(chart.reference.x)
        ys += list(chart.reference.y)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys)
    if chart.kind == "feature":
        x0, x1 = x0 - 0.5, x1 + 0.5
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y1 = y0 + 1.0
    return x0, x1, y0, y1


def svg_text(chart):
    """The chart as a self-contained SVG 1.1 document."""
    _check_nonempty(chart)
    x0, x1, y0, y1 = _bounds(chart)
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def px(x):
        return _LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return _TOP + ph - (y - y0) / (y1 - y0) * ph

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_W / 2:.0f}" y="22" text-anchor="middle" font-size="15">{escape(chart.title)}</text>']
    # axes and ticks
    out.append(f'<line x1="{_LEFT}" y1="{_TOP + ph}" x2="{_LEFT + pw}" y2="{_TOP + ph}" stroke="black"/>')
    out.append(f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_TOP + ph}" stroke="black"/>')
    for i in range(6):
        v = y0 + (y1 - y0) * i / 5
        out.append(f'<line x1="{_LEFT - 4}" y1="{_fmt(py(v))}" x2="{_LEFT}" y2="{_fmt(py(v))}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 7}" y="{_fmt(py(v) + 4)}" text-anchor="end">{_tick(v)}</text>')
    if chart.categories:
        for pos, label in enumerate(chart.categories):
            x = px(float(pos))
            out.append(f'<text x="{_fmt(x)}" y="{_TOP + ph + 14}" text-anchor="end" '
                       f'transform="rotate(-35 {_fmt(x)} {_TOP + ph + 14})" font-size="9">'
                       f'{escape(label[:24])}</text>')
    else:
        for i in range(6):
            v = x0 + (x1 - x0) * i / 5
            out.append(f'<line x1="{_fmt(px(v))}" y1="{_TOP + ph}" x2="{_fmt(px(v))}" y2="{_TOP + ph + 4}" '
                       f'stroke="black"/>')
            out.append(f'<text x="{_fmt(px(v))}" y="{_TOP + ph + 17}" text-anchor="middle">{_tick(v)}</text>')
    out.append(f'<text x="{_LEFT + pw / 2:.0f}" y="{_H - 8}" text-anchor="middle">{escape(chart.x_label)}</text>')
    out.append(f'<text x="16" y="{_TOP + ph / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_TOP + ph / 2:.0f})">{escape(chart.y_label)}</text>')
    # data
    if chart.reference is not None:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in chart.reference.points())
        out.append(f'<polyline points="{pts}" fill="none" stroke="gray" stroke-dasharray="5,4"/>')
    legend = []
    for i, s in enumerate(chart.series):
        color = _COLORS[i % len(_COLORS)]
        legend.append((s.name, color))
        if chart.kind == "feature":
            bw = 0.8 * pw / max(1, len(s.x))
            for x, y in s.points():
                top, base = py(max(y, 0.0)), py(min(y, 0.0))
                out.append(f'<rect x="{_fmt(px(x) - bw / 2)}" y="{_fmt(top)}" width="{_fmt(bw)}" '
                           f'height="{_fmt(base - top)}" fill="{color}"/>')
        else:
            pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in s.points())
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
            for x, y in s.points():
                out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="2.5" fill="{color}"/>')
    if chart.reference is not None:
        legend.append((chart.reference.name, "gray"))
    lx = _LEFT + pw + 15
    for i, (name, color) in enumerate(legend):
        ly = _TOP + 10 + 18 * i
        out.append(f'<rect x="{lx}" y="{ly - 9}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{lx + 18}" y="{ly + 1}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def csv_text(chart):
    """One ``series,x,y`` row per point; bar charts add a ``label`` column."""
    _check_nonempty(chart)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    labelled = bool(chart.categories)
    w.writerow(["series", "x", "y"] + (["label"] if labelled else []))
    for s in chart.series:
        for i, (x, y) in enumerate(s.points()):
            w.writerow([s.name, repr(x), repr(y)] + ([chart.categories[i]] if labelled else []))
    return buf.getvalue()


def read_chart_csv(text):
    """Parse :func:`csv_text` output back into ``{series: [(x, y), ...]}``."""
    rows = list(csv.reader(io.StringIO(text)))
    out = {}
    for r in rows[1:]:
        out.setdefault(r[0], []).append((float(r[1]), float(r[2])))
    return out


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    return path


def render_svg(chart, path):
    return _write(path, svg_text(chart))


def render_csv(chart, path):
    return _write(path, csv_text(chart))
