"""Named-stage pipelines: transformers chained in order, one optional estimator last.

``fit`` runs each transformer's fit on the output of the stages before it and
hands the fully transformed matrix to the estimator. The result is an
immutable :class:`FittedPipeline`; refitting always builds a new one.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AutoflowError, DuplicateStage, InvalidOrder, NotAnEstimator, SchemaMismatch
from .models import Estimator, FittedModel, fit_model

TRANSFORMER = "transformer"
ESTIMATOR = "estimator"


@dataclass(frozen=True)
class Stage:
    id: str
    step: object

    @property
    def kind(self):
        return ESTIMATOR if isinstance(self.step, Estimator) else TRANSFORMER


@dataclass(frozen=True)
class Pipeline:
    stages: tuple

    @property
    def has_estimator(self):
        return bool(self.stages) and self.stages[-1].kind == ESTIMATOR

    @property
    def ids(self):
        return [s.id for s in self.stages]


def make_pipeline(stages):
    """Validate ``[(id, step), ...]`` (or :class:`Stage` objects) into a :class:`Pipeline`."""
    stages = tuple(s if isinstance(s, Stage) else Stage(*s) for s in stages)
    if not stages:
        raise InvalidOrder("a pipeline needs at least one stage")
    seen = set()
    for i, s in enumerate(stages):
        if not s.id or not isinstance(s.id, str):
            raise DuplicateStage(f"stage {i} has an empty id")
        if s.id in seen:
            raise DuplicateStage(f"duplicate stage id {s.id!r}")
        seen.add(s.id)
        if s.kind == ESTIMATOR and i != len(stages) - 1:
            raise InvalidOrder(f"estimator {s.id!r} must be the final stage")
        if s.kind == TRANSFORMER and not hasattr(s.step, "fit"):
            raise InvalidOrder(f"stage {s.id!r} is neither a transformer nor an estimator")
    return Pipeline(stages)


def _tag(exc, stage_id):
    if isinstance(exc, AutoflowError) and exc.stage_id is None:
        exc.stage_id = stage_id
    return exc


def fit_transform(step, table):
    """Fit ``step`` and transform ``table`` with it; fused when the step supports it."""
    fused = getattr(step, "fit_transform", None)
    if fused is not None:
        return fused(table)
    fitted = step.fit(table)
    return fitted, fitted.transform(table)


@dataclass(frozen=True, eq=False)
class FittedPipeline:
    pipeline: Pipeline
    fitted_states: tuple
    feature_schema: tuple
    feature_names_out: tuple

    @property
    def estimator(self):
        """The fitted model of the final stage, or None."""
        if self.pipeline.has_estimator:
            return self.fitted_states[-1]
        return None

    @property
    def model_id(self):
        est = self.estimator
        return None if est is None else est.model_id

    @property
    def transformers(self):
        n = len(self.fitted_states) - (1 if self.pipeline.has_estimator else 0)
        return list(zip(self.pipeline.ids[:n], self.fitted_states[:n]))

    def transform(self, X):
        return transform(self, X)

    def predict(self, X):
        return predict(self, X)

    def predict_proba(self, X):
        return predict_proba(self, X)


def fit(p, X, y, seed=0):
    """Fit every stage in order; ``X`` and ``y`` are not modified."""
    y = np.asarray(y)
    if X.n_rows == 0 or X.n_rows != len(y):
        raise SchemaMismatch(f"X has {X.n_rows} rows, y has {len(y)}; need equal and > 0")
    states = []
    current = X
    for stage in p.stages:
        try:
            if stage.kind == ESTIMATOR:
                states.append(fit_model(stage.step, current.to_matrix(), y, seed))
            else:
                fitted, current = fit_transform(stage.step, current)
                states.append(fitted)
        except AutoflowError as exc:
            raise _tag(exc, stage.id)
    return FittedPipeline(p, tuple(states), X.schema, tuple(current.names))


def transform(fp, X):
    """Apply the fitted transformers in order (the estimator stage is skipped)."""
    X.check_schema(fp.feature_schema)
    current = X
    for stage_id, state in fp.transformers:
        try:
            current = state.transform(current)
        except AutoflowError as exc:
            raise _tag(exc, stage_id)
    return current


def _estimator_input(fp, X):
    est = fp.estimator
    if est is None:
        raise NotAnEstimator("pipeline has no final estimator")
    Z = transform(fp, X)
    try:
        return est, Z.to_matrix()
    except AutoflowError as exc:
        raise _tag(exc, fp.pipeline.ids[-1])


def predict(fp, X):
    est, Z = _estimator_input(fp, X)
    return est.predict(Z)


def predict_proba(fp, X):
    est, Z = _estimator_input(fp, X)
    return est.predict_proba(Z)


def from_model(model, feature_names, stage_id="model"):
    """Wrap a bare :class:`FittedModel` as a single-stage fitted pipeline over numeric columns."""
    from .tabular import NUMERIC

    if not isinstance(model, FittedModel):
        raise TypeError("expected a FittedModel")
    p = make_pipeline([(stage_id, Estimator(model.model_id, dict(model.hyperparams)))])
    schema = tuple((n, NUMERIC) for n in feature_names)
    return FittedPipeline(p, (model,), schema, tuple(feature_names))
