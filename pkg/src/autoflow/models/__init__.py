"""The in-house binary classifier zoo.

Thirteen model ids cover the leaderboard rows that need no external
framework. ``create_estimator`` merges user overrides into documented
defaults, ``fit_model`` trains on a dense matrix, and the resulting
:class:`FittedModel` predicts labels and (for all but ridge and svm)
positive-class scores.
"""

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateTarget, MissingValues, NoProbability, SchemaMismatch, UnknownModel, UnknownParam
from . import linear, trees


@dataclass(frozen=True)
class ModelInfo:
    model_id: str
    name: str
    defaults: dict
    grid: dict
    fit: object
    score: object = None
    decision: object = None

    @property
    def supports_proba(self):
        return self.score is not None


_INFOS = [
    ModelInfo("lr", "Logistic Regression", {"C": 1.0, "max_iter": 100, "tol": 1e-8},
              {"C": [0.01, 0.1, 1.0, 10.0]}, linear.fit_lr, linear.score_lr),
    ModelInfo("ridge", "Ridge Classifier", {"alpha": 1.0},
              {"alpha": [0.1, 1.0, 10.0, 100.0]}, linear.fit_ridge, decision=linear.decision_linear),
    ModelInfo("lda", "Linear Discriminant Analysis", {"shrinkage": 0.0},
              {"shrinkage": [0.0, 0.1, 0.3, 0.5]}, linear.fit_lda, linear.score_lda),
    ModelInfo("qda", "Quadratic Discriminant Analysis", {"reg_param": 0.0},
              {"reg_param": [0.0, 0.01, 0.1, 0.5]}, linear.fit_qda, linear.score_qda),
    ModelInfo("nb", "Naive Bayes", {"var_smoothing": 1e-9},
              {"var_smoothing": [1e-9, 1e-7, 1e-5, 1e-3]}, linear.fit_nb, linear.score_nb),
    ModelInfo("knn", "K Neighbors Classifier", {"n_neighbors": 5},
              {"n_neighbors": [3, 5, 7, 9, 11]}, linear.fit_knn, linear.score_knn),
    ModelInfo("dt", "Decision Tree Classifier", {"max_depth": None, "min_samples_split": 2},
              {"max_depth": [2, 3, 4, 5, 6, 7, 8]}, trees.fit_dt, trees.score_forest),
    ModelInfo("rf", "Random Forest Classifier",
              {"n_estimators": 100, "max_depth": None, "max_features": "sqrt", "min_samples_split": 2},
              {"n_estimators": [50, 100, 200]}, trees.fit_rf, trees.score_forest),
    ModelInfo("et", "Extra Trees Classifier",
              {"n_estimators": 100, "max_depth": None, "max_features": "sqrt", "min_samples_split": 2},
              {"n_estimators": [50, 100, 200]}, trees.fit_et, trees.score_forest),
    ModelInfo("gbc", "Gradient Boosting Classifier",
              {"n_estimators": 100, "learning_rate": 0.1, "max_depth": 3},
              {"n_estimators": [50, 100, 200], "learning_rate": [0.05, 0.1, 0.2]},
              trees.fit_gbc, trees.score_gbc),
    ModelInfo("ada", "Ada Boost Classifier", {"n_estimators": 50, "learning_rate": 1.0},
              {"n_estimators": [25, 50, 100], "learning_rate": [0.5, 1.0]},
              trees.fit_ada, trees.score_ada),
    ModelInfo("svm", "SVM - Linear Kernel", {"alpha": 1e-4, "epochs": 20},
              {"alpha": [1e-5, 1e-4, 1e-3, 1e-2]}, linear.fit_svm, decision=linear.decision_linear),
    ModelInfo("dummy", "Dummy Classifier", {}, {}, linear.fit_dummy, linear.score_dummy),
]

MODELS = {info.model_id: info for info in _INFOS}
MODEL_IDS = tuple(MODELS)
MODEL_NAMES = {info.model_id: info.name for info in _INFOS}
LINEAR_MODELS = ("lr", "ridge", "lda", "svm")
TREE_MODELS = ("dt", "rf", "et", "gbc", "ada")


def model_info(model_id):
    try:
        return MODELS[model_id]
    except (KeyError, TypeError):
        raise UnknownModel(f"unknown model {model_id!r}; choose from {', '.join(MODEL_IDS)}") from None


@dataclass(frozen=True)
class Estimator:
    """An unfitted model: id plus the full hyperparameter map."""

    model_id: str
    hyperparams: dict = field(default_factory=dict)

    @property
    def name(self):
        return MODEL_NAMES[self.model_id]

    @property
    def supports_proba(self):
        return MODELS[self.model_id].supports_proba

    def fit(self, X, y, seed=0):
        return fit_model(self, X, y, seed)


def create_estimator(model_id, overrides=None):
    info = model_info(model_id)
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(info.defaults))
    if unknown:
        raise UnknownParam(f"{model_id} has no hyperparameter(s) {unknown}; "
                           f"known: {sorted(info.defaults)}")
    return Estimator(model_id, {**info.defaults, **overrides})


def search_space(model_id):
    """Every hyperparameter combination of the model's tuning grid, in grid order."""
    grid = model_info(model_id).grid
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _check_matrix(X):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise SchemaMismatch("expected a 2-D feature matrix")
    if not np.isfinite(X).all():
        raise MissingValues("feature matrix contains missing or non-finite values")
    return X


def fit_model(estimator, X, y, seed=0):
    """Train ``estimator`` on a dense matrix. Deterministic in (X, y, seed, hyperparams)."""
    info = model_info(estimator.model_id)
    X = _check_matrix(X)
    y = np.asarray(y)
    if len(y) != len(X):
        raise SchemaMismatch(f"X has {len(X)} rows but y has {len(y)}")
    if not np.isin(y, (0, 1)).all():
        raise DegenerateTarget("labels must be 0/1")
    y = y.astype(np.int64)
    if info.model_id != "dummy":
        if len(y) < 2 or y.min() == y.max():
            raise DegenerateTarget(f"{info.model_id} needs at least 2 rows with both classes present")
    t0 = time.perf_counter()
    params = info.fit(X, y, estimator.hyperparams, seed)
    elapsed = time.perf_counter() - t0
    return FittedModel(info.model_id, dict(estimator.hyperparams), params, X.shape[1], elapsed)


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Learned parameters of one model.

    ``fit_time_seconds`` is wall-clock and informational only; it is not
    serialized, so a loaded model reports 0.0.
    """

    model_id: str
    hyperparams: dict
    params: dict
    n_features_in: int
    fit_time_seconds: float = 0.0

    @property
    def name(self):
        return MODEL_NAMES[self.model_id]

    @property
    def supports_proba(self):
        return MODELS[self.model_id].supports_proba

    def _matrix(self, X):
        X = _check_matrix(X)
        if X.shape[1] != self.n_features_in:
            raise SchemaMismatch(f"model expects {self.n_features_in} features, got {X.shape[1]}")
        return X

    def predict_proba(self, X):
        """Positive-class scores in [0, 1]."""
        info = MODELS[self.model_id]
        if info.score is None:
            raise NoProbability(f"{self.model_id} ({info.name}) does not produce probabilities")
        return info.score(self.params, self._matrix(X))

    def decision_function(self, X):
        info = MODELS[self.model_id]
        X = self._matrix(X)
        if info.decision is not None:
            return info.decision(self.params, X)
        return info.score(self.params, X) - 0.5

    def predict(self, X):
        info = MODELS[self.model_id]
        X = self._matrix(X)
        if info.score is not None:
            return (info.score(self.params, X) >= 0.5).astype(np.int64)
        return (info.decision(self.params, X) > 0.0).astype(np.int64)


# function-style aliases
def model_predict(m, X):
    return m.predict(X)


def model_scores(m, X):
    return m.predict_proba(X)
