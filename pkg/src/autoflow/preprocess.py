"""Transformers (imputers, one-hot, scaler, PCA) and seeded stratified splitters.

Transformers follow a two-object protocol: the unfitted object holds
hyperparameters and ``fit(table)`` returns a frozen fitted object exposing
``transform(table)``. Fitted objects never change after construction, so one
instance can be shared by concurrent cross-validation folds.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CannotImpute,
    CannotStratify,
    InvalidComponents,
    MissingValues,
    NeedsEncoding,
)
from .rng import SplitMix64, derive_seed
from .tabular import Column, Table

SPLIT_STREAM = 1
KFOLD_STREAM = 2


def _require_numeric(table, who):
    cats = table.categorical_names()
    if cats:
        raise NeedsEncoding(f"{who} needs numeric input; encode {cats} first")
    for n in table.names:
        if table.column(n).missing.any():
            raise MissingValues(f"{who}: column {n!r} has missing values; impute first")


def _frozen_array(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------- imputers


class MeanImputer:
    """Replace missing numeric cells with the training mean of their column."""

    def fit(self, table):
        means = {}
        for name in table.numeric_names():
            present = table.column(name).present()
            if present.size == 0:
                raise CannotImpute(f"numeric column {name!r} has no values to average")
            means[name] = float(np.mean(present))
        return FittedMeanImputer(means)


@dataclass(frozen=True)
class FittedMeanImputer:
    means: dict
    TAG = "mean_impute"

    def transform(self, table):
        cols = table.columns()
        for name, mean in self.means.items():
            c = cols[name]
            if c.missing.any():
                cols[name] = Column.numeric(np.where(c.missing, mean, c.values),
                                            np.zeros(len(c), dtype=bool))
        return Table(cols, n_rows=table.n_rows)

    def get_state(self):
        return {"names": list(self.means), "values": np.array(list(self.means.values()))}

    @classmethod
    def from_state(cls, s):
        return cls(dict(zip(s["names"], (float(v) for v in s["values"]))))


class ModeImputer:
    """Replace missing categorical cells with the most frequent training value.

    Ties go to the lexicographically smallest label.
    """

    def fit(self, table):
        modes = {}
        for name in table.categorical_names():
            present = table.column(name).present().tolist()
            if not present:
                raise CannotImpute(f"categorical column {name!r} has no values")
            counts = {}
            for v in present:
                counts[v] = counts.get(v, 0) + 1
            modes[name] = min(counts, key=lambda v: (-counts[v], v))
        return FittedModeImputer(modes)


@dataclass(frozen=True)
class FittedModeImputer:
    modes: dict
    TAG = "mode_impute"

    def transform(self, table):
        cols = table.columns()
        for name, mode in self.modes.items():
            c = cols[name]
            if c.missing.any():
                vals = [mode if m else v for v, m in zip(c.values.tolist(), c.missing.tolist())]
                cols[name] = Column.categorical(vals, np.zeros(len(c), dtype=bool))
        return Table(cols, n_rows=table.n_rows)

    def get_state(self):
        return {"names": list(self.modes), "values": list(self.modes.values())}

    @classmethod
    def from_state(cls, s):
        return cls(dict(zip(s["names"], s["values"])))


# ---------------------------------------------------------------- encoder


class OneHotEncoder:
    """Expand each categorical column into 0/1 indicator columns.

    Categories are those seen at fit, in sorted order; indicator columns
    replace their source column in place and are named ``<column>_<category>``.
    Unseen or missing categories at transform produce an all-zero group.
    """

    def fit(self, table):
        cats = {}
        for name in table.categorical_names():
            cats[name] = sorted(set(table.column(name).present().tolist()))
        return FittedOneHotEncoder(cats)


@dataclass(frozen=True)
class FittedOneHotEncoder:
    categories: dict
    TAG = "one_hot"

    def transform(self, table):
        out = {}
        n = table.n_rows
        for name, c in table.columns().items():
            if name not in self.categories:
                out[name] = c
                continue
            values = c.values.tolist()
            for cat in self.categories[name]:
                ind = np.array([v == cat for v in values], dtype=np.float64)
                out[f"{name}_{cat}"] = Column.numeric(ind, np.zeros(n, dtype=bool))
        return Table(out, n_rows=n)

    def get_state(self):
        return {"names": list(self.categories), "categories": list(self.categories.values())}

    @classmethod
    def from_state(cls, s):
        return cls(dict(zip(s["names"], s["categories"])))


# ---------------------------------------------------------------- scaler


class StandardScaler:
    """Per-column z-score with the population (divide-by-n) standard deviation.

    Zero-variance columns map to 0.
    """

    def fit(self, table):
        return self.fit_transform(table)[0]

    def fit_transform(self, table):
        _require_numeric(table, "StandardScaler")
        X = table.to_matrix()
        # constant columns can get a tiny nonzero std from rounding; pin it to 0
        std = np.where(np.ptp(X, axis=0) == 0, 0.0, X.std(axis=0)) if len(X) else X.std(axis=0)
        fitted = FittedStandardScaler(table.names, _frozen_array(X.mean(axis=0)), _frozen_array(std))
        return fitted, Table.from_matrix(fitted._scale(X), table.names)


@dataclass(frozen=True)
class FittedStandardScaler:
    names: list
    mean: np.ndarray
    scale: np.ndarray
    TAG = "standard_scaler"

    def _scale(self, X):
        safe = np.where(self.scale > 0, self.scale, 1.0)
        return np.where(self.scale > 0, (X - self.mean) / safe, 0.0)

    def transform(self, table):
        _require_numeric(table, "StandardScaler")
        return Table.from_matrix(self._scale(table.to_matrix()), table.names)

    def get_state(self):
        return {"names": list(self.names), "mean": self.mean, "scale": self.scale}

    @classmethod
    def from_state(cls, s):
        return cls(list(s["names"]), _frozen_array(s["mean"]), _frozen_array(s["scale"]))


# ---------------------------------------------------------------- PCA


class PCA:
    """Project onto the top ``n_components`` eigenvectors of the covariance.

    Each component's sign is fixed so its largest-magnitude loading is
    positive, which makes the projection deterministic.
    """

    def __init__(self, n_components=2):
        self.n_components = int(n_components)

    def fit(self, table):
        return self.fit_transform(table)[0]

    def fit_transform(self, table):
        _require_numeric(table, "PCA")
        X = table.to_matrix()
        n, d = X.shape
        k = self.n_components
        if not 1 <= k <= d:
            raise InvalidComponents(f"n_components={k} must lie in [1, {d}]")
        if n < 2:
            raise InvalidComponents("PCA needs at least 2 rows")
        mean = X.mean(axis=0)
        Xc = X - mean
        cov = Xc.T @ Xc / (n - 1)
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(-evals, kind="stable")[:k]
        comps = evecs[:, order].T.copy()
        for i in range(k):
            j = int(np.argmax(np.abs(comps[i])))
            if comps[i, j] < 0:
                comps[i] = -comps[i]
        fitted = FittedPCA(_frozen_array(mean), _frozen_array(comps),
                           _frozen_array(np.maximum(evals[order], 0.0)))
        return fitted, fitted._project(X)


@dataclass(frozen=True)
class FittedPCA:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    TAG = "pca"

    @property
    def n_components(self):
        return self.components.shape[0]

    def _project(self, X):
        Z = (X - self.mean) @ self.components.T
        return Table.from_matrix(Z, [f"pc{i}" for i in range(self.n_components)])

    def transform(self, table):
        _require_numeric(table, "PCA")
        return self._project(table.to_matrix())

    def get_state(self):
        return {"mean": self.mean, "components": self.components,
                "explained_variance": self.explained_variance}

    @classmethod
    def from_state(cls, s):
        return cls(_frozen_array(s["mean"]), _frozen_array(s["components"]),
                   _frozen_array(s["explained_variance"]))


def preprocessing_stages(numeric_imputation="mean", categorical_imputation="mode"):
    """The standard prefix: impute numeric, impute categorical, one-hot encode."""
    if numeric_imputation != "mean" or categorical_imputation != "mode":
        raise ValueError("only mean (numeric) and mode (categorical) imputation are supported")
    return [("numeric_imputer", MeanImputer()), ("categorical_imputer", ModeImputer()),
            ("one_hot", OneHotEncoder())]


TRANSFORM_TYPES = {c.TAG: c for c in (FittedMeanImputer, FittedModeImputer, FittedOneHotEncoder,
                                      FittedStandardScaler, FittedPCA)}


# ---------------------------------------------------------------- splitters


@dataclass(frozen=True)
class SplitSpec:
    train_size: float = 0.7
    seed: int = 123
    stratify: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_size < 1.0:
            raise ValueError(f"train_size must lie in (0, 1), got {self.train_size}")


def _class_members(y):
    y = np.asarray(y)
    return [np.flatnonzero(y == c).tolist() for c in np.unique(y)]


def _n_train(train_size, count):
    # the epsilon absorbs representation error, e.g. 0.7 * 500 -> 349.99999999999997
    return int(math.floor(train_size * count + 1e-9))


def stratified_split(X, y, spec):
    """Seeded train/test index split.

    With ``stratify``, each class contributes ``floor(train_size * count)``
    rows to train (chosen by a seeded shuffle) and the rest to test. Returns
    sorted ``(train_idx, test_idx)`` arrays.
    """
    y = np.asarray(y)
    if X is not None and len(X) != len(y):
        raise ValueError("X and y have different lengths")
    rng = SplitMix64(derive_seed(spec.seed, SPLIT_STREAM))
    train, test = [], []
    groups = _class_members(y) if spec.stratify else [list(range(len(y)))]
    for members in groups:
        if spec.stratify and len(members) < 2:
            raise CannotStratify(f"a class has {len(members)} member(s); need at least 2")
        rng.shuffle(members)
        cut = _n_train(spec.train_size, len(members))
        train += members[:cut]
        test += members[cut:]
    return np.array(sorted(train), dtype=np.intp), np.array(sorted(test), dtype=np.intp)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.intp)
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    @property
    def n_rows(self):
        return len(self.assignments)

    def test_indices(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.assignments != fold)

    def folds(self):
        """Yield ``(fold, train_idx, test_idx)`` in fold order."""
        for f in range(self.k):
            yield f, self.train_indices(f), self.test_indices(f)


def stratified_kfold(y, k=10, seed=123):
    """Assign rows to ``k`` folds, preserving class balance within one row.

    Each class is shuffled with the seeded stream and dealt round-robin. The
    dealing position carries over from one class to the next, so total fold
    sizes also differ by at most one.
    """
    k = int(k)
    if k < 2:
        raise ValueError("k must be at least 2")
    y = np.asarray(y)
    rng = SplitMix64(derive_seed(seed, KFOLD_STREAM))
    assign = np.empty(len(y), dtype=np.intp)
    pos = 0
    for members in _class_members(y):
        if len(members) < k:
            raise CannotStratify(f"a class has {len(members)} members, fewer than k={k}")
        rng.shuffle(members)
        for m in members:
            assign[m] = pos % k
            pos += 1
    return FoldPlan(k, assign)
