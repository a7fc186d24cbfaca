import hashlib

import numpy as np
import pytest

from autoflow import pipeline as pl
from autoflow.errors import (
    DuplicateStage,
    InvalidOrder,
    MissingValues,
    NoProbability,
    NotAnEstimator,
    SchemaMismatch,
)
from autoflow.models import create_estimator, fit_model
from autoflow.preprocess import PCA, MeanImputer, StandardScaler
from autoflow.tabular import Column, Table, split_xy


def _digest(table, y):
    h = hashlib.sha256()
    for n in table.names:
        c = table.column(n)
        h.update(n.encode())
        h.update(np.ascontiguousarray(c.values).tobytes() if c.values.dtype != object else repr(c.values.tolist()).encode())
        h.update(c.missing.tobytes())
    h.update(np.asarray(y).tobytes())
    return h.hexdigest()


@pytest.fixture(scope="module")
def pima_xy(pima_exp):
    return pima_exp.X_train, pima_exp.y_train


class TestMakePipeline:
    def test_three_stage(self):
        p = pl.make_pipeline([("sc", StandardScaler()), ("pca", PCA(2)), ("clf", create_estimator("lr"))])
        assert p.ids == ["sc", "pca", "clf"] and p.has_estimator

    def test_single_estimator(self):
        assert pl.make_pipeline([("clf", create_estimator("lr"))]).has_estimator

    def test_estimator_not_last(self):
        with pytest.raises(InvalidOrder):
            pl.make_pipeline([("clf", create_estimator("lr")), ("sc", StandardScaler())])

    def test_duplicate(self):
        with pytest.raises(DuplicateStage):
            pl.make_pipeline([("a", StandardScaler()), ("a", PCA(1))])

    def test_empty(self):
        with pytest.raises(InvalidOrder):
            pl.make_pipeline([])


class TestFit:
    def test_scaler_pca_lr(self, pima_xy):
        X, y = pima_xy
        p = pl.make_pipeline([("sc", StandardScaler()), ("pca", PCA(2)), ("clf", create_estimator("lr"))])
        fp = pl.fit(p, X, y)
        pca_state = fp.fitted_states[1]
        assert pca_state.components.shape == (2, 8)
        assert fp.feature_names_out == ("pc0", "pc1")
        pred = fp.predict(X)
        assert pred.shape == (X.n_rows,) and set(np.unique(pred)) <= {0, 1}

    def test_input_unmodified(self, pima_xy):
        X, y = pima_xy
        before = _digest(X, y)
        pl.fit(pl.make_pipeline([("sc", StandardScaler()), ("clf", create_estimator("rf"))]), X, y)
        assert _digest(X, y) == before

    def test_empty_prefix_identity(self, pima_xy):
        X, y = pima_xy
        fp = pl.fit(pl.make_pipeline([("clf", create_estimator("lr"))]), X, y)
        direct = fit_model(create_estimator("lr"), X.to_matrix(), y)
        np.testing.assert_array_equal(fp.predict(X), direct.predict(X.to_matrix()))
        np.testing.assert_array_equal(fp.predict_proba(X), direct.predict_proba(X.to_matrix()))

    def test_scaler_only(self):
        t = Table.from_matrix(np.array([[1.0], [2.0], [3.0]]), ["a"])
        fp = pl.fit(pl.make_pipeline([("sc", StandardScaler())]), t, [0, 1, 0])
        z = fp.transform(t).to_matrix()[:, 0]
        assert abs(z.mean()) < 1e-12
        assert z.std() == pytest.approx(1.0, abs=1e-12)

    def test_stage_id_on_error(self):
        t = Table({"a": Column.numeric([1.0, np.nan], [False, True])})
        with pytest.raises(MissingValues) as ei:
            pl.fit(pl.make_pipeline([("sc", StandardScaler())]), t, [0, 1])
        assert ei.value.stage_id == "sc"
        assert "stage 'sc'" in str(ei.value)

    def test_row_mismatch(self):
        with pytest.raises(SchemaMismatch):
            pl.fit(pl.make_pipeline([("clf", create_estimator("lr"))]), Table.from_matrix(np.zeros((3, 1))), [0, 1])

    def test_chaining_associativity(self, pima_xy):
        X, y = pima_xy
        full = pl.fit(pl.make_pipeline([("sc", StandardScaler()), ("pca", PCA(3)),
                                        ("clf", create_estimator("lr"))]), X, y)
        _, Z = StandardScaler().fit_transform(X)
        tail = pl.fit(pl.make_pipeline([("pca", PCA(3)), ("clf", create_estimator("lr"))]), Z, y)
        np.testing.assert_array_equal(full.predict_proba(X), tail.predict_proba(Z))

    def test_fused_matches_separate(self, pima_xy):
        X, _ = pima_xy

        class Unfused:
            def __init__(self, inner):
                self.inner = inner

            def fit(self, t):
                return self.inner.fit(t)

        a = pl.fit_transform(PCA(2), X)[1]
        b = pl.fit_transform(Unfused(PCA(2)), X)[1]
        assert a.equals(b)


class TestTransformPredict:
    def test_transform_matches_fit_input(self, pima_xy):
        X, y = pima_xy
        fp = pl.fit(pl.make_pipeline([("sc", StandardScaler()), ("clf", create_estimator("lr"))]), X, y)
        np.testing.assert_array_equal(fp.transform(X).to_matrix(), StandardScaler().fit_transform(X)[1].to_matrix())

    def test_empty_transformer_list_identity(self, pima_xy):
        X, y = pima_xy
        fp = pl.fit(pl.make_pipeline([("clf", create_estimator("lr"))]), X, y)
        assert fp.transform(X).equals(X)

    def test_uses_train_statistics(self):
        train = Table.from_matrix(np.array([[0.0, 1.0], [2.0, 3.0]]), ["a", "b"])
        test = Table.from_matrix(np.array([[4.0, 5.0], [6.0, 9.0]]), ["a", "b"])
        fp = pl.fit(pl.make_pipeline([("sc", StandardScaler())]), train, [0, 1])
        z = fp.transform(test).to_matrix()
        np.testing.assert_allclose(z, [[3.0, 3.0], [5.0, 7.0]])
        assert np.all(z.mean(axis=0) != 0)

    def test_schema_mismatch(self, pima_xy):
        X, y = pima_xy
        fp = pl.fit(pl.make_pipeline([("sc", StandardScaler()), ("clf", create_estimator("lr"))]), X, y)
        with pytest.raises(SchemaMismatch):
            fp.predict(X.drop(X.names[0]))

    def test_no_estimator(self, pima_xy):
        X, y = pima_xy
        fp = pl.fit(pl.make_pipeline([("sc", StandardScaler())]), X, y)
        with pytest.raises(NotAnEstimator):
            fp.predict(X)

    def test_ridge_no_proba(self, pima_xy):
        X, y = pima_xy
        fp = pl.fit(pl.make_pipeline([("clf", create_estimator("ridge"))]), X, y)
        with pytest.raises(NoProbability):
            fp.predict_proba(X)

    def test_dummy_proba_is_rate(self, pima_xy):
        X, y = pima_xy
        fp = pl.fit(pl.make_pipeline([("clf", create_estimator("dummy"))]), X, y)
        np.testing.assert_array_equal(fp.predict_proba(X), np.full(X.n_rows, y.mean()))

    def test_separable_training_accuracy(self):
        X = np.vstack([np.zeros((10, 2)), np.full((10, 2), 10.0)])
        y = np.array([0] * 10 + [1] * 10)
        fp = pl.fit(pl.make_pipeline([("clf", create_estimator("lr"))]), Table.from_matrix(X), y)
        assert np.mean(fp.predict(Table.from_matrix(X)) == y) == 1.0

    @pytest.mark.parametrize("mid", ["lr", "ridge", "dt", "knn", "dummy"])
    def test_predict_shape_and_values(self, mid, pima_xy):
        X, y = pima_xy
        fp = pl.fit(pl.make_pipeline([("imp", MeanImputer()), ("clf", create_estimator(mid))]), X, y)
        pred = fp.predict(X)
        assert len(pred) == X.n_rows and set(np.unique(pred)) <= {0, 1}

    def test_from_model(self, pima):
        X, y = split_xy(pima, "Class variable")
        m = fit_model(create_estimator("lr"), X.to_matrix(), y)
        fp = pl.from_model(m, X.names)
        np.testing.assert_array_equal(fp.predict(X), m.predict(X.to_matrix()))
