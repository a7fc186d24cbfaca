import dataclasses

import numpy as np
import pytest

from autoflow.errors import NothingToCompare, UnknownModel
from autoflow.experiment import (
    ExperimentConfig,
    compare_models,
    create_model,
    predict_model,
    setup,
    sort_rows,
    tune_model,
)
from autoflow.metrics import MetricRow
from autoflow.models import MODEL_IDS, MODEL_NAMES
from autoflow.tabular import Column, Table

from .conftest import PIMA_TARGET


@pytest.fixture(scope="module")
def pima_compare(pima_exp):
    return compare_models(pima_exp)


def _table(X, y, names=("a", "b")):
    cols = {n: Column.numeric(X[:, j]) for j, n in enumerate(names)}
    cols["y"] = Column.numeric(np.asarray(y, dtype=float))
    return Table(cols)


def _clusters(seed=0):
    r = np.random.default_rng(seed)
    X = np.vstack([r.normal(cx, 0.3, size=(n, 2)) for cx, n in ((0, 8), (5, 30), (10, 8))])
    y = [1] * 8 + [0] * 30 + [1] * 8
    return _table(X, y)


class TestSetup:
    def test_pima_report(self, pima_report):
        rows = dict(pima_report)
        assert rows["Session id"] == "123"
        assert rows["Target"] == PIMA_TARGET
        assert rows["Target type"] == "Binary"
        assert rows["Target mapping"] == "0: 0, 1: 1"
        assert rows["Original data shape"] == "(768, 9)"
        assert rows["Transformed data shape"] == "(768, 9)"
        assert rows["Transformed train set shape"] == "(537, 9)"
        assert rows["Transformed test set shape"] == "(231, 9)"
        assert rows["Numeric features"] == "8"
        assert rows["Fold Generator"] == "StratifiedKFold"
        assert rows["Fold Number"] == "10"
        assert rows["Numeric imputation"] == "mean"
        assert rows["Categorical imputation"] == "mode"
        assert rows["Preprocess"] == "True"
        assert rows["Use GPU"] == "False (not supported)"
        assert len(rows["USI"]) == 4

    def test_pima_split(self, pima_exp):
        assert pima_exp.X_train.n_rows == 537 and pima_exp.X_holdout.n_rows == 231
        assert len(np.intersect1d(pima_exp.train_idx, pima_exp.holdout_idx)) == 0
        assert pima_exp.fold_plan.n_rows == 537

    def test_small_split(self):
        # per-class floor: 4 + 6 rows at 0.5 -> 2 + 3 train
        y = [0] * 4 + [1] * 6
        exp, _ = setup(_table(np.arange(20.0).reshape(10, 2), y), ExperimentConfig("y", train_size=0.5,
                                                                                   fold_number=2))
        assert exp.X_train.n_rows == 5 and exp.X_holdout.n_rows == 5
        assert int(exp.y_train.sum()) == 3

    def test_deterministic(self, pima):
        a, _ = setup(pima, ExperimentConfig(PIMA_TARGET))
        b, _ = setup(pima, ExperimentConfig(PIMA_TARGET))
        np.testing.assert_array_equal(a.train_idx, b.train_idx)
        np.testing.assert_array_equal(a.fold_plan.assignments, b.fold_plan.assignments)

    def test_session_changes_split(self, pima):
        a, _ = setup(pima, ExperimentConfig(PIMA_TARGET, session_id=1))
        b, _ = setup(pima, ExperimentConfig(PIMA_TARGET, session_id=2))
        assert not np.array_equal(a.train_idx, b.train_idx)

    def test_missing_values_reported(self):
        t = Table({"a": Column.numeric([1.0, np.nan, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], [False, True] + [False] * 6),
                   "c": Column.categorical(["u", "v", "u", "v", "u", "v", "u", "u"]),
                   "y": Column.numeric([0.0, 1.0] * 4)})
        exp, report = setup(t, ExperimentConfig("y", train_size=0.5, fold_number=2))
        rows = dict(report)
        assert rows["Categorical features"] == "1"
        assert rows["Rows with missing values"] == "12.5%"
        assert rows["Transformed data shape"] == "(8, 4)"


class TestCompare:
    def test_pima_leaderboard(self, pima_compare):
        best, board = pima_compare
        assert set(board.ids()) == set(MODEL_IDS)
        assert board.selected == (board.ids()[0],)
        lr = board.row("lr")
        assert abs(lr.accuracy - 0.7689) <= 0.03
        assert abs(board.row("ridge").accuracy - 0.7670) <= 0.03
        assert abs(board.row("lda").accuracy - 0.7670) <= 0.03
        assert abs(board.row("dummy").accuracy - 0.6510) <= 0.01
        assert len(best) == 1 and best[0].model_id == board.selected[0]

    def test_sorted_total_order(self, pima_compare):
        _, board = pima_compare
        keys = [(-r.accuracy, mid) for mid, r in board.rows]
        assert keys == sorted(keys)

    def test_text_has_model_names(self, pima_compare):
        text = pima_compare[1].render_text()
        for name in MODEL_NAMES.values():
            assert name in text

    def test_include_single(self, pima_exp):
        best, board = compare_models(pima_exp, include=["dummy"])
        assert board.ids() == ["dummy"] and best[0].model_id == "dummy"

    def test_sort_auc(self, pima_exp):
        _, board = compare_models(pima_exp, sort="auc", include=["lr", "ridge", "svm", "dummy", "nb"])
        assert board.ids()[-2:] == ["ridge", "svm"]

    def test_n_select_prefix(self, pima_exp):
        best, board = compare_models(pima_exp, n_select=3, include=["lr", "nb", "dummy", "knn"])
        assert board.selected == tuple(board.ids()[:3])
        assert [fp.model_id for fp in best] == list(board.selected)

    def test_empty(self, pima_exp):
        with pytest.raises(NothingToCompare):
            compare_models(pima_exp, include=[])
        with pytest.raises(NothingToCompare):
            compare_models(pima_exp, exclude=list(MODEL_IDS))

    def test_overlap_rejected(self, pima_exp):
        with pytest.raises(ValueError):
            compare_models(pima_exp, include=["lr"], exclude=["lr"])

    def test_unknown(self, pima_exp):
        with pytest.raises(UnknownModel):
            compare_models(pima_exp, include=["xgboost"])

    def test_sort_rows_tiebreak(self):
        row = MetricRow(0.5, 0.5, 0, 0, 0, 0, 0)
        assert [m for m, _ in sort_rows([("nb", row), ("dt", row), ("lr", row)], "accuracy")] == ["dt", "lr", "nb"]

    def test_csv_deterministic(self, pima_exp, pima_compare):
        _, again = compare_models(pima_exp)
        assert again.to_csv() == pima_compare[1].to_csv()
        assert "TT" not in again.to_csv()


class TestCreate:
    def test_pima_lr(self, pima_exp):
        fp, rep = create_model(pima_exp, "lr")
        assert rep.k == 10 and len(rep.rows()) == 12
        assert 0.74 <= rep.mean_row.accuracy <= 0.80
        assert fp.model_id == "lr"

    def test_matches_leaderboard(self, pima_exp, pima_compare):
        _, rep = create_model(pima_exp, "lda")
        assert rep.mean_row.accuracy == pima_compare[1].row("lda").accuracy

    def test_separable_dt(self):
        X = np.vstack([np.zeros((10, 2)), np.ones((10, 2))]) + np.arange(20)[:, None] * 1e-3
        exp, _ = setup(_table(X, [0] * 10 + [1] * 10), ExperimentConfig("y", fold_number=3))
        _, rep = create_model(exp, "dt")
        assert all(r.accuracy == 1.0 for r in rep.fold_rows)

    def test_unknown(self, pima_exp):
        with pytest.raises(UnknownModel):
            create_model(pima_exp, "xgboost")


class TestTune:
    def test_single_point_grid(self, pima_exp):
        _, _, params = tune_model(pima_exp, "lr", grid={"C": [1.0]})
        assert params == {"C": 1.0}

    def test_not_worse_than_default(self, pima_exp):
        _, tuned, params = tune_model(pima_exp, "knn", n_iter=5)
        _, default = create_model(pima_exp, "knn")
        assert tuned.mean_row.accuracy >= default.mean_row.accuracy

    def test_knn_picks_three(self):
        exp, _ = setup(_clusters(), ExperimentConfig("y", fold_number=3))
        scores = {k: create_model(exp, "knn", {"n_neighbors": k})[1].mean_row.accuracy for k in (3, 5, 7, 9, 11)}
        assert scores[3] > scores[11]
        assert max(scores, key=lambda k: (scores[k], -k)) == 3
        _, _, params = tune_model(exp, "knn", n_iter=5)
        assert params == {"n_neighbors": 3}

    def test_seeded(self, pima_exp):
        a = tune_model(pima_exp, "dt", n_iter=3, seed=4)[2]
        b = tune_model(pima_exp, "dt", n_iter=3, seed=4)[2]
        assert a == b


class TestPredict:
    def test_dummy_holdout(self, pima_exp):
        fp, _ = create_model(pima_exp, "dummy")
        pred, row = predict_model(pima_exp, fp)
        assert len(pred.labels) == 231
        assert row.accuracy == 150 / 231

    def test_memorized_copy(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] * 3)
        exp, _ = setup(_table(X, [0, 1, 1, 0] * 3), ExperimentConfig("y", fold_number=2, train_size=0.5))
        exp = dataclasses.replace(exp, X_holdout=exp.X_train, y_holdout=exp.y_train)
        fp, _ = create_model(exp, "dt")
        assert predict_model(exp, fp)[1].accuracy == 1.0

    def test_holdout_never_leaks(self, pima, pima_exp):
        # perturb every holdout feature cell; all fitted state must stay identical
        cols = pima.columns()
        hold = pima_exp.holdout_idx
        for name in pima.names[:-1]:
            v = cols[name].values.copy()
            v[hold] = v[hold] * 3.0 + 17.0
            cols[name] = Column.numeric(v)
        poisoned, _ = setup(Table(cols), ExperimentConfig(PIMA_TARGET))
        np.testing.assert_array_equal(poisoned.train_idx, pima_exp.train_idx)
        a, ra = create_model(pima_exp, "lr")
        b, rb = create_model(poisoned, "lr")
        np.testing.assert_array_equal(a.estimator.params["coef"], b.estimator.params["coef"])
        assert [r.accuracy for r in ra.fold_rows] == [r.accuracy for r in rb.fold_rows]
        assert a.fitted_states[0].means == b.fitted_states[0].means
