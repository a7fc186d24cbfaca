import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autoflow.analysis import (
    ChartSpec,
    Series,
    csv_text,
    feature_importance,
    gain_curve,
    learning_curve,
    model_gain_curve,
    read_chart_csv,
    render_csv,
    render_svg,
    svg_text,
)
from autoflow.errors import EmptyChart, NoImportance, NoProbability
from autoflow.experiment import create_model
from autoflow.models import create_estimator, fit_model


class TestGain:
    def test_hand_trace(self):
        c = gain_curve([1, 0, 1, 0], [0.9, 0.8, 0.7, 0.1])
        assert c.series[0].points() == [(0.0, 0.0), (0.25, 0.5), (0.5, 0.5), (0.75, 1.0), (1.0, 1.0)]
        assert c.reference.points() == [(0.0, 0.0), (1.0, 1.0)]

    def test_perfect_ranking(self):
        y = [1, 1, 1] + [0] * 7
        c = gain_curve(y, np.linspace(1, 0, 10))
        pts = dict(c.series[0].points())
        assert pts[0.3] == 1.0
        assert all(v == 1.0 for x, v in pts.items() if x >= 0.3)

    def test_ties_keep_row_order(self):
        # constant scores: order is the row order
        c = gain_curve([0, 1, 0, 1], [0.5] * 4)
        assert c.series[0].y == (0.0, 0.0, 0.5, 0.5, 1.0)

    def test_no_scores(self):
        with pytest.raises(NoProbability):
            gain_curve([0, 1], None)

    def test_ridge_model(self, pima_exp):
        fp, _ = create_model(pima_exp, "ridge")
        with pytest.raises(NoProbability):
            model_gain_curve(fp, pima_exp.X_holdout, pima_exp.y_holdout)

    @settings(max_examples=100)
    @given(st.lists(st.tuples(st.integers(0, 1), st.floats(0, 1)), min_size=2, max_size=60)
           .filter(lambda v: 0 < sum(t for t, _ in v) < len(v)))
    def test_monotone_with_exact_endpoints(self, pairs):
        c = gain_curve([t for t, _ in pairs], [s for _, s in pairs])
        s = c.series[0]
        assert s.points()[0] == (0.0, 0.0) and s.points()[-1] == (1.0, 1.0)
        assert all(b >= a for a, b in zip(s.y, s.y[1:]))
        assert all(b > a for a, b in zip(s.x, s.x[1:]))


class TestLearning:
    def test_full_fraction_matches_create_model(self, pima_exp):
        c = learning_curve(pima_exp, "lr", fractions=[1.0])
        _, rep = create_model(pima_exp, "lr")
        assert c.get("validation").points() == [(537.0, rep.mean_row.accuracy)]

    def test_dt_memorizes(self, pima_exp):
        c = learning_curve(pima_exp, "dt", fractions=[0.3, 0.6, 1.0])
        assert c.get("training").y == (1.0, 1.0, 1.0)

    def test_default_fractions(self, pima_exp):
        c = learning_curve(pima_exp, "nb")
        assert len(c.get("validation").x) == 10
        assert c.get("validation").x[-1] == 537.0
        assert c.warnings == ()

    def test_tiny_fraction_skipped(self, pima_exp):
        c = learning_curve(pima_exp, "nb", fractions=[0.02, 1.0])
        assert len(c.get("validation").x) == 1
        assert len(c.warnings) == 1 and "0.02" in c.warnings[0]

    def test_bad_fraction(self, pima_exp):
        with pytest.raises(ValueError):
            learning_curve(pima_exp, "nb", fractions=[1.5])


class TestFeature:
    def test_lr_informative_feature_wins(self, rng):
        y = rng.integers(0, 2, size=200)
        X = np.column_stack([y.astype(float), rng.normal(size=200)])
        m = fit_model(create_estimator("lr"), X, y)
        c = feature_importance(m, ["signal", "noise"])
        assert c.categories == ("signal", "noise")
        assert c.series[0].y[0] > c.series[0].y[1]

    @pytest.mark.parametrize("mid", ["dummy", "knn", "nb", "qda"])
    def test_no_importance(self, mid, rng):
        X = rng.normal(size=(30, 2))
        m = fit_model(create_estimator(mid), X, np.arange(30) % 2)
        with pytest.raises(NoImportance, match="model has no feature importances"):
            feature_importance(m)

    @pytest.mark.parametrize("mid", ["dt", "rf", "et", "gbc", "ada"])
    def test_tree_importances_normalized(self, mid, pima_exp):
        fp, _ = create_model(pima_exp, mid)
        c = feature_importance(fp)
        y = np.array(c.series[0].y)
        assert np.all(y >= 0)
        assert abs(y.sum() - 1.0) < 1e-9
        assert np.all(np.diff(y) <= 0)
        assert set(c.categories) == set(pima_exp.X_train.names)

    @pytest.mark.parametrize("mid", ["lr", "ridge", "lda", "svm"])
    def test_linear_models(self, mid, pima_exp):
        fp, _ = create_model(pima_exp, mid)
        c = feature_importance(fp)
        assert len(c.categories) == 8 and np.all(np.diff(c.series[0].y) <= 0)


def _chart():
    return ChartSpec("learning", (Series("training", (1, 2, 3), (0.9, 0.8, 0.85)),
                                  Series("validation", (1, 2, 3), (0.5, 0.6, 0.7))),
                     "rows", "accuracy", title="t <&> t")


class TestRender:
    def test_svg_deterministic(self, tmp_path):
        render_svg(_chart(), tmp_path / "a.svg")
        render_svg(_chart(), tmp_path / "b.svg")
        a = (tmp_path / "a.svg").read_bytes()
        assert a == (tmp_path / "b.svg").read_bytes()
        assert a.startswith(b"<?xml") and b'viewBox="0 0 640 480"' in a
        assert b"t &lt;&amp;&gt; t" in a

    def test_svg_parses(self):
        import xml.etree.ElementTree as ET

        for chart in (_chart(), gain_curve([1, 0, 1, 0], [0.9, 0.8, 0.7, 0.1]),
                      ChartSpec("feature", (Series("importance", (0, 1), (0.7, 0.3)),), "f", "i",
                                categories=("a", "b"))):
            root = ET.fromstring(svg_text(chart))
            assert root.tag.endswith("svg")

    def test_csv_roundtrip(self, tmp_path):
        c = gain_curve([1, 0, 0, 1, 0], [0.3, 0.1, 0.7, 0.71, 0.2])
        render_csv(c, tmp_path / "g.csv")
        back = read_chart_csv((tmp_path / "g.csv").read_text())
        assert back == {"model": c.series[0].points()}

    def test_csv_header(self):
        assert csv_text(_chart()).splitlines()[0] == "series,x,y"

    def test_empty(self, tmp_path):
        empty = ChartSpec("gain", (Series("model", (), ()),), "x", "y")
        with pytest.raises(EmptyChart):
            render_svg(empty, tmp_path / "e.svg")
        with pytest.raises(EmptyChart):
            render_csv(ChartSpec("gain", (), "x", "y"), tmp_path / "e.csv")

    def test_io_error_names_path(self, tmp_path):
        with pytest.raises(OSError, match="nodir"):
            render_svg(_chart(), tmp_path / "nodir" / "x.svg")

    def test_series_validation(self):
        with pytest.raises(ValueError):
            Series("s", (2, 1), (0, 0))
        with pytest.raises(ValueError):
            Series("s", (1,), (float("nan"),))
