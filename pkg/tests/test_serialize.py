import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autoflow import pipeline as pl
from autoflow.errors import MissingValues, NotAModelFile, SchemaMismatch, UnsupportedVersion
from autoflow.experiment import create_model
from autoflow.models import MODEL_IDS, create_estimator, fit_model
from autoflow.preprocess import PCA, MeanImputer, StandardScaler
from autoflow.serialize import MAGIC, decode_value, dumps, encode_value, load_model, loads, read_model_file, save_model
from autoflow.tabular import Column, Table


@pytest.fixture(scope="module")
def lr_pipeline(pima_exp):
    return create_model(pima_exp, "lr")[0]


values = st.recursive(
    st.one_of(st.none(), st.booleans(), st.integers(-2**63, 2**63 - 1), st.floats(allow_nan=False),
              st.text(max_size=10)),
    lambda inner: st.one_of(st.lists(inner, max_size=4), st.dictionaries(st.text(max_size=5), inner, max_size=4)),
    max_leaves=12)


class TestCodec:
    @given(values)
    def test_roundtrip(self, v):
        assert decode_value(encode_value(v)) == v

    @given(st.lists(st.floats(allow_nan=True, allow_infinity=True), max_size=20))
    def test_float_bits_preserved(self, xs):
        a = np.array(xs, dtype=np.float64)
        b = decode_value(encode_value(a))
        assert a.tobytes() == b.tobytes()

    def test_arrays(self):
        for a in (np.arange(6).reshape(2, 3), np.array([True, False]), np.zeros((0, 4))):
            b = decode_value(encode_value(a))
            assert b.shape == a.shape and np.array_equal(a, b)

    def test_trailing_bytes(self):
        with pytest.raises(NotAModelFile):
            decode_value(encode_value(1) + b"x")


class TestFormat:
    def test_header(self, lr_pipeline):
        data = dumps(lr_pipeline)
        assert data[:4] == MAGIC
        assert struct.unpack("<HB", data[4:7]) == (1, 0)
        assert dumps(lr_pipeline, model_only=True)[6] == 1

    def test_deterministic_bytes(self, lr_pipeline):
        assert dumps(lr_pipeline, config={"a": 1}) == dumps(lr_pipeline, config={"a": 1})

    def test_config_roundtrip(self, lr_pipeline, tmp_path):
        save_model(lr_pipeline, tmp_path / "m.afpl", config={"target": "Class variable", "session_id": 123})
        _, model_only, cfg = read_model_file(tmp_path / "m.afpl")
        assert not model_only and cfg == {"target": "Class variable", "session_id": 123}


class TestRoundtrip:
    @pytest.mark.parametrize("mid", MODEL_IDS)
    def test_bit_identical(self, mid, pima_exp, tmp_path):
        fp = pl.fit(pima_exp.pipeline_for(create_estimator(mid)), pima_exp.X_train, pima_exp.y_train, 123)
        save_model(fp, tmp_path / "m.afpl")
        back = load_model(tmp_path / "m.afpl")
        X = pima_exp.X_holdout
        np.testing.assert_array_equal(back.predict(X), fp.predict(X))
        if fp.estimator.supports_proba:
            assert back.predict_proba(X).tobytes() == fp.predict_proba(X).tobytes()
        assert back.estimator.decision_function(fp.transform(X).to_matrix()).tobytes() == \
            fp.estimator.decision_function(fp.transform(X).to_matrix()).tobytes()

    def test_scaler_pca_pipeline(self, pima_exp):
        p = pl.make_pipeline([("sc", StandardScaler()), ("pca", PCA(2)), ("clf", create_estimator("lr"))])
        fp = pl.fit(p, pima_exp.X_train, pima_exp.y_train)
        back, _, _ = loads(dumps(fp))
        assert back.pipeline.ids == ["sc", "pca", "clf"]
        assert back.predict_proba(pima_exp.X_holdout).tobytes() == fp.predict_proba(pima_exp.X_holdout).tobytes()

    def test_bare_model(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        m = fit_model(create_estimator("lr"), X, [0, 0, 1, 1])
        back, model_only, _ = loads(dumps(m))
        assert model_only
        np.testing.assert_array_equal(back.predict(Table.from_matrix(X)), m.predict(X))

    def test_schema_checked(self, lr_pipeline, pima_exp):
        back = loads(dumps(lr_pipeline))[0]
        with pytest.raises(SchemaMismatch):
            back.predict(pima_exp.X_holdout.drop(pima_exp.X_holdout.names[0]))

    def test_model_only_rejects_missing_cells(self, pima_exp):
        p = pl.make_pipeline([("imp", MeanImputer()), ("clf", create_estimator("lr"))])
        fp = pl.fit(p, pima_exp.X_train, pima_exp.y_train)
        probe_cols = pima_exp.X_holdout.take([0]).columns()
        first = pima_exp.X_holdout.names[0]
        probe_cols[first] = Column.numeric([np.nan], [True])
        probe = Table(probe_cols)
        full = loads(dumps(fp))[0]
        assert full.predict(probe).shape == (1,)
        bare = loads(dumps(fp, model_only=True))[0]
        with pytest.raises(MissingValues):
            bare.predict(probe)


class TestCorruption:
    def test_bad_magic(self, lr_pipeline):
        with pytest.raises(NotAModelFile):
            loads(b"NOPE" + dumps(lr_pipeline)[4:])

    def test_version(self, lr_pipeline):
        data = bytearray(dumps(lr_pipeline))
        data[4:6] = struct.pack("<H", 99)
        with pytest.raises(UnsupportedVersion):
            loads(bytes(data))

    def test_every_truncation(self, lr_pipeline):
        data = dumps(lr_pipeline)
        for cut in range(0, len(data), 7):
            with pytest.raises((NotAModelFile, UnsupportedVersion)):
                loads(data[:cut])

    @settings(max_examples=150, deadline=None)
    @given(st.data())
    def test_random_byte_flips(self, lr_pipeline, data):
        raw = bytearray(dumps(lr_pipeline))
        pos = data.draw(st.integers(0, len(raw) - 1))
        raw[pos] ^= data.draw(st.integers(1, 255))
        try:
            fp, _, _ = loads(bytes(raw))
        except (NotAModelFile, UnsupportedVersion):
            return
        # a flip inside float payload can still load; it must then be a usable pipeline
        assert fp.pipeline.ids

    def test_empty_and_garbage_files(self, tmp_path):
        for i, blob in enumerate((b"", b"AFPL", b"\x00" * 50, MAGIC + b"\x01\x00\x00garbage")):
            p = tmp_path / f"{i}.afpl"
            p.write_bytes(blob)
            with pytest.raises((NotAModelFile, UnsupportedVersion)):
                load_model(p)
