"""Versioned binary format for fitted pipelines.

Layout (all integers little-endian)::

    "AFPL"  u16 version  u8 flags (bit 0: model_only)
    section*:  u16 name_len  name  u64 payload_len  payload

Sections are ``config``, ``schema`` and ``stages``; each payload is one value
in a small self-describing encoding (one tag byte per value):

    N none | T true | F false | i int64 | f float64 | s u32 len + utf-8
    l u32 count + values | d u32 count + (string, value) pairs
    a ndarray: dtype byte (f/i/b), u8 ndim, u64 dims, raw little-endian data

Floats are stored as raw IEEE-754 bits, so a reloaded model predicts
bit-identically. Nothing is pickled.
"""

import io
import struct

import numpy as np

from .errors import AutoflowError, NotAModelFile, UnsupportedVersion
from .models import Estimator, FittedModel
from .pipeline import FittedPipeline, make_pipeline
from .preprocess import PCA, TRANSFORM_TYPES, MeanImputer, ModeImputer, OneHotEncoder, StandardScaler
from .tabular import ColumnKind

MAGIC = b"AFPL"
FORMAT_VERSION = 1
FLAG_MODEL_ONLY = 1

_DTYPES = {"f": np.dtype("<f8"), "i": np.dtype("<i8"), "b": np.dtype("?")}


# ---------------------------------------------------------------- value codec


def _encode(v, out):
    if v is None:
        out.write(b"N")
    elif isinstance(v, (bool, np.bool_)):
        out.write(b"T" if v else b"F")
    elif isinstance(v, (int, np.integer)):
        out.write(b"i" + struct.pack("<q", int(v)))
    elif isinstance(v, (float, np.floating)):
        out.write(b"f" + struct.pack("<d", float(v)))
    elif isinstance(v, str):
        b = v.encode("utf-8")
        out.write(b"s" + struct.pack("<I", len(b)) + b)
    elif isinstance(v, np.ndarray):
        if v.dtype.kind == "f":
            code = "f"
        elif v.dtype.kind in "iu":
            code = "i"
        elif v.dtype.kind == "b":
            code = "b"
        else:
            _encode(v.tolist(), out)
            return
        a = np.ascontiguousarray(v, dtype=_DTYPES[code])
        out.write(b"a" + code.encode() + struct.pack("<B", a.ndim))
        out.write(struct.pack(f"<{a.ndim}Q", *a.shape))
        out.write(a.tobytes())
    elif isinstance(v, (list, tuple)):
        out.write(b"l" + struct.pack("<I", len(v)))
        for item in v:
            _encode(item, out)
    elif isinstance(v, dict):
        out.write(b"d" + struct.pack("<I", len(v)))
        for k, item in v.items():
            if not isinstance(k, str):
                raise TypeError(f"dict keys must be strings, got {k!r}")
            _encode(k, out)
            _encode(item, out)
    else:
        raise TypeError(f"cannot serialize {type(v).__name__}")


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if n < 0 or self.pos + n > len(self.data):
            raise NotAModelFile("unexpected end of data")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def value(self):
        tag = self.take(1)
        if tag == b"N":
            return None
        if tag == b"T":
            return True
        if tag == b"F":
            return False
        if tag == b"i":
            return self.unpack("<q")[0]
        if tag == b"f":
            return self.unpack("<d")[0]
        if tag == b"s":
            (n,) = self.unpack("<I")
            return self.take(n).decode("utf-8")
        if tag == b"l":
            (n,) = self.unpack("<I")
            return [self.value() for _ in range(n)]
        if tag == b"d":
            (n,) = self.unpack("<I")
            out = {}
            for _ in range(n):
                k = self.value()
                if not isinstance(k, str):
                    raise NotAModelFile("non-string dict key")
                out[k] = self.value()
            return out
        if tag == b"a":
            code = self.take(1).decode("ascii")
            if code not in _DTYPES:
                raise NotAModelFile(f"unknown array dtype {code!r}")
            (ndim,) = self.unpack("<B")
            shape = self.unpack(f"<{ndim}Q")
            dt = _DTYPES[code]
            count = int(np.prod(shape)) if ndim else 1
            raw = self.take(count * dt.itemsize)
            return np.frombuffer(raw, dtype=dt).reshape(shape).astype(dt.newbyteorder("="))
        raise NotAModelFile(f"unknown value tag {tag!r}")


def encode_value(v):
    buf = io.BytesIO()
    _encode(v, buf)
    return buf.getvalue()


def decode_value(data):
    r = _Reader(data)
    v = r.value()
    if r.pos != len(data):
        raise NotAModelFile("trailing bytes after value")
    return v


# ---------------------------------------------------------------- stages


def _unfitted(tag, state):
    if tag == "pca":
        return PCA(len(state["components"]))
    return {"mean_impute": MeanImputer, "mode_impute": ModeImputer, "one_hot": OneHotEncoder,
            "standard_scaler": StandardScaler}[tag]()


def _model_state(m):
    return {"model_id": m.model_id, "hyperparams": dict(m.hyperparams), "params": dict(m.params),
            "n_features_in": m.n_features_in}


def _model_from_state(s):
    return FittedModel(s["model_id"], dict(s["hyperparams"]), dict(s["params"]),
                       int(s["n_features_in"]), 0.0)


def dumps(fp, model_only=False, config=None):
    """Serialize a :class:`FittedPipeline` (or bare :class:`FittedModel`) to bytes."""
    if isinstance(fp, FittedModel):
        model_only = True
        names = [f"x{j}" for j in range(fp.n_features_in)]
        stages = [{"id": "model", "type": "model", "state": _model_state(fp)}]
        schema = {"features": [[n, "numeric"] for n in names], "names_out": names}
    elif model_only:
        if fp.estimator is None:
            raise AutoflowError("model_only save needs a pipeline ending in an estimator")
        names = list(fp.feature_names_out)
        stages = [{"id": fp.pipeline.ids[-1], "type": "model", "state": _model_state(fp.estimator)}]
        schema = {"features": [[n, "numeric"] for n in names], "names_out": names}
    else:
        stages = []
        for stage, state in zip(fp.pipeline.stages, fp.fitted_states):
            if isinstance(state, FittedModel):
                stages.append({"id": stage.id, "type": "model", "state": _model_state(state)})
            else:
                stages.append({"id": stage.id, "type": state.TAG, "state": state.get_state()})
        schema = {"features": [[n, k.value] for n, k in fp.feature_schema],
                  "names_out": list(fp.feature_names_out)}
    out = io.BytesIO()
    out.write(MAGIC + struct.pack("<HB", FORMAT_VERSION, FLAG_MODEL_ONLY if model_only else 0))
    for name, value in (("config", dict(config or {})), ("schema", schema), ("stages", stages)):
        payload = encode_value(value)
        nb = name.encode("ascii")
        out.write(struct.pack("<H", len(nb)) + nb + struct.pack("<Q", len(payload)) + payload)
    return out.getvalue()


def loads(data):
    """Parse bytes from :func:`dumps`. Returns ``(fitted_pipeline, model_only, config)``.

    Any malformed input raises :class:`NotAModelFile` or :class:`UnsupportedVersion`.
    """
    if len(data) < 4 or data[:4] != MAGIC:
        raise NotAModelFile("missing AFPL magic header")
    try:
        r = _Reader(data)
        r.take(4)
        version, flags = r.unpack("<HB")
        if version != FORMAT_VERSION:
            raise UnsupportedVersion(f"format version {version} (this build reads {FORMAT_VERSION})")
        sections = {}
        while r.pos < len(data):
            (nlen,) = r.unpack("<H")
            name = r.take(nlen).decode("ascii")
            (plen,) = r.unpack("<Q")
            sections[name] = decode_value(r.take(plen))
        for required in ("config", "schema", "stages"):
            if required not in sections:
                raise NotAModelFile(f"missing section {required!r}")
        fp = _rebuild(sections["schema"], sections["stages"])
        return fp, bool(flags & FLAG_MODEL_ONLY), sections["config"]
    except (NotAModelFile, UnsupportedVersion):
        raise
    except Exception as exc:  # corrupt payloads surface as one error type
        raise NotAModelFile(f"corrupt model file: {type(exc).__name__}: {exc}") from None


def _rebuild(schema, stages):
    steps, states = [], []
    for s in stages:
        if s["type"] == "model":
            model = _model_from_state(s["state"])
            steps.append((s["id"], Estimator(model.model_id, dict(model.hyperparams))))
            states.append(model)
        else:
            fitted = TRANSFORM_TYPES[s["type"]].from_state(s["state"])
            steps.append((s["id"], _unfitted(s["type"], s["state"])))
            states.append(fitted)
    feature_schema = tuple((n, ColumnKind(k)) for n, k in schema["features"])
    return FittedPipeline(make_pipeline(steps), tuple(states), feature_schema, tuple(schema["names_out"]))


def save_model(fp, path, model_only=False, config=None):
    """Write ``fp`` to ``path``.

    The default saves the whole flow (preprocessing and model); with
    ``model_only`` only the estimator is kept, which then expects
    already-preprocessed input.
    """
    data = dumps(fp, model_only=model_only, config=config)
    with open(path, "wb") as f:
        f.write(data)
    return path


def load_model(path):
    with open(path, "rb") as f:
        data = f.read()
    return loads(data)[0]


def read_model_file(path):
    """Like :func:`load_model` but also returns ``(model_only, config)``."""
    with open(path, "rb") as f:
        return loads(f.read())
