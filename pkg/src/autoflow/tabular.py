"""Column-typed tables, CSV ingestion and target extraction.

A :class:`Table` is an immutable, ordered set of named columns. Each column is
either numeric (float64) or categorical (str), and carries an explicit boolean
``missing`` mask. The mask is authoritative: the value stored under a missing
cell is a placeholder (NaN for numeric, ``None`` for categorical) and must not
be read.
"""

import csv
import enum
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInput,
    MissingTarget,
    MissingValues,
    NeedsEncoding,
    NotBinary,
    ParseError,
    SchemaMismatch,
    UnknownColumn,
)

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class ColumnKind(str, enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


NUMERIC = ColumnKind.NUMERIC
CATEGORICAL = ColumnKind.CATEGORICAL


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Column:
    kind: ColumnKind
    values: np.ndarray
    missing: np.ndarray

    @classmethod
    def numeric(cls, values, missing=None):
        values = np.array(values, dtype=np.float64)
        if missing is None:
            missing = np.isnan(values)
        missing = np.asarray(missing, dtype=bool)
        values = np.where(missing, np.nan, values)
        return cls(NUMERIC, _frozen(values), _frozen(missing.copy()))

    @classmethod
    def categorical(cls, values, missing=None):
        values = list(values)
        if missing is None:
            missing = [v is None for v in values]
        missing = np.asarray(missing, dtype=bool)
        out = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            out[i] = None if missing[i] else str(v)
        return cls(CATEGORICAL, _frozen(out), _frozen(missing.copy()))

    def __len__(self):
        return len(self.values)

    @property
    def n_missing(self):
        return int(self.missing.sum())

    def take(self, idx):
        return Column(self.kind, _frozen(self.values[idx]), _frozen(self.missing[idx]))

    def present(self):
        """Non-missing values."""
        return self.values[~self.missing]

    def equals(self, other):
        if self.kind != other.kind or len(self) != len(other):
            return False
        if not np.array_equal(self.missing, other.missing):
            return False
        keep = ~self.missing
        if self.kind is NUMERIC:
            return bool(np.array_equal(self.values[keep], other.values[keep]))
        return list(self.values[keep]) == list(other.values[keep])


class Table:
    """Immutable ordered mapping of column name to :class:`Column`."""

    def __init__(self, columns, n_rows=None):
        columns = dict(columns)
        lengths = {len(c) for c in columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have differing lengths {sorted(lengths)}")
        if lengths:
            n = lengths.pop()
            if n_rows is not None and n_rows != n:
                raise ValueError(f"n_rows={n_rows} but columns have length {n}")
            n_rows = n
        self._columns = columns
        self._n_rows = int(n_rows or 0)

    @classmethod
    def from_dict(cls, data):
        """Build a table from plain Python sequences, inferring each column kind.

        ``None`` (or NaN in a numeric column) marks a missing cell. A column is
        numeric when every present value is a real number.
        """
        cols = {}
        for name, values in data.items():
            values = list(values)
            present = [v for v in values if v is not None]
            if all(isinstance(v, (int, float, np.integer, np.floating))
                   and not isinstance(v, bool) for v in present):
                arr = np.array([np.nan if v is None else float(v) for v in values])
                cols[name] = Column.numeric(arr)
            else:
                cols[name] = Column.categorical(values)
        return cls(cols)

    @classmethod
    def from_matrix(cls, X, names=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("expected a 2-D matrix")
        if names is None:
            names = [f"x{j}" for j in range(X.shape[1])]
        if len(names) != X.shape[1]:
            raise ValueError("names length does not match matrix width")
        return cls({n: Column.numeric(X[:, j]) for j, n in enumerate(names)}, n_rows=X.shape[0])

    @property
    def n_rows(self):
        return self._n_rows

    @property
    def names(self):
        return list(self._columns)

    @property
    def schema(self):
        return tuple((n, c.kind) for n, c in self._columns.items())

    @property
    def shape(self):
        return (self._n_rows, len(self._columns))

    def __contains__(self, name):
        return name in self._columns

    def __len__(self):
        return self._n_rows

    def __repr__(self):
        return f"Table(shape={self.shape}, columns={self.names!r})"

    def column(self, name):
        try:
            return self._columns[name]
        except KeyError:
            raise UnknownColumn(f"no column named {name!r}") from None

    def columns(self):
        return dict(self._columns)

    def numeric_names(self):
        return [n for n, c in self._columns.items() if c.kind is NUMERIC]

    def categorical_names(self):
        return [n for n, c in self._columns.items() if c.kind is CATEGORICAL]

    def select(self, names):
        return Table({n: self.column(n) for n in names}, n_rows=self._n_rows)

    def drop(self, name):
        self.column(name)
        return Table({n: c for n, c in self._columns.items() if n != name}, n_rows=self._n_rows)

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.intp)
        return Table({n: c.take(idx) for n, c in self._columns.items()}, n_rows=len(idx))

    def has_missing(self):
        return any(c.missing.any() for c in self._columns.values())

    def to_matrix(self):
        """Dense float64 matrix; every column must be numeric and complete."""
        cats = self.categorical_names()
        if cats:
            raise NeedsEncoding(f"categorical columns must be encoded first: {cats}")
        for n, c in self._columns.items():
            if c.missing.any():
                raise MissingValues(f"column {n!r} has {c.n_missing} missing values")
        if not self._columns:
            return np.empty((self._n_rows, 0))
        return np.column_stack([c.values for c in self._columns.values()]).astype(np.float64)

    def equals(self, other):
        return (self.schema == other.schema and self.n_rows == other.n_rows
                and all(c.equals(other.column(n)) for n, c in self._columns.items()))

    def check_schema(self, expected):
        """Raise :class:`SchemaMismatch` unless this table's schema is ``expected``."""
        expected = tuple((n, ColumnKind(k)) for n, k in expected)
        if self.schema != expected:
            raise SchemaMismatch(
                f"table schema {[(n, k.value) for n, k in self.schema]} does not match "
                f"fitted schema {[(n, k.value) for n, k in expected]}")


def _is_number(field):
    return _NUMBER.match(field.strip()) is not None


def read_csv(path, header=True):
    """Read a CSV file into a :class:`Table`.

    A column is numeric iff every non-empty field parses as a decimal number
    (integer, decimal, or scientific notation with a dot separator). Empty
    fields become missing cells. Without a header, columns are named
    ``c0, c1, ...``.
    """
    with open(path, newline="", encoding="utf-8-sig") as f:
        rows = list(csv.reader(f))
    return parse_rows(rows, header=header)


def parse_rows(rows, header=True):
    rows = list(rows)
    while rows and rows[-1] == []:
        rows.pop()
    # a blank line is an empty field in a one-column file, noise otherwise
    width = len(rows[0]) if rows else 0
    rows = [[""] if r == [] and width == 1 else r for r in rows if r != [] or width == 1]
    if not rows:
        raise EmptyInput("no rows in input")
    if header:
        names, body = rows[0], rows[1:]
        if len(set(names)) != len(names):
            raise ParseError("duplicate column names in header", row=None)
    else:
        names, body = [f"c{j}" for j in range(len(rows[0]))], rows
    width = len(names)
    for i, r in enumerate(body):
        if len(r) != width:
            raise ParseError(f"expected {width} fields, found {len(r)}", row=i)
    cols = {}
    for j, name in enumerate(names):
        fields = [r[j] for r in body]
        missing = np.array([f == "" for f in fields], dtype=bool)
        if all(m or _is_number(f) for f, m in zip(fields, missing)):
            vals = np.array([np.nan if m else float(f) for f, m in zip(fields, missing)])
            cols[name] = Column.numeric(vals, missing)
        else:
            cols[name] = Column.categorical(fields, missing)
    return Table(cols, n_rows=len(body))


def _format_number(v):
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def write_csv(table, path):
    cols = table.columns()
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(table.names)
        for i in range(table.n_rows):
            row = []
            for c in cols.values():
                if c.missing[i]:
                    row.append("")
                elif c.kind is NUMERIC:
                    row.append(_format_number(c.values[i]))
                else:
                    row.append(c.values[i])
            w.writerow(row)


@dataclass(frozen=True)
class TargetSpec:
    """Binary target: the column to predict and which value counts as positive.

    When ``positive_label`` is None, the greater of the two observed labels is
    positive (numeric order for numeric columns, lexicographic otherwise), so
    Pima's ``1`` means diabetic.
    """

    column: str
    positive_label: object = None


def target_labels(table, target):
    """Return ``(negative_label, positive_label)`` for a binary target column."""
    col = table.column(target.column)
    if col.missing.any():
        raise MissingTarget(f"target {target.column!r} has {col.n_missing} missing labels")
    distinct = sorted(set(col.values.tolist()))
    if len(distinct) > 2:
        raise NotBinary(f"target {target.column!r} has {len(distinct)} distinct values")
    pos = target.positive_label
    if pos is not None:
        pos = float(pos) if col.kind is NUMERIC else str(pos)
        others = [v for v in distinct if v != pos]
        if pos not in distinct and len(distinct) == 2:
            raise NotBinary(f"positive label {pos!r} not among {distinct}")
        neg = others[0] if others else None
        return neg, pos
    if len(distinct) == 1:
        return None, distinct[0]
    return distinct[0], distinct[1]


def split_xy(table, target):
    """Separate the feature table from the 0/1 label vector."""
    if isinstance(target, str):
        target = TargetSpec(target)
    _, pos = target_labels(table, target)
    col = table.column(target.column)
    labels = np.array([v == pos for v in col.values.tolist()], dtype=np.int64)
    return table.drop(target.column), labels
