"""Bundled datasets.

``diabetes`` is the Pima Indians diabetes table (768 rows, 8 numeric
features and the binary target ``"Class variable"``).
"""

from pathlib import Path

from ..tabular import read_csv

_HERE = Path(__file__).resolve().parent
DATASETS = {"diabetes": "diabetes.csv"}
TARGETS = {"diabetes": "Class variable"}


def dataset_path(name):
    try:
        return _HERE / DATASETS[name]
    except KeyError:
        raise KeyError(f"no bundled dataset {name!r}; available: {', '.join(DATASETS)}") from None


def get_data(name="diabetes"):
    """Load a bundled dataset as a :class:`~autoflow.tabular.Table`."""
    return read_csv(dataset_path(name))
