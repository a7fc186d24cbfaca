"""Backend selection for the tree-growing kernel.

The compiled extension ``autoflow._tree`` is used when it imports; otherwise,
or when ``AUTOFLOW_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the numpy implementation in ``autoflow._tree_py`` is used. Both produce
identical trees.
"""

import os

from . import _tree_py

GINI = _tree_py.GINI
MSE = _tree_py.MSE


def _load():
    if os.environ.get("AUTOFLOW_PURE_PYTHON", "") not in ("", "0"):
        return _tree_py, "python"
    try:
        from . import _tree
    except ImportError:
        return _tree_py, "python"
    return _tree, "cython"


_backend, BACKEND = _load()
grow_tree = _backend.grow_tree
apply_tree = _backend.apply_tree


def compiled_backend():
    """The compiled module, or None when it is not built."""
    try:
        from . import _tree
    except ImportError:
        return None
    return _tree
