"""Tree models: CART, random forest, extra trees, gradient boosting, AdaBoost.

All trees come from :mod:`autoflow.tree_kernel`. A fitted ensemble stores its
trees as concatenated node arrays plus an ``offsets`` vector, so parameters
stay plain arrays and serialize without pickling.
"""

import math

import numpy as np

from ..rng import SplitMix64, derive_seed
from ..tree_kernel import GINI, MSE, apply_tree, grow_tree
from .linear import sigmoid

_NODE_FIELDS = ("feature", "threshold", "left", "right", "value", "impurity", "weight")


def _depth(hp):
    return -1 if hp.get("max_depth") is None else int(hp["max_depth"])


def _max_features(hp, d):
    mf = hp.get("max_features")
    if mf is None:
        return d
    if mf == "sqrt":
        return max(1, int(math.sqrt(d)))
    if mf == "log2":
        return max(1, int(math.log2(d))) if d > 1 else 1
    return max(1, min(d, int(mf)))


def _pack(trees, **extra):
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, t in enumerate(trees):
        offsets[i + 1] = offsets[i] + len(t[0])
    out = {name: np.concatenate([t[j] for t in trees]) for j, name in enumerate(_NODE_FIELDS)}
    out["offsets"] = offsets
    out.update(extra)
    return out


def iter_trees(params):
    """Yield each tree's node arrays as a dict (indices local to the tree)."""
    off = params["offsets"]
    for i in range(len(off) - 1):
        s, e = off[i], off[i + 1]
        yield {f: params[f][s:e] for f in _NODE_FIELDS}


def _leaf_values(tree, X, values=None):
    leaves = apply_tree(tree["feature"], tree["threshold"], tree["left"], tree["right"], X)
    return (tree["value"] if values is None else values)[leaves]


# ---------------------------------------------------------------- single tree


def fit_dt(X, y, hp, seed):
    n = len(y)
    tree = grow_tree(X, y.astype(np.float64), np.ones(n), GINI, _depth(hp),
                     int(hp["min_samples_split"]), -1, False, derive_seed(seed, 40))
    return _pack([tree])


def score_forest(params, X):
    """Mean positive fraction over the trees' leaves."""
    total = np.zeros(len(X))
    count = 0
    for tree in iter_trees(params):
        total += _leaf_values(tree, X)
        count += 1
    return total / count


# ---------------------------------------------------------------- bagging


def _fit_bagged(X, y, hp, seed, bootstrap, random_split):
    n, d = X.shape
    mf = _max_features(hp, d)
    yf = y.astype(np.float64)
    trees = []
    for t in range(int(hp["n_estimators"])):
        if bootstrap:
            draw = SplitMix64(derive_seed(seed, 41, t))
            w = np.bincount([draw.below(n) for _ in range(n)], minlength=n).astype(np.float64)
        else:
            w = np.ones(n)
        trees.append(grow_tree(X, yf, w, GINI, _depth(hp), int(hp["min_samples_split"]),
                               mf, random_split, derive_seed(seed, 42, t)))
    return _pack(trees)


def fit_rf(X, y, hp, seed):
    """Bootstrap-bagged CART trees with per-node feature subsampling."""
    return _fit_bagged(X, y, hp, seed, bootstrap=True, random_split=False)


def fit_et(X, y, hp, seed):
    """Extremely randomized trees: whole sample, one random threshold per feature."""
    return _fit_bagged(X, y, hp, seed, bootstrap=False, random_split=True)


# ---------------------------------------------------------------- gradient boosting


def fit_gbc(X, y, hp, seed):
    """Gradient boosting on the logistic loss.

    Regression trees fit the residual ``y - p``; each leaf then takes one
    Newton step, ``sum(residual) / sum(p * (1 - p))``, shrunk by the learning rate.
    """
    n = len(y)
    yf = y.astype(np.float64)
    lr = float(hp["learning_rate"])
    prior = float(yf.mean())
    f0 = math.log(prior / (1.0 - prior))
    F = np.full(n, f0)
    trees, leaf_vals = [], []
    for t in range(int(hp["n_estimators"])):
        p = sigmoid(F)
        r = yf - p
        tree = grow_tree(X, r, np.ones(n), MSE, int(hp["max_depth"]), 2, -1, False,
                         derive_seed(seed, 43, t))
        leaves = apply_tree(tree[0], tree[1], tree[2], tree[3], X)
        num = np.bincount(leaves, weights=r, minlength=len(tree[0]))
        den = np.bincount(leaves, weights=p * (1.0 - p), minlength=len(tree[0]))
        vals = np.where(den > 1e-150, num / np.where(den > 1e-150, den, 1.0), 0.0)
        F = F + lr * vals[leaves]
        trees.append(tree)
        leaf_vals.append(vals)
    return _pack(trees, init=f0, leaf_value=np.concatenate(leaf_vals), learning_rate=lr)


def score_gbc(params, X):
    F = np.full(len(X), float(params["init"]))
    lr = float(params["learning_rate"])
    off = params["offsets"]
    for i, tree in enumerate(iter_trees(params)):
        F += lr * _leaf_values(tree, X, params["leaf_value"][off[i]:off[i + 1]])
    return sigmoid(F)


# ---------------------------------------------------------------- AdaBoost


def fit_ada(X, y, hp, seed):
    """Discrete AdaBoost (SAMME, two classes) over depth-1 stumps.

    Stops early on a perfect stump or one no better than chance.
    """
    n = len(y)
    yf = y.astype(np.float64)
    lr = float(hp["learning_rate"])
    w = np.full(n, 1.0 / n)
    trees, alphas = [], []
    for t in range(int(hp["n_estimators"])):
        tree = grow_tree(X, yf, w, GINI, 1, 2, -1, False, derive_seed(seed, 44, t))
        pred = (_leaf_values(dict(zip(_NODE_FIELDS, tree)), X) >= 0.5).astype(np.float64)
        wrong = pred != yf
        err = float(w[wrong].sum() / w.sum())
        if err <= 0.0:
            trees.append(tree)
            alphas.append(1.0)
            break
        if err >= 0.5:
            if not trees:
                trees.append(tree)
                alphas.append(1.0)
            break
        alpha = lr * math.log((1.0 - err) / err)
        trees.append(tree)
        alphas.append(alpha)
        w = w * np.exp(alpha * wrong)
        w /= w.sum()
    return _pack(trees, alphas=np.array(alphas))


def ada_decision(params, X):
    """Alpha-weighted vote in [-1, 1]."""
    alphas = params["alphas"]
    total = np.zeros(len(X))
    for a, tree in zip(alphas, iter_trees(params)):
        total += a * np.where(_leaf_values(tree, X) >= 0.5, 1.0, -1.0)
    return total / alphas.sum()


def score_ada(params, X):
    return sigmoid(2.0 * ada_decision(params, X))


# ---------------------------------------------------------------- importances


def impurity_importances(params, n_features, tree_weights=None):
    """Total impurity decrease per feature, normalized per tree, averaged, normalized.

    Returns zeros when no tree has a split.
    """
    acc = np.zeros(n_features)
    trees = list(iter_trees(params))
    if tree_weights is None:
        tree_weights = np.ones(len(trees))
    for tw, tree in zip(tree_weights, trees):
        imp = np.zeros(n_features)
        f, l, r = tree["feature"], tree["left"], tree["right"]
        wi = tree["weight"] * tree["impurity"]
        for node in np.flatnonzero(f >= 0):
            imp[f[node]] += wi[node] - wi[l[node]] - wi[r[node]]
        imp = np.maximum(imp, 0.0)
        if imp.sum() > 0:
            acc += tw * imp / imp.sum()
    total = acc.sum()
    return acc / total if total > 0 else acc
