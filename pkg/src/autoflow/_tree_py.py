"""Pure-Python tree kernel. Fallback for the compiled ``_tree`` extension.

Both implementations consume the same SplitMix64 stream in the same order
and accumulate sums sequentially in the same order, so for identical inputs
they return bit-identical node arrays.
"""

import numpy as np

from .rng import SplitMix64

GINI = 0
MSE = 1


def _seq_sum(a):
    # sequential summation; np.sum is pairwise and would round differently
    return float(np.cumsum(a)[-1]) if len(a) else 0.0


def _cost(criterion, wl, sl, wr, sr):
    if criterion == GINI:
        return 2.0 * sl * (wl - sl) / wl + 2.0 * sr * (wr - sr) / wr
    return -(sl * sl / wl + sr * sr / wr)


def _best_threshold(criterion, xv, yv, wv, W, S):
    order = np.lexsort((np.arange(len(xv)), xv))
    xs, ws = xv[order], wv[order]
    wy = ws * yv[order]
    wl = np.cumsum(ws)[:-1]
    sl = np.cumsum(wy)[:-1]
    valid = xs[:-1] < xs[1:]
    if not valid.any():
        return None
    wr = W - wl
    sr = S - sl
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = _cost(criterion, wl, sl, wr, sr)
    cost = np.where(valid, cost, np.inf)
    p = int(np.argmin(cost))
    a, b = float(xs[p]), float(xs[p + 1])
    mid = (a + b) / 2.0
    if mid >= b:
        mid = a
    return float(cost[p]), mid


def grow_tree(X, y, w, criterion=GINI, max_depth=-1, min_samples_split=2,
              max_features=-1, random_split=False, seed=0):
    """Grow a binary tree depth-first (left child first).

    Parameters
    ----------
    X : (n, d) float64
    y : (n,) float64, 0/1 labels for GINI or real targets for MSE
    w : (n,) float64 sample weights; rows with zero weight are ignored
    max_depth : -1 for unlimited
    max_features : features examined per node; -1 for all
    random_split : draw one uniform threshold per feature (extra-trees)

    Returns
    -------
    feature, threshold, left, right, value, impurity, weight : node arrays.
    ``feature[i] == -1`` marks a leaf. ``value`` is the weighted mean target.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n, d = X.shape
    if max_features < 0 or max_features > d:
        max_features = d
    rng = SplitMix64(seed)
    draw_features = random_split or max_features < d

    feature, threshold, left, right = [-1], [0.0], [-1], [-1]
    value, impurity, weight = [0.0], [0.0], [0.0]
    stack = [(0, np.flatnonzero(w > 0), 0)]
    while stack:
        node, idx, depth = stack.pop()
        wv, yv = w[idx], y[idx]
        W = _seq_sum(wv)
        S = _seq_sum(wv * yv)
        mean = S / W
        value[node] = mean
        weight[node] = W
        if criterion == GINI:
            impurity[node] = 2.0 * mean * (1.0 - mean)
            pure = S == 0.0 or S == W
        else:
            Q = _seq_sum(wv * yv * yv)
            impurity[node] = max(Q / W - mean * mean, 0.0)
            pure = bool(yv.min() == yv.max())
        if pure or len(idx) < min_samples_split or (0 <= max_depth <= depth):
            continue

        order = rng.permutation(d) if draw_features else range(d)
        best_cost, best_f, best_t = np.inf, -1, 0.0
        visited = 0
        for f in order:
            if visited >= max_features:
                break
            xv = X[idx, f]
            lo, hi = float(xv.min()), float(xv.max())
            if lo == hi:
                continue
            visited += 1
            if random_split:
                t = lo + rng.uniform() * (hi - lo)
                if not t < hi:
                    t = lo
                mask = xv <= t
                wl = _seq_sum(wv[mask])
                sl = _seq_sum(wv[mask] * yv[mask])
                cost = _cost(criterion, wl, sl, W - wl, S - sl)
            else:
                found = _best_threshold(criterion, xv, yv, wv, W, S)
                if found is None:
                    continue
                cost, t = found
            if cost < best_cost or (cost == best_cost and f < best_f):
                best_cost, best_f, best_t = cost, int(f), t
        if best_f < 0:
            continue

        mask = X[idx, best_f] <= best_t
        lid = len(feature)
        rid = lid + 1
        for lst, fill in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1),
                          (value, 0.0), (impurity, 0.0), (weight, 0.0)):
            lst.extend((fill, fill))
        feature[node], threshold[node] = best_f, best_t
        left[node], right[node] = lid, rid
        stack.append((rid, idx[~mask], depth + 1))
        stack.append((lid, idx[mask], depth + 1))

    return (np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
            np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
            np.array(value, dtype=np.float64), np.array(impurity, dtype=np.float64),
            np.array(weight, dtype=np.float64))


def apply_tree(feature, threshold, left, right, X):
    """Leaf index reached by every row of ``X``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    active = feature[node] >= 0
    while active.any():
        r = rows[active]
        nd = node[r]
        go_left = X[r, feature[nd]] <= threshold[nd]
        node[r] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return node
