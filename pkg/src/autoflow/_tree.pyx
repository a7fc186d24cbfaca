# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree kernel.

Mirrors ``autoflow._tree_py`` operation for operation: same SplitMix64 stream,
same sequential accumulation order, same tie-breaking. Compiled without
floating-point contraction so results are bit-identical to the fallback.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef enum:
    GINI = 0
    MSE = 1

cdef struct Pair:
    double v
    int64_t i

cdef int _cmp_pair(const void* a, const void* b) noexcept nogil:
    cdef Pair* pa = <Pair*> a
    cdef Pair* pb = <Pair*> b
    if pa.v < pb.v:
        return -1
    if pa.v > pb.v:
        return 1
    if pa.i < pb.i:
        return -1
    if pa.i > pb.i:
        return 1
    return 0

cdef inline uint64_t _next(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)

cdef inline double _uniform(uint64_t* state) noexcept nogil:
    return (_next(state) >> 11) * (1.0 / 9007199254740992.0)

cdef inline double _cost(int criterion, double wl, double sl, double wr, double sr) noexcept nogil:
    if criterion == GINI:
        return 2.0 * sl * (wl - sl) / wl + 2.0 * sr * (wr - sr) / wr
    return -(sl * sl / wl + sr * sr / wr)


def grow_tree(X, y, w, int criterion=GINI, int max_depth=-1, int min_samples_split=2,
              int max_features=-1, bint random_split=False, seed=0):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], d = Xv.shape[1]
    if max_features < 0 or max_features > d:
        max_features = <int>d
    cdef bint draw_features = random_split or max_features < d
    cdef uint64_t state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)

    cdef cnp.ndarray[int64_t, ndim=1] samples_arr = np.flatnonzero(np.asarray(wv) > 0).astype(np.int64)
    cdef int64_t[::1] samples = samples_arr
    cdef Py_ssize_t m = samples.shape[0]
    cdef Py_ssize_t cap = 2 * m + 1

    feature_a = np.full(cap, -1, dtype=np.int64)
    threshold_a = np.zeros(cap, dtype=np.float64)
    left_a = np.full(cap, -1, dtype=np.int64)
    right_a = np.full(cap, -1, dtype=np.int64)
    value_a = np.zeros(cap, dtype=np.float64)
    impurity_a = np.zeros(cap, dtype=np.float64)
    weight_a = np.zeros(cap, dtype=np.float64)
    cdef int64_t[::1] feature = feature_a
    cdef double[::1] threshold = threshold_a
    cdef int64_t[::1] left = left_a
    cdef int64_t[::1] right = right_a
    cdef double[::1] value = value_a
    cdef double[::1] impurity = impurity_a
    cdef double[::1] weight = weight_a

    # explicit DFS stack: node id, sample range, depth
    cdef int64_t[:, ::1] stack = np.zeros((cap, 4), dtype=np.int64)
    cdef Py_ssize_t sp = 0
    cdef Py_ssize_t n_nodes = 1

    cdef Pair* pairs = <Pair*> malloc(max(m, 1) * sizeof(Pair))
    cdef int64_t* tmp = <int64_t*> malloc(max(m, 1) * sizeof(int64_t))
    cdef int64_t* perm = <int64_t*> malloc(max(d, 1) * sizeof(int64_t))
    if pairs == NULL or tmp == NULL or perm == NULL:
        free(pairs); free(tmp); free(perm)
        raise MemoryError()

    cdef Py_ssize_t node, start, end, depth, cnt, i, j, p, fi, f, visited, best_f, nl, nr
    cdef int64_t s, swap
    cdef double W, S, Q, mean, lo, hi, xval, t, wl, sl, wr, sr, cost, best_cost, best_t
    cdef double pbest_cost, pbest_t, a, b, mid, ymin, ymax
    cdef bint pure, found

    try:
        with nogil:
            stack[0, 0] = 0; stack[0, 1] = 0; stack[0, 2] = m; stack[0, 3] = 0
            sp = 1
            while sp > 0:
                sp -= 1
                node = stack[sp, 0]; start = stack[sp, 1]; end = stack[sp, 2]; depth = stack[sp, 3]
                cnt = end - start
                W = 0.0; S = 0.0; Q = 0.0
                ymin = yv[samples[start]]; ymax = ymin
                for i in range(start, end):
                    s = samples[i]
                    W = W + wv[s]
                    S = S + wv[s] * yv[s]
                    if criterion == MSE:
                        Q = Q + wv[s] * yv[s] * yv[s]
                        if yv[s] < ymin:
                            ymin = yv[s]
                        if yv[s] > ymax:
                            ymax = yv[s]
                mean = S / W
                value[node] = mean
                weight[node] = W
                if criterion == GINI:
                    impurity[node] = 2.0 * mean * (1.0 - mean)
                    pure = S == 0.0 or S == W
                else:
                    impurity[node] = Q / W - mean * mean
                    if impurity[node] < 0.0:
                        impurity[node] = 0.0
                    pure = ymin == ymax
                if pure or cnt < min_samples_split or (0 <= max_depth <= depth):
                    continue

                for j in range(d):
                    perm[j] = j
                if draw_features:
                    for j in range(d - 1, 0, -1):
                        i = <Py_ssize_t>(_next(&state) % <uint64_t>(j + 1))
                        swap = perm[j]; perm[j] = perm[i]; perm[i] = swap

                best_cost = 1.0 / 0.0
                best_f = -1
                best_t = 0.0
                visited = 0
                for fi in range(d):
                    if visited >= max_features:
                        break
                    f = perm[fi]
                    lo = Xv[samples[start], f]; hi = lo
                    for i in range(start, end):
                        xval = Xv[samples[i], f]
                        if xval < lo:
                            lo = xval
                        if xval > hi:
                            hi = xval
                    if lo == hi:
                        continue
                    visited += 1
                    if random_split:
                        t = lo + _uniform(&state) * (hi - lo)
                        if not t < hi:
                            t = lo
                        wl = 0.0; sl = 0.0
                        for i in range(start, end):
                            s = samples[i]
                            if Xv[s, f] <= t:
                                wl = wl + wv[s]
                                sl = sl + wv[s] * yv[s]
                        cost = _cost(criterion, wl, sl, W - wl, S - sl)
                    else:
                        for i in range(cnt):
                            s = samples[start + i]
                            pairs[i].v = Xv[s, f]
                            pairs[i].i = s
                        qsort(pairs, cnt, sizeof(Pair), _cmp_pair)
                        wl = 0.0; sl = 0.0
                        found = False
                        pbest_cost = 0.0; pbest_t = 0.0
                        for p in range(cnt - 1):
                            s = pairs[p].i
                            wl = wl + wv[s]
                            sl = sl + wv[s] * yv[s]
                            if pairs[p].v < pairs[p + 1].v:
                                wr = W - wl
                                sr = S - sl
                                cost = _cost(criterion, wl, sl, wr, sr)
                                if not found or cost < pbest_cost:
                                    found = True
                                    pbest_cost = cost
                                    a = pairs[p].v; b = pairs[p + 1].v
                                    mid = (a + b) / 2.0
                                    if mid >= b:
                                        mid = a
                                    pbest_t = mid
                        if not found:
                            continue
                        cost = pbest_cost
                        t = pbest_t
                    if cost < best_cost or (cost == best_cost and f < best_f):
                        best_cost = cost; best_f = f; best_t = t
                if best_f < 0:
                    continue

                # stable partition of samples[start:end]
                nl = 0
                for i in range(start, end):
                    if Xv[samples[i], best_f] <= best_t:
                        samples[start + nl] = samples[i]
                        nl += 1
                    else:
                        tmp[i - start - nl] = samples[i]
                nr = cnt - nl
                for i in range(nr):
                    samples[start + nl + i] = tmp[i]

                feature[node] = best_f
                threshold[node] = best_t
                left[node] = n_nodes
                right[node] = n_nodes + 1
                stack[sp, 0] = n_nodes + 1; stack[sp, 1] = start + nl; stack[sp, 2] = end; stack[sp, 3] = depth + 1
                sp += 1
                stack[sp, 0] = n_nodes; stack[sp, 1] = start; stack[sp, 2] = start + nl; stack[sp, 3] = depth + 1
                sp += 1
                n_nodes += 2
    finally:
        free(pairs); free(tmp); free(perm)

    return (feature_a[:n_nodes].copy(), threshold_a[:n_nodes].copy(), left_a[:n_nodes].copy(),
            right_a[:n_nodes].copy(), value_a[:n_nodes].copy(), impurity_a[:n_nodes].copy(),
            weight_a[:n_nodes].copy())


def apply_tree(feature, threshold, left, right, X):
    cdef int64_t[::1] fv = np.ascontiguousarray(feature, dtype=np.int64)
    cdef double[::1] tv = np.ascontiguousarray(threshold, dtype=np.float64)
    cdef int64_t[::1] lv = np.ascontiguousarray(left, dtype=np.int64)
    cdef int64_t[::1] rv = np.ascontiguousarray(right, dtype=np.int64)
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    out_a = np.zeros(Xv.shape[0], dtype=np.int64)
    cdef int64_t[::1] out = out_a
    cdef Py_ssize_t r
    cdef int64_t nd
    with nogil:
        for r in range(Xv.shape[0]):
            nd = 0
            while fv[nd] >= 0:
                if Xv[r, fv[nd]] <= tv[nd]:
                    nd = lv[nd]
                else:
                    nd = rv[nd]
            out[r] = nd
    return out_a
