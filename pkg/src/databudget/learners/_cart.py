"""Compiled CART builder shared by the forest classifier and regressor.

Trees are stored as flat arrays (feature, threshold, left, right, value).
A leaf has ``feature == -1``. All randomness comes from a splitmix64
stream seeded per tree, so a tree is a pure function of its inputs.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True)
def _next(state):
    state[0] = state[0] + _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def _randint(state, n):
    return np.int64(_next(state) % np.uint64(n))


@njit(cache=True)
def build_tree(X, y, n_outputs, regression, bootstrap, max_features,
               max_depth, min_samples_split, seed):
    """Grow one tree. ``y`` is float64 (class ids for classification).

    ``n_outputs`` is the class count for classification and 1 for
    regression. ``max_depth < 0`` means unlimited. Each feature is sorted
    once; nodes keep their samples in per-feature sorted order through a
    stable partition, so no node re-sorts.
    """
    n, d = X.shape
    state = np.empty(1, dtype=np.uint64)
    state[0] = np.uint64(seed)

    rows = np.empty(n, dtype=np.int64)
    if bootstrap:
        for i in range(n):
            rows[i] = _randint(state, n)
    else:
        for i in range(n):
            rows[i] = i

    # sample-major copies of the drawn rows: Xs[f, p], ys[p]
    Xs = np.empty((d, n), dtype=np.float64)
    ys = np.empty(n, dtype=np.float64)
    for p in range(n):
        ys[p] = y[rows[p]]
        for f in range(d):
            Xs[f, p] = X[rows[p], f]
    S = np.empty((d, n), dtype=np.int64)
    for f in range(d):
        S[f] = np.argsort(Xs[f], kind="mergesort")

    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, n_outputs), dtype=np.float64)

    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    top = 1
    n_nodes = 1

    feats = np.arange(d)
    goes_left = np.zeros(n, dtype=np.bool_)
    buf = np.empty(n, dtype=np.int64)
    lcnt = np.zeros(n_outputs, dtype=np.float64)
    tot = np.zeros(n_outputs, dtype=np.float64)

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        m = end - start
        seg = S[0, start:end]

        for k in range(n_outputs):
            tot[k] = 0.0
        if regression:
            acc = 0.0
            for i in range(m):
                acc += ys[seg[i]]
            value[node, 0] = acc / m
            tot[0] = acc
            pure = True
            y0 = ys[seg[0]]
            for i in range(1, m):
                if ys[seg[i]] != y0:
                    pure = False
                    break
            if pure:
                value[node, 0] = y0
        else:
            for i in range(m):
                tot[np.int64(ys[seg[i]])] += 1.0
            nonzero = 0
            for k in range(n_outputs):
                value[node, k] = tot[k]
                if tot[k] > 0:
                    nonzero += 1
            pure = nonzero <= 1

        if pure or m < min_samples_split or (max_depth >= 0 and depth >= max_depth):
            continue

        best_score = -np.inf
        best_feat = -1
        best_thr = 0.0

        # partial Fisher-Yates over features; constant ones do not count
        visited = 0
        j = 0
        while j < d and visited < max_features:
            r = j + _randint(state, d - j)
            tmp = feats[j]
            feats[j] = feats[r]
            feats[r] = tmp
            f = feats[j]
            j += 1

            order = S[f, start:end]
            xf = Xs[f]
            if xf[order[0]] == xf[order[m - 1]]:
                continue
            visited += 1

            if regression:
                sl = 0.0
                stot = tot[0]
                for i in range(m - 1):
                    sl += ys[order[i]]
                    v_here = xf[order[i]]
                    v_next = xf[order[i + 1]]
                    if v_here == v_next:
                        continue
                    nl = i + 1.0
                    nr = m - nl
                    sr = stot - sl
                    score = sl * sl / nl + sr * sr / nr
                    if score > best_score:
                        best_score = score
                        best_feat = f
                        thr = 0.5 * (v_here + v_next)
                        if thr >= v_next:
                            thr = v_here
                        best_thr = thr
            else:
                for k in range(n_outputs):
                    lcnt[k] = 0.0
                ql = 0.0
                qr = 0.0
                for k in range(n_outputs):
                    qr += tot[k] * tot[k]
                for i in range(m - 1):
                    c = np.int64(ys[order[i]])
                    # incremental sums of squared class counts
                    ql += 2.0 * lcnt[c] + 1.0
                    rc = tot[c] - lcnt[c]
                    qr -= 2.0 * rc - 1.0
                    lcnt[c] += 1.0
                    v_here = xf[order[i]]
                    v_next = xf[order[i + 1]]
                    if v_here == v_next:
                        continue
                    nl = i + 1.0
                    nr = m - nl
                    score = ql / nl + qr / nr
                    if score > best_score:
                        best_score = score
                        best_feat = f
                        thr = 0.5 * (v_here + v_next)
                        if thr >= v_next:
                            thr = v_here
                        best_thr = thr

        if best_feat < 0:
            continue

        xf = Xs[best_feat]
        n_left = 0
        for i in range(start, end):
            p = S[best_feat, i]
            if xf[p] <= best_thr:
                goes_left[p] = True
                n_left += 1
            else:
                goes_left[p] = False
        if n_left == 0 or n_left == m:
            continue
        mid = start + n_left

        # stable partition of every feature's sorted segment
        for g in range(d):
            a = start
            b = 0
            for i in range(start, end):
                p = S[g, i]
                if goes_left[p]:
                    S[g, a] = p
                    a += 1
                else:
                    buf[b] = p
                    b += 1
            for i in range(b):
                S[g, mid + i] = buf[i]

        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = lchild
        right[node] = rchild

        st_node[top] = rchild
        st_start[top] = mid
        st_end[top] = end
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = lchild
        st_start[top] = start
        st_end[top] = mid
        st_depth[top] = depth + 1
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(),
            value[:n_nodes].copy())


@njit(cache=True)
def apply_tree(feature, threshold, left, right, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@njit(cache=True)
def leaf_argmax(value):
    # first maximum wins, so ties go to the lowest class id
    n = value.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        best = 0
        for k in range(1, value.shape[1]):
            if value[i, k] > value[i, best]:
                best = k
        out[i] = best
    return out


@njit(cache=True)
def fit_predict_classifier(X, y, X_probe, n_classes, n_trees, max_features,
                           max_depth, min_samples_split, seed):
    """Train a forest and return majority-vote labels for ``X_probe``.

    Same trees as building each one with ``build_tree`` at ``seed + t``.
    """
    n_probe = X_probe.shape[0]
    votes = np.zeros((n_probe, n_classes), dtype=np.int64)
    for t in range(n_trees):
        feature, threshold, left, right, value = build_tree(
            X, y, n_classes, False, True, max_features, max_depth,
            min_samples_split, seed + t)
        leaves = apply_tree(feature, threshold, left, right, X_probe)
        labels = leaf_argmax(value)
        for i in range(n_probe):
            votes[i, labels[leaves[i]]] += 1
    out = np.empty(n_probe, dtype=np.int64)
    for i in range(n_probe):
        best = 0
        for k in range(1, n_classes):
            if votes[i, k] > votes[i, best]:
                best = k
        out[i] = best
    return out
