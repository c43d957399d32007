"""Compiled CART construction and ensemble prediction.

Trees are flat arrays. ``left == -1`` marks a leaf. Numeric nodes send
``x <= threshold`` left; categorical nodes send ``x == threshold`` (one level
versus the rest) left. Leaf ``value`` rows hold the class distribution or the
mean response.
"""

import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True)
def _node_impurity_cls(counts, m):
    s = 0.0
    for k in range(counts.shape[0]):
        s += counts[k] * counts[k]
    return m - s / m


@njit(cache=True)
def _sample_features(p, mtry, scratch):
    # partial Fisher-Yates; result sorted so ties break toward the lower index
    for f in range(p):
        scratch[f] = f
    for i in range(mtry):
        r = i + np.random.randint(0, p - i)
        tmp = scratch[i]
        scratch[i] = scratch[r]
        scratch[r] = tmp
    chosen = np.sort(scratch[:mtry].copy())
    return chosen


@njit(cache=True)
def build_tree(X, is_cat, n_levels, y_reg, y_cls, n_classes, sample, mtry, min_leaf, max_depth, seed):
    """Grow one tree on rows ``sample`` (duplicates allowed).

    n_classes == 0 selects regression (variance impurity, y_reg);
    otherwise Gini impurity on y_cls.
    """
    np.random.seed(seed)
    n = sample.shape[0]
    p = X.shape[1]
    classification = n_classes > 0
    K = n_classes if classification else 1
    max_nodes = 2 * n + 1
    feat = np.full(max_nodes, -1, dtype=np.int64)
    thr = np.zeros(max_nodes)
    iscat = np.zeros(max_nodes, dtype=np.bool_)
    left = np.full(max_nodes, LEAF, dtype=np.int64)
    right = np.full(max_nodes, LEAF, dtype=np.int64)
    value = np.zeros((max_nodes, K))

    idx = sample.copy()
    scratch = np.empty(p, dtype=np.int64)
    max_lv = 1
    for f in range(p):
        if n_levels[f] > max_lv:
            max_lv = n_levels[f]
    lv_count = np.zeros(max_lv)
    lv_sum = np.zeros(max_lv)
    lv_cls = np.zeros((max_lv, K))
    left_counts = np.zeros(K)
    parent_counts = np.zeros(K)

    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_start = np.empty(max_nodes, dtype=np.int64)
    stack_end = np.empty(max_nodes, dtype=np.int64)
    stack_depth = np.empty(max_nodes, dtype=np.int64)
    sp = 0
    n_nodes = 1
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    sp = 1

    while sp > 0:
        sp -= 1
        node = stack_node[sp]
        start = stack_start[sp]
        end = stack_end[sp]
        depth = stack_depth[sp]
        m = end - start

        # node statistics
        parent_counts[:] = 0.0
        total = 0.0
        total_sq = 0.0
        for ii in range(start, end):
            r = idx[ii]
            if classification:
                parent_counts[y_cls[r]] += 1.0
            else:
                total += y_reg[r]
                total_sq += y_reg[r] * y_reg[r]
        if classification:
            for k in range(K):
                value[node, k] = parent_counts[k] / m
            parent_imp = _node_impurity_cls(parent_counts, m)
            pure = False
            for k in range(K):
                if parent_counts[k] == m:
                    pure = True
        else:
            value[node, 0] = total / m
            parent_imp = total_sq - total * total / m
            pure = True
            y0 = y_reg[idx[start]]
            for ii in range(start, end):
                if y_reg[idx[ii]] != y0:
                    pure = False
                    break

        if pure or depth >= max_depth or m < 2 * min_leaf:
            continue

        if mtry < p:
            features = _sample_features(p, mtry, scratch)
        else:
            features = np.arange(p)

        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        best_cat = False
        for fi in range(features.shape[0]):
            f = features[fi]
            if is_cat[f]:
                L = n_levels[f]
                lv_count[:L] = 0.0
                lv_sum[:L] = 0.0
                lv_cls[:L, :] = 0.0
                for ii in range(start, end):
                    r = idx[ii]
                    c = int(X[r, f])
                    lv_count[c] += 1.0
                    if classification:
                        lv_cls[c, y_cls[r]] += 1.0
                    else:
                        lv_sum[c] += y_reg[r]
                for c in range(L):
                    nl = lv_count[c]
                    nr = m - nl
                    if nl < min_leaf or nr < min_leaf:
                        continue
                    if classification:
                        sl = 0.0
                        sr = 0.0
                        for k in range(K):
                            a = lv_cls[c, k]
                            b = parent_counts[k] - a
                            sl += a * a
                            sr += b * b
                        child = (nl - sl / nl) + (nr - sr / nr)
                    else:
                        # SSE_l + SSE_r = total_sq - sum_l^2/nl - sum_r^2/nr
                        suml = lv_sum[c]
                        sumr = total - suml
                        child = total_sq - suml * suml / nl - sumr * sumr / nr
                    gain = parent_imp - child
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = f
                        best_thr = float(c)
                        best_cat = True
            else:
                vals = np.empty(m)
                for ii in range(m):
                    vals[ii] = X[idx[start + ii], f]
                order = np.argsort(vals, kind="mergesort")
                left_counts[:] = 0.0
                suml = 0.0
                for pos in range(m - 1):
                    r = idx[start + order[pos]]
                    if classification:
                        left_counts[y_cls[r]] += 1.0
                    else:
                        suml += y_reg[r]
                    nl = pos + 1.0
                    nr = m - nl
                    if nl < min_leaf:
                        continue
                    if nr < min_leaf:
                        break
                    v0 = vals[order[pos]]
                    v1 = vals[order[pos + 1]]
                    if v0 == v1:
                        continue
                    if classification:
                        sl = 0.0
                        sr = 0.0
                        for k in range(K):
                            a = left_counts[k]
                            b = parent_counts[k] - a
                            sl += a * a
                            sr += b * b
                        child = (nl - sl / nl) + (nr - sr / nr)
                    else:
                        sumr = total - suml
                        child = total_sq - suml * suml / nl - sumr * sumr / nr
                    gain = parent_imp - child
                    if gain > best_gain:
                        t = 0.5 * (v0 + v1)
                        if t >= v1:
                            t = v0
                        best_gain = gain
                        best_feat = f
                        best_thr = t
                        best_cat = False

        if best_feat < 0 or best_gain <= 1e-12 * abs(parent_imp):
            continue

        # partition idx[start:end] so that left rows come first
        lo = start
        hi = end - 1
        while lo <= hi:
            x = X[idx[lo], best_feat]
            go_left = (x == best_thr) if best_cat else (x <= best_thr)
            if go_left:
                lo += 1
            else:
                tmp = idx[lo]
                idx[lo] = idx[hi]
                idx[hi] = tmp
                hi -= 1
        mid = lo
        if mid == start or mid == end:
            continue

        feat[node] = best_feat
        thr[node] = best_thr
        iscat[node] = best_cat
        left[node] = n_nodes
        right[node] = n_nodes + 1
        # push right first so the left subtree is expanded first
        stack_node[sp] = n_nodes + 1
        stack_start[sp] = mid
        stack_end[sp] = end
        stack_depth[sp] = depth + 1
        sp += 1
        stack_node[sp] = n_nodes
        stack_start[sp] = start
        stack_end[sp] = mid
        stack_depth[sp] = depth + 1
        sp += 1
        n_nodes += 2

    return (
        feat[:n_nodes].copy(),
        thr[:n_nodes].copy(),
        iscat[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
    )


@njit(cache=True)
def predict_ensemble(feat, thr, iscat, left, right, value, roots, X):
    n = X.shape[0]
    K = value.shape[1]
    T = roots.shape[0]
    out = np.zeros((n, K))
    # tree-major loop keeps one tree hot in cache; per row the sum is still in tree order
    for t in range(T):
        for i in range(n):
            node = roots[t]
            while left[node] != LEAF:
                x = X[i, feat[node]]
                if iscat[node]:
                    go = x == thr[node]
                else:
                    go = x <= thr[node]
                node = left[node] if go else right[node]
            for k in range(K):
                out[i, k] += value[node, k]
    for i in range(n):
        for k in range(K):
            out[i, k] /= T
    return out


@njit(cache=True)
def predict_ensemble_grid(feat, thr, iscat, left, right, value, roots, X, j, grid):
    """Ensemble output with feature ``j`` set to each value of sorted ``grid``.

    Traverses each tree once per row, splitting the grid range where a node
    tests feature ``j``. Per (row, grid point) the tree contributions are
    summed in tree order, so results equal ``predict_ensemble`` on the
    substituted rows bit for bit.
    """
    n = X.shape[0]
    G = grid.shape[0]
    K = value.shape[1]
    T = roots.shape[0]
    out = np.zeros((n, G, K))
    cap = 4 * G + 256
    s_node = np.empty(cap, dtype=np.int64)
    s_a = np.empty(cap, dtype=np.int64)
    s_b = np.empty(cap, dtype=np.int64)
    for t in range(T):
        for i in range(n):
            sp = 0
            s_node[0] = roots[t]
            s_a[0] = 0
            s_b[0] = G
            sp = 1
            while sp > 0:
                sp -= 1
                node = s_node[sp]
                a = s_a[sp]
                b = s_b[sp]
                while True:
                    if left[node] == LEAF:
                        for g in range(a, b):
                            for k in range(K):
                                out[i, g, k] += value[node, k]
                        break
                    f = feat[node]
                    if f != j:
                        x = X[i, f]
                        if iscat[node]:
                            go = x == thr[node]
                        else:
                            go = x <= thr[node]
                        node = left[node] if go else right[node]
                        continue
                    if iscat[node]:
                        hit = -1
                        for g in range(a, b):
                            if grid[g] == thr[node]:
                                hit = g
                                break
                        if hit < 0:
                            node = right[node]
                            continue
                        if hit > a:
                            s_node[sp] = right[node]
                            s_a[sp] = a
                            s_b[sp] = hit
                            sp += 1
                        if hit + 1 < b:
                            s_node[sp] = right[node]
                            s_a[sp] = hit + 1
                            s_b[sp] = b
                            sp += 1
                        node = left[node]
                        a = hit
                        b = hit + 1
                        continue
                    s = a
                    while s < b and grid[s] <= thr[node]:
                        s += 1
                    if s == a:
                        node = right[node]
                    elif s == b:
                        node = left[node]
                    else:
                        s_node[sp] = right[node]
                        s_a[sp] = s
                        s_b[sp] = b
                        sp += 1
                        node = left[node]
                        b = s
    for i in range(n):
        for g in range(G):
            for k in range(K):
                out[i, g, k] /= T
    return out


@njit(cache=True)
def predict_ensemble_permuted(feat, thr, iscat, left, right, value, roots, X, j, V):
    """Outputs with column ``j`` of row ``i`` replaced by each ``V[r, i]``: (R, n, K).

    Each row's R candidate values form a small sorted grid that is walked
    once per tree, as in ``predict_ensemble_grid``. Contributions are summed
    in tree order, so results equal ``predict_ensemble`` on the substituted
    rows bit for bit.
    """
    n = X.shape[0]
    R = V.shape[0]
    K = value.shape[1]
    T = roots.shape[0]
    grids = np.empty((n, R))
    sizes = np.empty(n, dtype=np.int64)
    slot = np.empty((R, n), dtype=np.int64)
    for i in range(n):
        vals = np.sort(V[:, i])
        u = 0
        for r in range(R):
            if u == 0 or vals[r] != grids[i, u - 1]:
                grids[i, u] = vals[r]
                u += 1
        sizes[i] = u
        for r in range(R):
            for g in range(u):
                if grids[i, g] == V[r, i]:
                    slot[r, i] = g
                    break
    acc = np.zeros((n, R, K))
    cap = 4 * R + 256
    s_node = np.empty(cap, dtype=np.int64)
    s_a = np.empty(cap, dtype=np.int64)
    s_b = np.empty(cap, dtype=np.int64)
    for t in range(T):
        for i in range(n):
            s_node[0] = roots[t]
            s_a[0] = 0
            s_b[0] = sizes[i]
            sp = 1
            while sp > 0:
                sp -= 1
                node = s_node[sp]
                a = s_a[sp]
                b = s_b[sp]
                while True:
                    if left[node] == LEAF:
                        for g in range(a, b):
                            for k in range(K):
                                acc[i, g, k] += value[node, k]
                        break
                    f = feat[node]
                    if f != j:
                        x = X[i, f]
                        if iscat[node]:
                            go = x == thr[node]
                        else:
                            go = x <= thr[node]
                        node = left[node] if go else right[node]
                        continue
                    if iscat[node]:
                        hit = -1
                        for g in range(a, b):
                            if grids[i, g] == thr[node]:
                                hit = g
                                break
                        if hit < 0:
                            node = right[node]
                            continue
                        if hit > a:
                            s_node[sp] = right[node]
                            s_a[sp] = a
                            s_b[sp] = hit
                            sp += 1
                        if hit + 1 < b:
                            s_node[sp] = right[node]
                            s_a[sp] = hit + 1
                            s_b[sp] = b
                            sp += 1
                        node = left[node]
                        a = hit
                        b = hit + 1
                        continue
                    s = a
                    while s < b and grids[i, s] <= thr[node]:
                        s += 1
                    if s == a:
                        node = right[node]
                    elif s == b:
                        node = left[node]
                    else:
                        s_node[sp] = right[node]
                        s_a[sp] = s
                        s_b[sp] = b
                        sp += 1
                        node = left[node]
                        b = s
    out = np.empty((R, n, K))
    for r in range(R):
        for i in range(n):
            for k in range(K):
                out[r, i, k] = acc[i, slot[r, i], k] / T
    return out
