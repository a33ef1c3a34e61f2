"""Compiled CART growth on CSR matrices (Gini criterion, random feature subsets)."""
import numpy as np
from numba import njit

N_CLASSES = 4

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _next(state):
    # splitmix64
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _below(state, n):
    return np.int64(_next(state) % np.uint64(n))


@njit(cache=True)
def _value_at(indptr, indices, data, row, f):
    lo = indptr[row]
    end = indptr[row + 1]
    hi = end
    while lo < hi:
        mid = (lo + hi) >> 1
        if indices[mid] < f:
            lo = mid + 1
        else:
            hi = mid
    if lo < end and indices[lo] == f:
        return data[lo]
    return 0.0


@njit(cache=True)
def grow(indptr, indices, data, col_ptr, col_rows, col_vals, y, sample, n_features, k, seed):
    """Grow one tree on ``sample`` rows; returns flat node arrays.

    Every node holds a contiguous segment of the row buffer. A node becomes
    a leaf when pure, when it has fewer than two rows, or when no feature
    takes two distinct values on it. Candidate features are drawn without
    replacement from the features with a nonzero on the node; drawing stops
    once ``k`` were examined and one of them gave a valid split.

    A feature's values on a node are gathered either by binary search in
    each node row (CSR) or by scanning the feature's column (CSC) against
    per-node row stamps, whichever touches fewer entries.
    """
    m_total = sample.shape[0]
    cap = 2 * m_total + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, N_CLASSES))

    rows = sample.copy()
    vals = np.empty(m_total)
    wts = np.empty(m_total)
    sorted_y = np.empty(m_total, dtype=np.int64)
    n_rows = indptr.shape[0] - 1
    stamp = np.full(n_rows, -1, dtype=np.int64)
    mult = np.zeros(n_rows)
    mark = np.zeros(n_features, dtype=np.bool_)
    active = np.empty(n_features, dtype=np.int64)
    state = np.array([np.uint64(seed)], dtype=np.uint64)

    stack_node = np.empty(cap, dtype=np.int64)
    stack_lo = np.empty(cap, dtype=np.int64)
    stack_hi = np.empty(cap, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = m_total
    top = 1
    n_nodes = 1

    counts = np.zeros(N_CLASSES)
    left_counts = np.zeros(N_CLASSES)
    zero_counts = np.zeros(N_CLASSES)

    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        m = hi - lo

        counts[:] = 0.0
        for j in range(lo, hi):
            counts[y[rows[j]]] += 1.0
        for c in range(N_CLASSES):
            value[node, c] = counts[c] / m
        if m < 2 or counts.max() == m:
            continue

        for j in range(lo, hi):
            r = rows[j]
            if stamp[r] != node:
                stamp[r] = node
                mult[r] = 0.0
            mult[r] += 1.0

        n_active = 0
        for j in range(lo, hi):
            r = rows[j]
            for p in range(indptr[r], indptr[r + 1]):
                f = indices[p]
                if not mark[f]:
                    mark[f] = True
                    active[n_active] = f
                    n_active += 1
        for i in range(n_active):
            mark[active[i]] = False
        # deterministic starting order regardless of row order
        active[:n_active].sort()

        best_f = -1
        best_thr = 0.0
        best_score = -np.inf
        examined = 0
        for i in range(n_active):
            if examined >= k and best_f >= 0:
                break
            swap = i + _below(state, n_active - i)
            f = active[swap]
            active[swap] = active[i]
            active[i] = f
            examined += 1

            # sort only the nonzeros; the zeros form one block between
            # the negative and positive values
            nz = 0
            for c in range(N_CLASSES):
                zero_counts[c] = counts[c]
            if col_ptr[f + 1] - col_ptr[f] < 4 * m:
                for p in range(col_ptr[f], col_ptr[f + 1]):
                    r = col_rows[p]
                    if stamp[r] == node and col_vals[p] != 0.0:
                        vals[nz] = col_vals[p]
                        wts[nz] = mult[r]
                        sorted_y[nz] = y[r]
                        zero_counts[y[r]] -= mult[r]
                        nz += 1
            else:
                for j in range(m):
                    r = rows[lo + j]
                    v = _value_at(indptr, indices, data, r, f)
                    if v != 0.0:
                        vals[nz] = v
                        wts[nz] = 1.0
                        sorted_y[nz] = y[r]
                        zero_counts[y[r]] -= 1.0
                        nz += 1
            n_zero = 0.0
            for c in range(N_CLASSES):
                n_zero += zero_counts[c]
            order = np.argsort(vals[:nz])
            n_neg = 0
            while n_neg < nz and vals[order[n_neg]] < 0.0:
                n_neg += 1
            n_items = nz + (1 if n_zero > 0 else 0)
            left_counts[:] = 0.0
            n_left = 0.0
            t = 0
            for step in range(n_items - 1):
                if n_zero > 0 and step == n_neg:
                    a = 0.0
                    for c in range(N_CLASSES):
                        left_counts[c] += zero_counts[c]
                    n_left += n_zero
                else:
                    a = vals[order[t]]
                    left_counts[sorted_y[order[t]]] += wts[order[t]]
                    n_left += wts[order[t]]
                    t += 1
                if n_zero > 0 and step + 1 == n_neg:
                    b = 0.0
                else:
                    b = vals[order[t]]
                if a >= b:
                    continue
                n_right = m - n_left
                sl = 0.0
                sr = 0.0
                for c in range(N_CLASSES):
                    sl += left_counts[c] * left_counts[c]
                    rc = counts[c] - left_counts[c]
                    sr += rc * rc
                score = sl / n_left + sr / n_right
                if score > best_score:
                    best_score = score
                    best_f = f
                    thr = 0.5 * (a + b)
                    if thr >= b:
                        thr = a
                    best_thr = thr

        if best_f < 0:
            continue

        # partition rows[lo:hi] so that x[best_f] <= best_thr comes first
        i = lo
        j = hi - 1
        while i <= j:
            if _value_at(indptr, indices, data, rows[i], best_f) <= best_thr:
                i += 1
            else:
                tmp = rows[i]
                rows[i] = rows[j]
                rows[j] = tmp
                j -= 1
        feature[node] = best_f
        threshold[node] = best_thr
        l_id = n_nodes
        r_id = n_nodes + 1
        n_nodes += 2
        left[node] = l_id
        right[node] = r_id
        stack_node[top] = r_id
        stack_lo[top] = i
        stack_hi[top] = hi
        top += 1
        stack_node[top] = l_id
        stack_lo[top] = lo
        stack_hi[top] = i
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
    )
