"""Compiled hot loops for tree growing and prediction.

The grower works on flat node arrays; apply weights for multiset fitting.
Kept separate from the public tree API so the numba surface stays small.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MODE_ALL = 0
MODE_SUBSPACE = 1
MODE_RANDOM_THRESHOLD = 2

NO_DEPTH_LIMIT = np.iinfo(np.int64).max

# A candidate must beat the incumbent by more than this to replace it, so
# ties resolve to the earliest candidate in visit order: ascending features
# (lowest index wins) unless the visit order is randomised, and ascending
# thresholds within a feature either way.
_TIE_EPS = 1e-12


@njit(cache=True)
def grow(X, y, w, n_classes, mode, k_features, max_depth, min_samples_split, seed, randomize):
    """Grow a gini CART over weighted rows; returns flat node arrays.

    Returns (feature, threshold, left, right, counts, n_nodes); leaves have
    feature == -1.  Zero-gain splits are accepted, so an impure node with any
    distinct feature values keeps splitting until pure or constrained.  In
    subspace mode, features constant within the node do not count against
    ``k_features``; the sampler keeps drawing until it has scored k usable
    features or runs out.
    """
    n, f = X.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    counts = np.zeros((max_nodes, n_classes), np.float64)
    np.random.seed(seed)

    idx = np.arange(n)
    scratch = np.empty(n, np.int64)
    stack = np.empty((max_nodes, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    vals = np.empty(n, np.float64)
    cl = np.empty(n_classes, np.float64)
    perm = np.arange(f)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]

        c = np.zeros(n_classes, np.float64)
        for i in range(start, end):
            c[y[idx[i]]] += w[idx[i]]
        counts[node] = c
        total = c.sum()

        n_present = 0
        for k in range(n_classes):
            if c[k] > 0.0:
                n_present += 1
        if n_present <= 1 or depth >= max_depth or total < min_samples_split:
            continue

        m = end - start
        best_score = np.inf
        best_feat = -1
        best_thr = 0.0

        if randomize or mode == MODE_SUBSPACE:
            for j in range(f - 1):
                r = j + np.random.randint(0, f - j)
                tmp = perm[j]
                perm[j] = perm[r]
                perm[r] = tmp
        else:
            for j in range(f):
                perm[j] = j

        scored = 0
        budget = k_features if mode == MODE_SUBSPACE else f
        for ci in range(f):
            if scored >= budget:
                break
            fi = perm[ci]
            for i in range(m):
                vals[i] = X[idx[start + i], fi]
            order = np.argsort(vals[:m], kind="mergesort")
            lo = vals[order[0]]
            hi = vals[order[m - 1]]
            if lo == hi:
                continue  # constant here; does not consume subspace budget
            scored += 1

            if mode == MODE_RANDOM_THRESHOLD:
                cand = lo + (hi - lo) * np.random.random()
                for k in range(n_classes):
                    cl[k] = 0.0
                wl = 0.0
                for i in range(m):
                    oi = order[i]
                    if vals[oi] <= cand:
                        yy = y[idx[start + oi]]
                        cl[yy] += w[idx[start + oi]]
                        wl += w[idx[start + oi]]
                    else:
                        break
                wr = total - wl
                if wl <= 0.0 or wr <= 0.0:
                    continue
                gl = 1.0
                gr = 1.0
                for k in range(n_classes):
                    pl = cl[k] / wl
                    pr = (c[k] - cl[k]) / wr
                    gl -= pl * pl
                    gr -= pr * pr
                score = (wl * gl + wr * gr) / total
                if score < best_score - _TIE_EPS:
                    best_score = score
                    best_feat = fi
                    best_thr = cand
            else:
                for k in range(n_classes):
                    cl[k] = 0.0
                wl = 0.0
                for i in range(m - 1):
                    oi = order[i]
                    yy = y[idx[start + oi]]
                    cl[yy] += w[idx[start + oi]]
                    wl += w[idx[start + oi]]
                    v0 = vals[oi]
                    v1 = vals[order[i + 1]]
                    if v0 == v1:
                        continue
                    wr = total - wl
                    gl = 1.0
                    gr = 1.0
                    for k in range(n_classes):
                        pl = cl[k] / wl
                        pr = (c[k] - cl[k]) / wr
                        gl -= pl * pl
                        gr -= pr * pr
                    score = (wl * gl + wr * gr) / total
                    if score < best_score - _TIE_EPS:
                        best_score = score
                        best_feat = fi
                        best_thr = v0 + 0.5 * (v1 - v0)

        if best_feat < 0:
            continue

        nl = 0
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                nl += 1
        a = 0
        b = 0
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                scratch[start + a] = idx[i]
                a += 1
            else:
                scratch[start + nl + b] = idx[i]
                b += 1
        for i in range(start, end):
            idx[i] = scratch[i]

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack[top, 0] = lid
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = rid
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], counts[:n_nodes]


@njit(cache=True)
def predict(feature, threshold, left, right, leaf_class, X):
    """Route every row of X to a leaf and return its class."""
    out = np.empty(X.shape[0], np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]
    return out
