"""Compiled numerical core for tree growing, boosting, and prediction.

Everything here is deterministic: randomness enters only through explicit
SplitMix64 stream states (uint64), and all sorts are stable, so two runs with
the same inputs produce bit-identical trees on any platform.

Layout conventions:

- A tree is five aligned arrays (``feat, thr, left, right, leaf``) indexed by
  node, in preorder construction order; ``feat[node] < 0`` marks a leaf.
- Per-feature row indices are kept presorted per fit and partitioned stably
  at each split, so no per-node sorting is needed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def sm64_fill(state, out):
    """Advance a SplitMix64 state, filling ``out`` with uniform [0,1) doubles."""
    for i in range(out.shape[0]):
        state = state + _GOLDEN
        z = state
        z = (z ^ (z >> U64(30))) * _MIX1
        z = (z ^ (z >> U64(27))) * _MIX2
        z = z ^ (z >> U64(31))
        out[i] = (z >> U64(11)) * _INV53
    return state


@njit(cache=True)
def build_tree(X, resid, sidx, n_rows, depth_limit, max_features, rng_state,
               feat, thr, left, right, leaf, go_left, tmp_l, tmp_r, keys_f, cand):
    """Grow one regression tree over the rows listed in ``sidx``.

    ``sidx`` is (F, n_rows): per feature, this tree's row indices sorted by
    that feature's value (stable).  It is partitioned in place as the tree
    grows.  Nodes are emitted in preorder; the per-node draw order is the
    construction order.  Splits maximize the least-squares improvement
    (n_L * n_R) / (n_L + n_R) * (mean_L - mean_R)^2 with ties going to the
    lowest feature slot, then the lowest threshold.  Recursion stops at the
    depth limit, at residual purity, or when no split improves.

    Returns (n_nodes, rng_state).
    """
    F = X.shape[1]
    n = n_rows
    cap = 2 * n + 1
    stack_lo = np.empty(cap, dtype=np.int64)
    stack_hi = np.empty(cap, dtype=np.int64)
    stack_dep = np.empty(cap, dtype=np.int64)
    stack_par = np.empty(cap, dtype=np.int64)
    stack_isl = np.empty(cap, dtype=np.int64)
    stack_lo[0] = 0
    stack_hi[0] = n
    stack_dep[0] = 0
    stack_par[0] = -1
    stack_isl[0] = 0
    top = 1
    n_nodes = 0
    while top > 0:
        top -= 1
        lo = stack_lo[top]
        hi = stack_hi[top]
        dep = stack_dep[top]
        par = stack_par[top]
        isl = stack_isl[top]
        node = n_nodes
        n_nodes += 1
        if par >= 0:
            if isl == 1:
                left[par] = node
            else:
                right[par] = node
        m = hi - lo
        total = 0.0
        vmin = resid[sidx[0, lo]]
        vmax = vmin
        for i in range(lo, hi):
            v = resid[sidx[0, i]]
            total += v
            if v < vmin:
                vmin = v
            if v > vmax:
                vmax = v
        mean_all = total / m
        is_leaf = m < 2 or vmin == vmax or (depth_limit >= 0 and dep >= depth_limit)
        best_imp = 0.0
        best_f = -1
        best_thr = 0.0
        if not is_leaf:
            if max_features >= F:
                n_cand = F
                for j in range(F):
                    cand[j] = j
            else:
                rng_state = sm64_fill(rng_state, keys_f)
                order = np.argsort(keys_f, kind="mergesort")
                sel = np.sort(order[:max_features])
                n_cand = max_features
                for j in range(max_features):
                    cand[j] = sel[j]
            for jj in range(n_cand):
                f = cand[jj]
                csum = 0.0
                for k in range(m - 1):
                    row = sidx[f, lo + k]
                    csum += resid[row]
                    vk = X[row, f]
                    vk1 = X[sidx[f, lo + k + 1], f]
                    if vk == vk1:
                        continue
                    t = 0.5 * (vk + vk1)
                    if t >= vk1:
                        # Midpoint rounded onto the right value; a <= split
                        # there would leave the right child empty.
                        continue
                    n_l = k + 1
                    n_r = m - n_l
                    mean_l = csum / n_l
                    mean_r = (total - csum) / n_r
                    d = mean_l - mean_r
                    imp = (n_l * n_r) / (n_l + n_r) * d * d
                    if imp > best_imp:
                        best_imp = imp
                        best_f = f
                        best_thr = t
            if best_f < 0:
                is_leaf = True
        if is_leaf:
            feat[node] = -1
            leaf[node] = mean_all
            continue
        feat[node] = best_f
        thr[node] = best_thr
        n_l = 0
        for i in range(lo, hi):
            row = sidx[best_f, i]
            gl = X[row, best_f] <= best_thr
            go_left[row] = gl
            if gl:
                n_l += 1
        for f in range(F):
            p = 0
            q = 0
            for i in range(lo, hi):
                row = sidx[f, i]
                if go_left[row]:
                    tmp_l[p] = row
                    p += 1
                else:
                    tmp_r[q] = row
                    q += 1
            for i in range(p):
                sidx[f, lo + i] = tmp_l[i]
            for i in range(q):
                sidx[f, lo + p + i] = tmp_r[i]
        mid = lo + n_l
        # Push right then left so the pop order (and hence node numbering
        # and rng draw order) is preorder.
        stack_lo[top] = mid
        stack_hi[top] = hi
        stack_dep[top] = dep + 1
        stack_par[top] = node
        stack_isl[top] = 0
        top += 1
        stack_lo[top] = lo
        stack_hi[top] = mid
        stack_dep[top] = dep + 1
        stack_par[top] = node
        stack_isl[top] = 1
        top += 1
    return n_nodes, rng_state


@njit(cache=True)
def tree_apply(feat, thr, left, right, leaf, X, out):
    """Route every row of X to its leaf value (<= threshold goes left)."""
    for r in range(X.shape[0]):
        node = 0
        while feat[node] >= 0:
            if X[r, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = leaf[node]


@njit(cache=True)
def _presort(X):
    n, F = X.shape
    sidx = np.empty((F, n), dtype=np.int64)
    for f in range(F):
        sidx[f] = np.argsort(X[:, f], kind="mergesort")
    return sidx


@njit(cache=True)
def _select_sample(base_sidx, in_sample, k, sidx):
    F = base_sidx.shape[0]
    n = base_sidx.shape[1]
    for f in range(F):
        p = 0
        for i in range(n):
            row = base_sidx[f, i]
            if in_sample[row]:
                sidx[f, p] = row
                p += 1


@njit(cache=True)
def fit_boost(X, y, baseline, n_estimators, learning_rate, subsample, depth_limit,
              max_features, seeds):
    """Run the full boosting loop, keeping every stage's tree.

    Per stage: draw ceil(subsample*n) rows without replacement (subsample=1
    consumes no draws), fit a tree to the residuals on the sampled rows, and
    add it with shrinkage ``learning_rate``.  ``seeds[m]`` is stage m's
    SplitMix64 stream state.  ``baseline`` is the caller-computed mean of
    ``y`` (passed in so Python and kernel paths share the identical float).

    Returns (feat, thr, left, right, leaf, sizes, curve) where the tree
    arrays are (n_estimators, 2n+1), ``sizes`` gives each tree's node count,
    and ``curve`` is the raw (unclipped) training MSE after 0..M stages.
    """
    n, F = X.shape
    f_train = np.full(n, baseline)
    cap = 2 * n + 1
    all_feat = np.full((n_estimators, cap), -1, dtype=np.int64)
    all_thr = np.zeros((n_estimators, cap))
    all_left = np.zeros((n_estimators, cap), dtype=np.int64)
    all_right = np.zeros((n_estimators, cap), dtype=np.int64)
    all_leaf = np.zeros((n_estimators, cap))
    sizes = np.zeros(n_estimators, dtype=np.int64)
    curve = np.zeros(n_estimators + 1)

    resid = np.empty(n)
    pred = np.empty(n)
    keys_n = np.empty(n)
    go_left = np.zeros(n, dtype=np.bool_)
    tmp_l = np.empty(n, dtype=np.int64)
    tmp_r = np.empty(n, dtype=np.int64)
    keys_f = np.empty(F)
    cand = np.empty(F, dtype=np.int64)
    in_sample = np.zeros(n, dtype=np.bool_)
    k_sub = int(np.ceil(subsample * n))

    acc = 0.0
    for i in range(n):
        d = y[i] - f_train[i]
        acc += d * d
    curve[0] = acc / n

    base_sidx = _presort(X)
    sidx = np.empty_like(base_sidx)
    for stage in range(n_estimators):
        state = seeds[stage]
        if subsample < 1.0:
            state = sm64_fill(state, keys_n)
            order = np.argsort(keys_n, kind="mergesort")
            for i in range(n):
                in_sample[i] = False
            for i in range(k_sub):
                in_sample[order[i]] = True
            _select_sample(base_sidx, in_sample, k_sub, sidx)
            n_rows = k_sub
        else:
            sidx[:, :] = base_sidx
            n_rows = n
        for i in range(n):
            resid[i] = y[i] - f_train[i]
        nn, state = build_tree(
            X, resid, sidx, n_rows, depth_limit, max_features, state,
            all_feat[stage], all_thr[stage], all_left[stage], all_right[stage],
            all_leaf[stage], go_left, tmp_l, tmp_r, keys_f, cand,
        )
        sizes[stage] = nn
        tree_apply(all_feat[stage], all_thr[stage], all_left[stage],
                   all_right[stage], all_leaf[stage], X, pred)
        acc = 0.0
        for i in range(n):
            f_train[i] += learning_rate * pred[i]
            d = y[i] - f_train[i]
            acc += d * d
        curve[stage + 1] = acc / n
    return all_feat, all_thr, all_left, all_right, all_leaf, sizes, curve


@njit(cache=True)
def boost_validation_curve(X, y, baseline, X_val, n_estimators, learning_rate,
                           subsample, depth_limit, max_features, seeds, checkpoints):
    """Boost on (X, y) and record raw validation predictions at checkpoints.

    Stage seeds are indexed identically to :func:`fit_boost`, and checkpoint
    values are computed as baseline + lr * (running sum of tree outputs),
    the same operation order as :func:`ensemble_apply`, so the predictions
    recorded at checkpoint ``k`` are bit-identical to a fresh ``k``-estimator
    fit's.  Trees are not retained.

    Returns an (n_checkpoints, n_val) array of unclipped ensemble values.
    """
    n, F = X.shape
    n_val = X_val.shape[0]
    f_train = np.full(n, baseline)
    sum_val = np.zeros(n_val)
    n_ck = checkpoints.shape[0]
    val_raw = np.zeros((n_ck, n_val))

    cap = 2 * n + 1
    feat = np.full(cap, -1, dtype=np.int64)
    thr = np.zeros(cap)
    left = np.zeros(cap, dtype=np.int64)
    right = np.zeros(cap, dtype=np.int64)
    leaf = np.zeros(cap)

    resid = np.empty(n)
    pred = np.empty(n)
    vpred = np.empty(n_val)
    keys_n = np.empty(n)
    go_left = np.zeros(n, dtype=np.bool_)
    tmp_l = np.empty(n, dtype=np.int64)
    tmp_r = np.empty(n, dtype=np.int64)
    keys_f = np.empty(F)
    cand = np.empty(F, dtype=np.int64)
    in_sample = np.zeros(n, dtype=np.bool_)
    k_sub = int(np.ceil(subsample * n))

    base_sidx = _presort(X)
    sidx = np.empty_like(base_sidx)
    ck = 0
    if ck < n_ck and checkpoints[ck] == 0:
        for i in range(n_val):
            val_raw[ck, i] = baseline
        ck += 1
    for stage in range(n_estimators):
        state = seeds[stage]
        if subsample < 1.0:
            state = sm64_fill(state, keys_n)
            order = np.argsort(keys_n, kind="mergesort")
            for i in range(n):
                in_sample[i] = False
            for i in range(k_sub):
                in_sample[order[i]] = True
            _select_sample(base_sidx, in_sample, k_sub, sidx)
            n_rows = k_sub
        else:
            sidx[:, :] = base_sidx
            n_rows = n
        for i in range(n):
            resid[i] = y[i] - f_train[i]
        nn, state = build_tree(
            X, resid, sidx, n_rows, depth_limit, max_features, state,
            feat, thr, left, right, leaf, go_left, tmp_l, tmp_r, keys_f, cand,
        )
        tree_apply(feat, thr, left, right, leaf, X, pred)
        for i in range(n):
            f_train[i] += learning_rate * pred[i]
        tree_apply(feat, thr, left, right, leaf, X_val, vpred)
        for i in range(n_val):
            sum_val[i] += vpred[i]
        if ck < n_ck and checkpoints[ck] == stage + 1:
            for i in range(n_val):
                val_raw[ck, i] = baseline + learning_rate * sum_val[i]
            ck += 1
    return val_raw


@njit(cache=True)
def ensemble_apply(feat, thr, left, right, leaf, offsets, X, learning_rate,
                   baseline, clip_at_zero, out):
    """Predict a whole matrix through a packed ensemble.

    The packed form concatenates all trees' node arrays; ``offsets[t]`` is
    tree t's root index and child indices are pre-shifted to global positions.
    """
    n_trees = offsets.shape[0] - 1
    for r in range(X.shape[0]):
        acc = 0.0
        for t in range(n_trees):
            node = offsets[t]
            while feat[node] >= 0:
                if X[r, feat[node]] <= thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            acc += leaf[node]
        value = baseline + learning_rate * acc
        if clip_at_zero and value < 0.0:
            value = 0.0
        out[r] = value
