"""Hot evaluation kernels with numba-jitted and pure-numpy twins.

Every kernel exists twice: ``<name>_np`` (vectorized numpy) and, when numba
is importable, ``<name>_nb`` (@njit). The public names dispatch to the jitted
version unless the environment variable ``DNFNET_DISABLE_NUMBA`` is set to
1/true/yes. Both paths perform the same counting and the same float
operations in the same order, so results are bit-identical; the parity tests
and ``benchmarks/bench_kernels.py`` rely on that.

Conjunction encoding is CSR-style: term ``t`` owns literals
``lit_feature[term_off[t]:term_off[t+1]]`` with matching ``lit_negated``
polarities. A term with no literals is constant true; zero terms means the
constant-false formula.
"""

import os

import numpy as np

NUMBA_DISABLED = os.environ.get("DNFNET_DISABLE_NUMBA", "").lower() in (
    "1",
    "true",
    "yes",
)

try:
    if NUMBA_DISABLED:
        raise ImportError
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# conjunction_hits: truth of each term on each sample row
# ---------------------------------------------------------------------------

def conjunction_hits_np(X, lit_feature, lit_negated, term_off):
    """Return bool[N, T]: hits[i, t] iff every literal of term t holds on row i."""
    n = X.shape[0]
    n_terms = term_off.shape[0] - 1
    hits = np.ones((n, n_terms), dtype=np.bool_)
    for t in range(n_terms):
        col = hits[:, t]
        for k in range(term_off[t], term_off[t + 1]):
            j = lit_feature[k]
            if lit_negated[k]:
                col &= ~X[:, j]
            else:
                col &= X[:, j]
    return hits


def _conjunction_hits_loop(X, lit_feature, lit_negated, term_off):
    n = X.shape[0]
    n_terms = term_off.shape[0] - 1
    hits = np.ones((n, n_terms), dtype=np.bool_)
    for t in range(n_terms):
        for k in range(term_off[t], term_off[t + 1]):
            j = lit_feature[k]
            want = not lit_negated[k]
            for i in range(n):
                if X[i, j] != want:
                    hits[i, t] = False
    return hits


# ---------------------------------------------------------------------------
# truth_table_agreement: count assignments of {0,1}^d where two DNFs agree
# ---------------------------------------------------------------------------
# Terms are encoded as uint64 bitmask pairs (required-one bits, required-zero
# bits); assignment a satisfies a term iff (a & pos) == pos and (a & neg) == 0.

def truth_table_agreement_np(pos_a, neg_a, pos_b, neg_b, d):
    total = 1 << d
    assigns = np.arange(total, dtype=np.uint64)
    eval_a = np.zeros(total, dtype=np.bool_)
    for pos, neg in zip(pos_a, neg_a):
        eval_a |= ((assigns & pos) == pos) & ((assigns & neg) == 0)
    eval_b = np.zeros(total, dtype=np.bool_)
    for pos, neg in zip(pos_b, neg_b):
        eval_b |= ((assigns & pos) == pos) & ((assigns & neg) == 0)
    return int(np.count_nonzero(eval_a == eval_b))


def _truth_table_agreement_loop(pos_a, neg_a, pos_b, neg_b, d):
    total = 1 << d
    zero = np.uint64(0)
    agree = 0
    for a in range(total):
        av = np.uint64(a)
        va = False
        for t in range(pos_a.shape[0]):
            if (av & pos_a[t]) == pos_a[t] and (av & neg_a[t]) == zero:
                va = True
                break
        vb = False
        for t in range(pos_b.shape[0]):
            if (av & pos_b[t]) == pos_b[t] and (av & neg_b[t]) == zero:
                vb = True
                break
        if va == vb:
            agree += 1
    return agree


# ---------------------------------------------------------------------------
# subset_correct_counts: agreement counts for every subset-disjunction
# ---------------------------------------------------------------------------

def subset_correct_counts_np(cover, y):
    """Correct-prediction count for the OR of every subset of cover rows.

    cover: bool[T, N] per-record truth on N samples; y: bool[N] targets.
    Returns int64[2**T] indexed by subset bitmask (mask 0 = constant false).
    Memory is O(2**T * N); callers cap T (power-set limit).
    """
    n_rec = cover.shape[0]
    n = cover.shape[1]
    n_masks = 1 << n_rec
    table = np.zeros((n_masks, n), dtype=np.bool_)
    for mask in range(1, n_masks):
        low = mask & -mask
        table[mask] = table[mask ^ low] | cover[low.bit_length() - 1]
    counts = np.empty(n_masks, dtype=np.int64)
    step = 4096
    for start in range(0, n_masks, step):
        stop = min(start + step, n_masks)
        counts[start:stop] = (table[start:stop] == y[np.newaxis, :]).sum(
            axis=1, dtype=np.int64
        )
    return counts


def _subset_correct_counts_loop(cover, y):
    n_rec = cover.shape[0]
    n = cover.shape[1]
    n_masks = 1 << n_rec
    table = np.zeros((n_masks, n), dtype=np.bool_)
    counts = np.zeros(n_masks, dtype=np.int64)
    c0 = 0
    for i in range(n):
        if not y[i]:
            c0 += 1
    counts[0] = c0
    for mask in range(1, n_masks):
        low = mask & -mask
        bit = 0
        m = low
        while m > 1:
            m >>= 1
            bit += 1
        parent = mask ^ low
        c = 0
        for i in range(n):
            v = table[parent, i] or cover[bit, i]
            table[mask, i] = v
            if v == y[i]:
                c += 1
        counts[mask] = c
    return counts


# ---------------------------------------------------------------------------
# gini_gains: impurity decrease of the 0/1 split on each feature
# ---------------------------------------------------------------------------

def gini_gains_np(X, y):
    """Gini impurity decrease at this node for splitting on each feature.

    Returns float64[d]; -1.0 marks invalid splits (an empty side).
    """
    n = X.shape[0]
    c1 = X.sum(axis=0, dtype=np.int64)
    pos1 = X[y].sum(axis=0, dtype=np.int64)
    npos = np.int64(np.count_nonzero(y))
    c0 = n - c1
    pos0 = npos - pos1

    nf = float(n)
    q = npos / nf
    r = (n - npos) / nf
    g_parent = 1.0 - q * q - r * r

    gains = np.full(X.shape[1], -1.0, dtype=np.float64)
    valid = (c1 > 0) & (c1 < n)
    if not np.any(valid):
        return gains
    with np.errstate(divide="ignore", invalid="ignore"):
        c1f = c1.astype(np.float64)
        c0f = c0.astype(np.float64)
        q1 = pos1 / c1f
        r1 = (c1 - pos1) / c1f
        g1 = 1.0 - q1 * q1 - r1 * r1
        q0 = pos0 / c0f
        r0 = (c0 - pos0) / c0f
        g0 = 1.0 - q0 * q0 - r0 * r0
        all_gains = g_parent - (c0f / nf) * g0 - (c1f / nf) * g1
    gains[valid] = all_gains[valid]
    return gains


def _gini_gains_loop(X, y):
    n = X.shape[0]
    d = X.shape[1]
    c1 = np.zeros(d, dtype=np.int64)
    pos1 = np.zeros(d, dtype=np.int64)
    npos = 0
    for i in range(n):
        if y[i]:
            npos += 1
        for j in range(d):
            if X[i, j]:
                c1[j] += 1
                if y[i]:
                    pos1[j] += 1

    nf = float(n)
    q = npos / nf
    r = (n - npos) / nf
    g_parent = 1.0 - q * q - r * r

    gains = np.full(d, -1.0, dtype=np.float64)
    for j in range(d):
        if c1[j] == 0 or c1[j] == n:
            continue
        c1f = float(c1[j])
        c0f = float(n - c1[j])
        q1 = pos1[j] / c1f
        r1 = (c1[j] - pos1[j]) / c1f
        g1 = 1.0 - q1 * q1 - r1 * r1
        p0 = npos - pos1[j]
        q0 = p0 / c0f
        r0 = ((n - c1[j]) - p0) / c0f
        g0 = 1.0 - q0 * q0 - r0 * r0
        gains[j] = g_parent - (c0f / nf) * g0 - (c1f / nf) * g1
    return gains


if NUMBA_ENABLED:
    conjunction_hits_nb = njit(cache=True)(_conjunction_hits_loop)
    truth_table_agreement_nb = njit(cache=True)(_truth_table_agreement_loop)
    subset_correct_counts_nb = njit(cache=True)(_subset_correct_counts_loop)
    gini_gains_nb = njit(cache=True)(_gini_gains_loop)

    conjunction_hits = conjunction_hits_nb
    truth_table_agreement = truth_table_agreement_nb
    subset_correct_counts = subset_correct_counts_nb
    gini_gains = gini_gains_nb
else:
    conjunction_hits = conjunction_hits_np
    truth_table_agreement = truth_table_agreement_np
    subset_correct_counts = subset_correct_counts_np
    gini_gains = gini_gains_np
