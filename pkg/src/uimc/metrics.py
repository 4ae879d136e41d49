"""Clustering evaluation: accuracy under optimal matching, NMI, purity.

All three scores are invariant to relabeling the predicted clusters.
Accuracy maximizes the matched fraction over label bijections via the
Hungarian assignment on the contingency table; NMI normalizes mutual
information by the geometric mean of the two label entropies (natural log,
so the ratio is base-free) and is defined as 0 when either labeling is
constant.
"""

import numpy as np
from scipy.optimize import linear_sum_assignment


def _check_pair(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=np.int64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if y_true.size != y_pred.size:
        raise ValueError(f"label lengths differ: {y_true.size} vs {y_pred.size}")
    if y_true.size == 0:
        raise ValueError("empty label arrays")
    if y_true.min() < 0 or y_pred.min() < 0:
        raise ValueError("labels must be dense 0-based integers")
    return y_true, y_pred


def contingency(y_true, y_pred):
    """Dense contingency table with rows = truth classes, cols = predicted."""
    y_true, y_pred = _check_pair(y_true, y_pred)
    n_t = int(y_true.max()) + 1
    n_p = int(y_pred.max()) + 1
    table = np.zeros((n_t, n_p), dtype=np.int64)
    np.add.at(table, (y_true, y_pred), 1)
    return table


def accuracy(y_true, y_pred):
    """Best-match clustering accuracy in [0, 1]."""
    table = contingency(y_true, y_pred)
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum()) / float(np.asarray(y_true).size)


def _entropy(counts, m):
    p = counts[counts > 0] / m
    return float(-(p * np.log(p)).sum())


def nmi(y_true, y_pred):
    """Normalized mutual information in [0, 1]."""
    table = contingency(y_true, y_pred)
    m = table.sum()
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    h_true = _entropy(row, m)
    h_pred = _entropy(col, m)
    if h_true == 0.0 or h_pred == 0.0:
        return 0.0
    nz = table > 0
    n_ij = table[nz].astype(float)
    outer = np.outer(row, col)[nz].astype(float)
    mi = float((n_ij / m * np.log(n_ij * m / outer)).sum())
    value = mi / np.sqrt(h_true * h_pred)
    return float(min(max(value, 0.0), 1.0))


def purity(y_true, y_pred):
    """Fraction of instances matching the majority truth class of their
    predicted cluster."""
    table = contingency(y_true, y_pred)
    return float(table.max(axis=0).sum()) / float(table.sum())


def evaluate(y_true, y_pred):
    """All three metrics as a dict."""
    return {
        "acc": accuracy(y_true, y_pred),
        "nmi": nmi(y_true, y_pred),
        "purity": purity(y_true, y_pred),
    }
