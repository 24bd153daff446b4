"""External clustering quality: purity, NMI and feature-mask recovery."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import LengthMismatch


def contingency(pred, truth) -> np.ndarray:
    """``counts[i, j]`` = rows in predicted cluster ``i`` with true label ``j``.

    Both inputs may hold arbitrary hashable ids; rows and columns follow the
    sorted unique ids.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise LengthMismatch(f"lengths differ: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise LengthMismatch("need at least one row")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    counts = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    return counts


def purity(pred, truth) -> float:
    counts = contingency(pred, truth)
    return float(counts.max(axis=1).sum() / counts.sum())


def _entropy(marginal, n):
    p = marginal[marginal > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth) -> float:
    """Mutual information over the geometric mean of the two entropies.

    Two single-group partitions count as identical (1.0); if exactly one
    side has zero entropy the score is 0.0.
    """
    counts = contingency(pred, truth)
    n = counts.sum()
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    h_pred = _entropy(rows, n)
    h_true = _entropy(cols, n)
    if h_pred == 0.0 and h_true == 0.0:
        return 1.0
    if h_pred == 0.0 or h_true == 0.0:
        return 0.0
    i, j = np.nonzero(counts)
    c = counts[i, j]
    mi = float((c / n * np.log(c * n / (rows[i] * cols[j]))).sum())
    return float(min(1.0, max(0.0, mi / np.sqrt(h_pred * h_true))))


def jaccard(a, b) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def mask_recovery(planted, recovered) -> float:
    """Best one-to-one matching of planted to recovered masks, scored by mean
    Jaccard similarity over ``max(K, K')`` clusters (unmatched ones score 0)."""
    planted = np.atleast_2d(np.asarray(planted, dtype=bool))
    recovered = np.atleast_2d(np.asarray(recovered, dtype=bool))
    if planted.shape[1] != recovered.shape[1]:
        raise LengthMismatch("mask widths differ")
    sim = np.array([[jaccard(p, r) for r in recovered] for p in planted])
    rows, cols = linear_sum_assignment(sim, maximize=True)
    size = max(planted.shape[0], recovered.shape[0])
    return float(sim[rows, cols].sum() / size)
