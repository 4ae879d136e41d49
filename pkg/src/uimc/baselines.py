"""Baseline clusterers: best single view (BSV) and feature concatenation.

Both first mean-fill the missing columns, then run seeded k-means.  BSV
clusters each view separately and reports the best view; "best" means
highest accuracy when ground truth is available, otherwise lowest k-means
objective, and the result records which selection rule was used.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans

from . import metrics
from .dataset import mean_fill


@dataclass
class BaselineResult:
    """Labels plus BSV bookkeeping (per-view labels, chosen view)."""

    labels: np.ndarray
    per_view_labels: list = field(default_factory=list)
    chosen_view: int | None = None
    selection: str | None = None  # "accuracy" or "objective" (BSV only)


def _kmeans(points, c, seed):
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array")
    if points.shape[0] < c:
        raise ValueError(f"{points.shape[0]} points cannot form {c} clusters")
    km = KMeans(n_clusters=c, init="k-means++", n_init=10, random_state=seed)
    labels = km.fit_predict(points)
    return labels, float(km.inertia_)


def kmeans(points, c, seed):
    """Seeded k-means labels for an (n, d) point matrix.

    k-means++ initialization, best of 10 restarts by within-cluster sum of
    squares; deterministic for a fixed seed.
    """
    labels, _ = _kmeans(points, c, seed)
    return labels


def bsv(incomplete, c, seed, truth=None):
    """Mean-fill, cluster each view separately, report the best view."""
    filled = mean_fill(incomplete)
    per_view = []
    scores = []
    for x in filled.views:
        labels, inertia = _kmeans(x.T, c, seed)
        per_view.append(labels)
        if truth is not None:
            scores.append(metrics.accuracy(truth, labels))
        else:
            scores.append(-inertia)  # higher is better either way
    best = int(np.argmax(scores))  # argmax keeps the lowest index on ties
    return BaselineResult(
        labels=per_view[best],
        per_view_labels=per_view,
        chosen_view=best,
        selection="accuracy" if truth is not None else "objective",
    )


def concat(incomplete, c, seed):
    """Mean-fill, stack all views' features per instance, cluster once."""
    filled = mean_fill(incomplete)
    stacked = np.vstack(filled.views)  # (sum d_v, m)
    labels, _ = _kmeans(stacked.T, c, seed)
    return BaselineResult(labels=labels)
