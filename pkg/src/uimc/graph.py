"""Affinity symmetrization and embedding into the full instance set.

A view-local square affinity only covers that view's presented instances.
Scattering its symmetrized absolute values to the original column positions
yields an (m, m) graph whose Laplacian is comparable across views of
different sizes.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EmbeddedLaplacian:
    """Symmetric nonnegative affinity with its degree matrix and Laplacian."""

    affinity: np.ndarray   # (m, m), zero on rows/columns of missing instances
    degrees: np.ndarray    # (m,) row sums of the affinity
    laplacian: np.ndarray  # diag(degrees) - affinity


def embed_affinity(a, indicator):
    """Embed a (k_v, k_v) affinity into the full (m, m) instance graph.

    The affinity is symmetrized as (|A| + |A^T|) / 2 and its entries are
    placed at the presented original positions; everything else stays zero.
    This equals the dense product form with the 0/1 indicator because each
    indicator row selects exactly one original column.
    """
    k = indicator.k
    if a.shape != (k, k):
        raise ValueError(f"affinity shape {a.shape} does not match {k} presented instances")
    m = indicator.m
    sym = 0.5 * (np.abs(a) + np.abs(a.T))
    w = np.zeros((m, m))
    if k:
        w[np.ix_(indicator.presented, indicator.presented)] = sym
    deg = w.sum(axis=1)
    lap = np.diag(deg) - w
    return EmbeddedLaplacian(affinity=w, degrees=deg, laplacian=lap)
