"""Rank surrogate, row-sparsity norm, and their solver-facing operators.

The rank surrogate sums sigma / (sigma + gamma) over singular values; for
small gamma it tracks the rank much more closely than the nuclear norm.
Its proximal operator has no closed form, but splitting the scalar
objective into a difference of convex functions gives a one-line iteration
per singular value that converges in a handful of steps.
"""

from dataclasses import dataclass

import numpy as np

# singular values at or below this are treated as exactly zero when the
# surrogate's gradient is evaluated
_SV_FLOOR = 1e-12


@dataclass(frozen=True)
class ProxParams:
    """Parameters of the rank-surrogate proximal operator."""

    gamma: float
    omega: float              # quadratic weight, typically view_weight * penalty
    max_inner_iters: int = 50
    inner_tol: float = 1e-8

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.max_inner_iters < 1:
            raise ValueError("max_inner_iters must be at least 1")
        if self.inner_tol < 0:
            raise ValueError("inner_tol must be nonnegative")


def gamma_norm(a, gamma):
    """Sum of sigma_i / (sigma_i + gamma) over the singular values of ``a``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    sv = np.linalg.svd(np.atleast_2d(a), compute_uv=False)
    return float(np.sum(sv / (sv + gamma)))


def l21_norm(e):
    """Sum of Euclidean row norms."""
    return float(np.sqrt(np.sum(np.atleast_2d(e) ** 2, axis=1)).sum())


def _surrogate_gradient(sigma, gamma):
    s = np.where(sigma <= _SV_FLOOR, 0.0, sigma)
    return gamma / (gamma + s) ** 2


def dc_shrink(sigma_t, params):
    """Per-singular-value DC iteration for the rank-surrogate prox.

    Starting from the data value, each step moves against the surrogate's
    gradient scaled by 1/omega and clips at zero:

        sigma <- max(sigma_t - grad(sigma) / omega, 0)

    Because the surrogate is concave in sigma, each step is a
    majorize-minimize update, so the prox objective never increases along
    the iteration.  The scalar objective can have a second basin at zero
    that the iteration cannot reach from the data value; the prox operator
    is the global minimizer, so the stationary point is compared against
    the zero candidate and the better one is returned.
    """
    sigma_t = np.asarray(sigma_t, dtype=float)
    sigma = sigma_t.copy()
    for _ in range(params.max_inner_iters):
        grad = _surrogate_gradient(sigma, params.gamma)
        nxt = np.maximum(sigma_t - grad / params.omega, 0.0)
        if np.all(np.abs(nxt - sigma) <= params.inner_tol):
            sigma = nxt
            break
        sigma = nxt

    def value(s):
        return s / (s + params.gamma) + 0.5 * params.omega * (s - sigma_t) ** 2

    return np.where(value(sigma) <= value(np.zeros_like(sigma)), sigma, 0.0)


def prox_gamma_norm(t, params):
    """Minimize ``gamma_norm(Q) + omega/2 * ||Q - T||_F^2`` over Q.

    The minimizer shares T's singular vectors; only the singular values are
    shrunk, each by :func:`dc_shrink`.
    """
    t = np.atleast_2d(np.asarray(t, dtype=float))
    u, sv, vt = np.linalg.svd(t, full_matrices=False)
    shrunk = dc_shrink(sv, params)
    return (u * shrunk) @ vt


def reweighting_diag(e_prev, eps=1e-8):
    """Diagonal weights 1 / (row norm + eps) used by the row-sparse error
    update; eps keeps zero rows finite."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    row_norms = np.sqrt(np.sum(np.atleast_2d(e_prev) ** 2, axis=1))
    return 1.0 / (row_norms + eps)
