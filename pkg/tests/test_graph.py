import numpy as np
import pytest

from uimc import build_indicator
from uimc.graph import embed_affinity


def dense_formula(a, ind):
    """Literal product form of the embedded affinity, used as an oracle."""
    dense = ind.entries
    w = 0.5 * (np.abs(dense.T @ a @ dense) + np.abs(dense.T @ a.T @ dense))
    lap = np.diag(w.sum(axis=1)) - w
    return w, lap


def test_zero_affinity():
    ind = build_indicator([0, 2], 4)
    emb = embed_affinity(np.zeros((2, 2)), ind)
    assert not emb.affinity.any()
    assert not emb.laplacian.any()


def test_identity_indicator_symmetric_nonneg_is_noop():
    rng = np.random.default_rng(0)
    a = np.abs(rng.normal(size=(5, 5)))
    a = 0.5 * (a + a.T)
    emb = embed_affinity(a, build_indicator(range(5), 5))
    np.testing.assert_allclose(emb.affinity, a, atol=1e-15)


def test_hand_example():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    emb = embed_affinity(a, build_indicator([0, 1], 2))
    np.testing.assert_allclose(emb.affinity, [[0.0, 0.5], [0.5, 0.0]])
    np.testing.assert_allclose(emb.degrees, [0.5, 0.5])
    np.testing.assert_allclose(emb.laplacian, [[0.5, -0.5], [-0.5, 0.5]])


def test_matches_dense_product_formula():
    rng = np.random.default_rng(1)
    for _ in range(10):
        m = int(rng.integers(4, 15))
        k = int(rng.integers(1, m + 1))
        ind = build_indicator(np.sort(rng.choice(m, size=k, replace=False)), m)
        a = rng.normal(size=(k, k))
        emb = embed_affinity(a, ind)
        w, lap = dense_formula(a, ind)
        np.testing.assert_allclose(emb.affinity, w, atol=1e-12)
        np.testing.assert_allclose(emb.laplacian, lap, atol=1e-12)


def test_missing_rows_zero():
    ind = build_indicator([1, 3], 5)
    emb = embed_affinity(np.ones((2, 2)), ind)
    for i in (0, 2, 4):
        assert not emb.affinity[i].any()
        assert not emb.affinity[:, i].any()


def test_psd_witness():
    rng = np.random.default_rng(2)
    ind = build_indicator(np.sort(rng.choice(12, size=8, replace=False)), 12)
    a = rng.normal(size=(8, 8))
    emb = embed_affinity(a, ind)
    w = emb.affinity
    for _ in range(100):
        x = rng.normal(size=12)
        quad = x @ emb.laplacian @ x
        pairwise = 0.5 * np.sum(w * (x[:, None] - x[None, :]) ** 2)
        assert quad >= -1e-10
        np.testing.assert_allclose(quad, pairwise, atol=1e-9)


def test_trace_invariant_under_index_permutation():
    rng = np.random.default_rng(3)
    m, k, c = 10, 6, 3
    presented = np.sort(rng.choice(m, size=k, replace=False))
    ind = build_indicator(presented, m)
    a = rng.normal(size=(k, k))
    f = np.linalg.qr(rng.normal(size=(m, c)))[0]
    base = float(np.trace(f.T @ embed_affinity(a, ind).laplacian @ f))

    perm = rng.permutation(k)
    a_perm = a[np.ix_(perm, perm)]
    dense_perm = ind.entries[perm]
    w = 0.5 * (np.abs(dense_perm.T @ a_perm @ dense_perm)
               + np.abs(dense_perm.T @ a_perm.T @ dense_perm))
    lap = np.diag(w.sum(axis=1)) - w
    np.testing.assert_allclose(float(np.trace(f.T @ lap @ f)), base, atol=1e-10)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        embed_affinity(np.zeros((3, 3)), build_indicator([0, 1], 4))
    with pytest.raises(ValueError):
        embed_affinity(np.zeros((2, 3)), build_indicator([0, 1], 4))
