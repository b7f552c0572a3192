import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssclp.exceptions import ParameterError
from ssclp.metrics import clustering_error
from ssclp.spectral import normalized_laplacian, spectral_cluster


def _components(W):
    """Union-find count of connected components among non-isolated vertices."""
    N = W.shape[0]
    parent = list(range(N))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in zip(*np.nonzero(W)):
        parent[find(i)] = find(j)
    active = [i for i in range(N) if W[i].any()]
    return len({find(i) for i in active})


@given(st.integers(0, 10_000), st.integers(3, 14), st.floats(0.0, 0.5))
def test_zero_eigenvalues_count_components(seed, N, density):
    rng = np.random.default_rng(seed)
    W = np.triu((rng.random((N, N)) < density) * rng.random((N, N)), 1)
    W = W + W.T
    Lsym, _ = normalized_laplacian(W)
    evals = np.linalg.eigvalsh(Lsym)
    assert np.all(evals > -1e-10)
    assert np.sum(np.abs(evals) < 1e-9) == _components(W)


def test_block_diagonal_graph_is_recovered():
    rng = np.random.default_rng(0)
    sizes = [10, 15, 20]
    labels = np.repeat([1, 2, 3], sizes)
    W = (labels[:, None] == labels[None, :]) * rng.random((45, 45))
    W = W + W.T
    np.fill_diagonal(W, 0)
    perm = rng.permutation(45)
    out = spectral_cluster(W[np.ix_(perm, perm)], 3, seed=1)
    assert clustering_error(out.labels, labels[perm]) == 0
    assert set(out.labels) == {1, 2, 3}
    assert out.flags == []


def test_deterministic_under_seed():
    rng = np.random.default_rng(2)
    W = rng.random((30, 30))
    W = W + W.T
    a = spectral_cluster(W, 3, seed=5).labels
    b = spectral_cluster(W, 3, seed=5).labels
    assert np.array_equal(a, b)


def test_flags():
    out = spectral_cluster(np.zeros((4, 4)), 2)
    assert "empty_graph" in out.flags
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = 1.0
    out = spectral_cluster(W, 2)
    assert "isolated_vertices=2" in out.flags


@pytest.mark.parametrize("W,L", [(np.ones((3, 2)), 2), (np.ones((3, 3)), 4),
                                 (-np.ones((3, 3)), 2), (np.triu(np.ones((3, 3))), 2)])
def test_rejects_bad_input(W, L):
    with pytest.raises(ParameterError):
        spectral_cluster(W, L)
