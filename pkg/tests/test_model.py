import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssclp.exceptions import ParameterError
from ssclp.model import (CaseTag, GenerationMode, ObservationPattern,
                         ensemble_from_bases, generate_ensemble, sample_case1,
                         sample_case2, sample_case3, zero_fill)


@pytest.mark.parametrize("mode", list(GenerationMode))
def test_ensemble_invariants(mode):
    ens, X = generate_ensemble(20, 3, 4, [5, 6, 7, 8], mode, seed=3)
    assert X.shape == (20, 26)
    assert ens.counts == [5, 6, 7, 8]
    assert list(np.bincount(ens.labels)[1:]) == [5, 6, 7, 8]
    for U, A, s in zip(ens.bases, ens.coefficients, ens.scales):
        np.testing.assert_allclose(U.T @ U, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(A, axis=0), 1.0, atol=1e-10)
        assert np.all(s > 0)
    np.testing.assert_allclose(ens.matrix(), X, atol=1e-10)


def test_orthonormal_mode_has_unit_columns():
    _, X = generate_ensemble(10, 2, 2, 15, GenerationMode.ORTHONORMAL, seed=1)
    np.testing.assert_allclose(np.linalg.norm(X, axis=0), 1.0, atol=1e-12)


def test_gaussian_mode_is_product_of_gaussians():
    # Columns of each block lie in a d-dimensional subspace and are not normalized.
    _, X = generate_ensemble(30, 3, 2, 40, GenerationMode.GAUSSIAN, seed=2)
    for block in (X[:, :40], X[:, 40:]):
        s = np.linalg.svd(block, compute_uv=False)
        assert s[3] < 1e-10 * s[0]
    assert np.ptp(np.linalg.norm(X, axis=0)) > 0.5


def test_generation_is_deterministic_and_seed_dependent():
    _, a = generate_ensemble(10, 2, 2, 5, seed=9)
    _, b = generate_ensemble(10, 2, 2, 5, seed=9)
    _, c = generate_ensemble(10, 2, 2, 5, seed=10)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_invalid_dimensions():
    with pytest.raises(ParameterError):
        generate_ensemble(2, 3, 1, 5)
    with pytest.raises(ParameterError):
        generate_ensemble(5, 2, 2, [3])


@pytest.mark.parametrize("p,expected", [(0.1, 5), (0.12, 6), (0.08, 4), (0.26, 13), (1.0, 50)])
def test_case1_support_size(p, expected):
    pat = sample_case1(50, 7, p)
    assert pat.case_tag is CaseTag.SAME_SUPPORT
    assert all(m.size == expected for m in pat.masks)
    assert all(np.array_equal(m, pat.masks[0]) for m in pat.masks)


@pytest.mark.parametrize("p,expected", [(0.25, 13), (0.27, 14), (0.38, 19), (0.5, 25)])
def test_case3_support_size_rounds_half_up(p, expected):
    pat = sample_case3(50, 9, p, seed=4)
    assert all(m.size == expected for m in pat.masks)


def test_case3_masks_independent_and_deterministic():
    a = sample_case3(40, 30, 0.5, seed=1)
    b = sample_case3(40, 30, 0.5, seed=1)
    assert all(np.array_equal(x, y) for x, y in zip(a.masks, b.masks))
    assert len({tuple(m) for m in a.masks}) > 25


def test_case3_mask_marginals_are_uniform():
    pat = sample_case3(10, 4000, 0.3, seed=0)
    freq = pat.to_matrix().mean(axis=1)
    np.testing.assert_allclose(freq, 0.3, atol=0.03)


def test_case2_has_exactly_d_rows():
    pat = sample_case2(12, 20, 3, seed=5)
    assert pat.case_tag is CaseTag.EXACTLY_D
    assert all(m.size == 3 for m in pat.masks)


@given(n=st.integers(1, 60), N=st.integers(1, 20),
       p=st.floats(0.02, 1.0), seed=st.integers(0, 2**31))
def test_case3_masks_are_valid(n, N, p, seed):
    k = math.floor(round(p * n, 9) + 0.5)
    if k == 0:
        with pytest.raises(ParameterError):
            sample_case3(n, N, p, seed)
        return
    pat = sample_case3(n, N, p, seed)
    M = pat.to_matrix()
    assert M.shape == (n, N)
    assert np.all(M.sum(axis=0) == k)
    back = ObservationPattern.from_matrix(M)
    assert all(np.array_equal(x, y) for x, y in zip(back.masks, pat.masks))


@pytest.mark.parametrize("p", [0.0, -0.1, 1.5])
def test_invalid_sampling_ratio(p):
    with pytest.raises(ParameterError):
        sample_case3(10, 3, p)
    with pytest.raises(ParameterError):
        sample_case1(10, 3, p)


def test_pattern_rejects_bad_masks():
    with pytest.raises(ParameterError):
        ObservationPattern([np.array([2, 1])], CaseTag.RANDOM_PER_COLUMN, 4)
    with pytest.raises(ParameterError):
        ObservationPattern([np.array([], dtype=int)], CaseTag.RANDOM_PER_COLUMN, 4)
    with pytest.raises(ParameterError):
        ObservationPattern([np.array([0, 4])], CaseTag.RANDOM_PER_COLUMN, 4)


def test_zero_fill():
    ens, X = generate_ensemble(8, 2, 2, 4, seed=0)
    pat = sample_case3(8, 8, 0.5, seed=0)
    ds = zero_fill(X, pat, ens.labels)
    M = pat.to_matrix()
    assert np.array_equal(ds.zero_filled[M], X[M])
    assert np.all(ds.zero_filled[~M] == 0)
    assert np.array_equal(ds.full_matrix, X)
    with pytest.raises(ParameterError):
        zero_fill(X[:, :3], pat)


def test_ensemble_from_bases_orthogonal():
    I = np.eye(6)
    ens, X = ensemble_from_bases([I[:, :2], I[:, 2:4], I[:, 4:]], 5, seed=1)
    assert X.shape == (6, 15)
    np.testing.assert_allclose(np.linalg.norm(X, axis=0), 1.0)
    assert np.allclose(X[2:, :5], 0) and np.allclose(X[:2, 5:], 0)
