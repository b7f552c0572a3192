import numpy as np
import pytest
from scipy.spatial import ConvexHull

from ssclp import certify as cert
from ssclp.certify import InradiusMethod, Verdict
from ssclp.exceptions import ParameterError
from ssclp.l1core import solve_bp
from ssclp.model import (GenerationMode, ObservationPattern, CaseTag,
                         ensemble_from_bases, generate_ensemble, sample_case1,
                         sample_case2, sample_case3, zero_fill)


def _hull_inradius(A):
    """Distance from the origin to the nearest facet of conv(+-A)."""
    hull = ConvexHull(np.hstack([A, -A]).T)
    return float(np.min(-hull.equations[:, -1]))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_cross_polytope(d):
    r, exact = cert.inradius(np.eye(d))
    assert exact and r == pytest.approx(1 / np.sqrt(d), abs=1e-9)


def test_exact_matches_qhull(rng):
    for d in (2, 3, 4):
        for _ in range(5):
            A = rng.standard_normal((d, 9))
            assert cert.inradius(A)[0] == pytest.approx(_hull_inradius(A), abs=1e-9)


def test_bounds_bracket_exact(rng):
    for _ in range(10):
        A = rng.standard_normal((3, 8))
        exact, _ = cert.inradius(A)
        upper, is_exact = cert.inradius(A, InradiusMethod.SAMPLED, samples=20000)
        lower, _ = cert.inradius(A, InradiusMethod.LOWER)
        assert not is_exact
        assert lower <= exact + 1e-12 <= upper + 2e-12


def test_lower_bound_in_higher_dimension(rng):
    A = rng.standard_normal((6, 30))
    lower, exact = cert.inradius(A, InradiusMethod.LOWER)
    upper, _ = cert.inradius(A, InradiusMethod.SAMPLED, samples=20000)
    assert not exact and 0 < lower <= upper


def test_exact_requires_full_span():
    with pytest.raises(ParameterError):
        cert.inradius(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(ParameterError):
        cert.inradius(np.eye(5))


def test_span_inradius_is_rotation_invariant(rng):
    A = rng.standard_normal((3, 7))
    Qm = np.linalg.qr(rng.standard_normal((6, 3)))[0]
    r, exact, k = cert.span_inradius(Qm @ A)
    assert k == 3 and exact
    assert r == pytest.approx(cert.inradius(A)[0], abs=1e-9)


def test_alpha_exists_matches_grid_scan(rng):
    grid = np.linspace(0, 1, 10_000)
    for _ in range(200):
        t1, t2, r = rng.random(3) * [1, 1, 1.5] + [0, 0, 0.1]
        scan = bool(np.any((t1 < grid * r) & (t2 <= (1 - grid) * r)))
        exists = cert.alpha_exists(t1, t2, r)
        if abs(t1 / r + t2 / r - 1) > 1e-3:  # away from the grid-resolution boundary
            assert exists == scan


def test_lemma1_true_and_false(rng):
    T = np.arange(4)
    A = np.hstack([rng.standard_normal((2, 4)), 0.01 * rng.standard_normal((2, 3))])
    y = A[:, :2] @ np.array([0.7, -0.4])
    sol = solve_bp(A, y)
    S = np.flatnonzero(np.abs(sol.c) > 1e-12)
    if np.all(np.isin(S, T)):
        assert cert.check_lemma1(A, y, sol.c, sol.nu, S, T)
    # large out-of-T column must be used and the lemma must fail
    A2 = np.hstack([A[:, :4], 100 * A[:, :1]])
    c = np.zeros(5)
    c[0], c[1] = 0.7, -0.4
    nu = solve_bp(A2, y).nu
    assert not cert.check_lemma1(A2, y, c, nu, [0, 1], [0, 1, 2, 3])


def test_lemma1_validates_inputs():
    with pytest.raises(ParameterError):
        cert.check_lemma1(np.eye(2), np.ones(2), np.ones(2), np.ones(2), [0, 1], [0])


def _orthogonal(N_per=6):
    I = np.eye(9)
    return ensemble_from_bases([I[:, :3], I[:, 3:6], I[:, 6:]], N_per, seed=2)


def test_orthogonal_full_observation_case1_is_certified():
    ens, X = _orthogonal()
    pat = sample_case1(9, X.shape[1], 1.0)
    ds = zero_fill(X, pat, ens.labels)
    report = cert.certify_points(ens, pat, ds, 1)
    assert report.counts()[Verdict.CERTIFIED] == X.shape[1]
    for i in range(X.shape[1]):
        col, _ = cert.ssc_lp_column(ds, i)
        assert np.all(np.abs(col[ens.labels != ens.labels[i]]) < 1e-9)


def test_case3_orthogonal_full_overlap_keeps_out_of_span_term():
    # T1 vanishes but T2 is the full norm of the other basis, so the
    # sufficient condition cannot hold when every row is shared.
    ens, X = _orthogonal()
    pat = sample_case1(9, X.shape[1], 1.0)
    ds = zero_fill(X, pat, ens.labels)
    e = cert.check_case3(ens, pat, ds, 0)
    assert e.verdict is Verdict.NOT_CERTIFIED
    assert e.max_lhs == pytest.approx(1.0 / e.inradius)


def test_case3_certifies_disjoint_other_subspace_masks():
    rng = np.random.default_rng(0)
    U = [np.linalg.qr(rng.standard_normal((12, 2)))[0] for _ in range(2)]
    ens, X = ensemble_from_bases(U, 8, seed=1)
    first, second = np.arange(8), np.arange(6, 12)
    masks = [first] * 8 + [second] * 8
    masks[0] = np.arange(5)  # point 0 shares no row with subspace 2
    pat = ObservationPattern(list(masks), CaseTag.RANDOM_PER_COLUMN, 12)
    ds = zero_fill(X, pat, ens.labels)
    e = cert.check_case3(ens, pat, ds, 0)
    assert e.verdict is Verdict.CERTIFIED and e.max_lhs == 0 and e.alpha is not None
    col, _ = cert.ssc_lp_column(ds, 0)
    assert np.all(np.abs(col[8:]) <= 1e-9)


def test_hypothesis_violations():
    ens, X = generate_ensemble(10, 2, 2, 8, GenerationMode.ORTHONORMAL, seed=0)
    pat3 = sample_case3(10, 16, 0.5, seed=0)
    assert cert.check_case1(ens, pat3, 0).verdict is Verdict.HYPOTHESIS_VIOLATED
    assert cert.check_case2(ens, pat3, 0).verdict is Verdict.HYPOTHESIS_VIOLATED
    pat2 = sample_case2(10, 16, 2, seed=0)
    ds2 = zero_fill(X, pat2, ens.labels)
    assert cert.check_case3(ens, pat2, ds2, 0).verdict is Verdict.HYPOTHESIS_VIOLATED


def test_tilde_dictionary_rotates_restricted_points():
    ens, X = generate_ensemble(8, 2, 2, 10, GenerationMode.ORTHONORMAL, seed=3)
    pat = sample_case2(8, 20, 2, seed=3)
    ds = zero_fill(X, pat, ens.labels)
    A_t, a_hat, Q, same = cert.tilde_dictionary(ens, pat, 0)
    rows = pat.masks[0]
    np.testing.assert_allclose(Q @ A_t, ds.zero_filled[np.ix_(rows, same)], atol=1e-12)
    np.testing.assert_allclose(Q @ a_hat, X[rows, 0], atol=1e-12)


def test_coherence_diagnostic_is_rms_of_lhs(rng):
    ens, _ = generate_ensemble(12, 3, 2, 4, GenerationMode.ORTHONORMAL, seed=4)
    omega = np.arange(6)
    value = cert.coherence_diagnostic(ens, omega, 1, 2)
    M = np.linalg.pinv(ens.bases[0][omega]) @ ens.bases[1][omega]
    lam = rng.standard_normal((200_000, 3))
    lam /= np.linalg.norm(lam, axis=1, keepdims=True)
    a = rng.standard_normal((200_000, 3))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    rms = np.sqrt(np.mean(np.einsum("ij,jk,ik->i", lam, M, a) ** 2))
    assert value == pytest.approx(rms, rel=0.02)


def test_certificate_record_format():
    ens, X = _orthogonal(4)
    pat = sample_case1(9, X.shape[1], 1.0)
    entry = cert.check_case1(ens, pat, 0)
    rec = entry.to_record()
    assert rec.startswith("point=0 subspace=1 case=1 verdict=certified")
    assert "\n" not in rec


def test_small_soundness_run():
    from ssclp.bench import CertifyConfig, run_certify
    cfg = CertifyConfig(n=10, d=2, L=2, N_per=8, p=0.7, trials=1, master_seed=1)
    for case in (1, 2, 3):
        table, records = run_certify(cfg, case)
        assert table[(True, False)] == 0
        assert sum(table.values()) == 16 == len(records)


def test_reduced_certificate_passes_lemma1_on_orthogonal_data():
    ens, X = _orthogonal()
    others = np.arange(1, X.shape[1])
    A, y = X[:, others], X[:, 0]
    T = np.flatnonzero(ens.labels[others] == 1)
    c, nu, S = cert.reduced_certificate(A, y, T)
    np.testing.assert_allclose(A @ c, y, atol=1e-10)
    assert np.all(np.isin(S, T))
    assert cert.check_lemma1(A, y, c, nu, S, T)
