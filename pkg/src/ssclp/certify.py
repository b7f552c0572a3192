"""Numerical certificates for correct SSC-LP support on concrete instances.

Each ``check_case*`` evaluates a deterministic sufficient condition for
point ``i`` (0-based column index) and records the quantities behind the
verdict. A ``CERTIFIED`` verdict is sound: the in-radius used on the
right-hand side is either exact or a guaranteed lower bound, never the
sampled upper bound.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exceptions import InfeasibleDualError, NumericalFailure, ParameterError
from .l1core import solve_bp, solve_dual_direction, SolveStatus

CERT_MARGIN = 1e-6
SUPPORT_TOL = 1e-6
EXACT_MAX_DIM = 4


class Verdict(str, enum.Enum):
    CERTIFIED = "certified"
    NOT_CERTIFIED = "not_certified"
    HYPOTHESIS_VIOLATED = "hypothesis_violated"


class InradiusMethod(str, enum.Enum):
    EXACT = "exact"
    SAMPLED = "sampled"
    LOWER = "lower"


@dataclass
class RestrictedBasis:
    V: np.ndarray
    Q: np.ndarray
    sigma: np.ndarray
    R: np.ndarray
    subspace: int | None
    rows: np.ndarray


@dataclass
class CertificateEntry:
    point: int
    subspace: int
    case: int
    verdict: Verdict
    inradius: float = float("nan")
    inradius_exact: bool = False
    max_lhs: float = float("nan")
    worst_pair: tuple | None = None
    dual_direction: np.ndarray | None = None
    alpha: float | None = None
    lambda_nonunique: bool = False
    worst_case_pass: bool | None = None
    coherence: float | None = None
    reason: str = ""
    notes: list = field(default_factory=list)

    def to_record(self):
        pair = "-" if self.worst_pair is None else f"{self.worst_pair[0]}:{self.worst_pair[1]}"
        fields = [
            f"point={self.point}", f"subspace={self.subspace}", f"case={self.case}",
            f"verdict={self.verdict.value}",
            f"inradius={self.inradius:.10g}",
            f"exact={'yes' if self.inradius_exact else 'no'}",
            f"max_lhs={self.max_lhs:.10g}", f"pair={pair}",
            f"alpha={'-' if self.alpha is None else format(self.alpha, '.6g')}",
            f"nonunique={'yes' if self.lambda_nonunique else 'no'}",
        ]
        if self.worst_case_pass is not None:
            fields.append(f"worst_case={'pass' if self.worst_case_pass else 'fail'}")
        if self.reason:
            fields.append(f"reason={self.reason}")
        if self.notes:
            fields.append("notes=" + ";".join(self.notes))
        return " ".join(fields)


@dataclass
class CertificateReport:
    entries: list

    def counts(self):
        out = {v: 0 for v in Verdict}
        for e in self.entries:
            out[e.verdict] += 1
        return out

    def to_text(self):
        return "\n".join(e.to_record() for e in self.entries) + "\n"


# ---------------------------------------------------------------------------
# geometry

def restricted_basis(U, rows_i, rows_j=None, subspace=None):
    """Rows ``rows_i`` of ``U`` with rows outside ``rows_j`` zeroed."""
    rows_i = np.asarray(rows_i, dtype=np.intp)
    V = np.array(U[rows_i], dtype=np.float64)
    if rows_j is not None:
        V[~np.isin(rows_i, rows_j)] = 0.0
    Q, s, Rt = np.linalg.svd(V, full_matrices=False)
    return RestrictedBasis(V, Q, s, Rt.T, subspace, rows_i)


def _span_coordinates(A, tol=1e-10):
    """Coordinates of the columns of ``A`` in an orthonormal basis of their span."""
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        return np.zeros((0, A.shape[1] if A.ndim == 2 else 0))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    k = int(np.sum(s > tol * max(s[0], 1e-300))) if s.size else 0
    return U[:, :k].T @ A


def inradius(A, method=InradiusMethod.EXACT, samples=100000, seed=0):
    """In-radius of the symmetrized convex hull of the columns of ``A``.

    ``exact`` enumerates the vertices of the polar polytope (``d <= 4``,
    columns spanning ``R^d``) and inverts its circumradius. ``sampled``
    minimizes the support function over random unit directions, an upper
    bound. ``lower`` is the sound bound ``sigma_min(A_S)/sqrt(d)`` over a
    pivoted basis subset ``S`` and the full matrix. Returns
    ``(value, is_exact)``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    d, m = A.shape
    method = InradiusMethod(method)
    if method is InradiusMethod.EXACT:
        if d > EXACT_MAX_DIM:
            raise ParameterError(f"exact in-radius limited to d <= {EXACT_MAX_DIM}")
        if m < d or np.linalg.matrix_rank(A) < d:
            raise ParameterError("columns do not span R^d: body has empty interior")
        circ, _ = kernels.polar_vertex_max(A)
        return (0.0 if not np.isfinite(circ) else 1.0 / circ), True
    if method is InradiusMethod.SAMPLED:
        rng = np.random.default_rng(seed)
        best = np.inf
        for start in range(0, int(samples), 20000):
            u = rng.standard_normal((min(20000, int(samples) - start), d))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            best = min(best, float(np.min(np.max(np.abs(u @ A), axis=1))))
        return best, False
    # lower bound
    if m < d or np.linalg.matrix_rank(A) < d:
        return 0.0, False
    from scipy.linalg import qr
    _, _, piv = qr(A, pivoting=True, mode="economic")
    S = A[:, piv[:d]]
    lb_subset = np.linalg.svd(S, compute_uv=False)[-1] / math.sqrt(d)
    lb_full = np.linalg.svd(A, compute_uv=False)[d - 1] / math.sqrt(m)
    return float(max(lb_subset, lb_full)), False


def span_inradius(A, method=None, samples=100000, seed=0):
    """In-radius measured inside the span of the columns.

    Uses the exact method when the span has dimension at most 4 and the
    lower bound otherwise (unless ``method`` forces one). Returns
    ``(value, is_exact, span_dim)``.
    """
    B = _span_coordinates(A)
    k = B.shape[0]
    if k == 0:
        return 0.0, True, 0
    if method is None:
        method = InradiusMethod.EXACT if k <= EXACT_MAX_DIM else InradiusMethod.LOWER
    val, exact = inradius(B, method, samples, seed)
    return val, exact, k


def _full_inradius(A):
    """In-radius in ``R^d`` (zero when the columns do not span it)."""
    d = A.shape[0]
    if A.shape[1] < d or np.linalg.matrix_rank(A) < d:
        return 0.0, True
    method = InradiusMethod.EXACT if d <= EXACT_MAX_DIM else InradiusMethod.LOWER
    return inradius(A, method)


# ---------------------------------------------------------------------------
# per-point helpers

def _point_info(ensemble, i):
    labels = ensemble.labels
    ell = int(labels[i]) - 1
    coefs = np.hstack([A * s for A, s in zip(ensemble.coefficients, ensemble.scales)])
    return labels, ell, coefs


def tilde_dictionary(ensemble, pattern, i):
    """Rotated same-subspace dictionary for point ``i``.

    Returns ``(A_tilde, a_hat, Q_i, same)`` where column ``t`` of ``A_tilde``
    is ``Q_i^T V_{Omega_{i,j}} a_j`` for ``j = same[t]`` and ``a_hat`` is
    ``Sigma_i R_i^T a_i``.
    """
    labels, ell, coefs = _point_info(ensemble, i)
    U = ensemble.bases[ell]
    rows_i = pattern.masks[i]
    Vi = restricted_basis(U, rows_i, subspace=ell)
    same = np.flatnonzero((labels == ell + 1) & (np.arange(labels.size) != i))
    cols = []
    for j in same:
        Vij = restricted_basis(U, rows_i, pattern.masks[j]).V
        cols.append(Vi.Q.T @ (Vij @ coefs[:, j]))
    A_tilde = np.column_stack(cols) if cols else np.zeros((Vi.Q.shape[1], 0))
    a_hat = Vi.sigma * (Vi.R.T @ coefs[:, i])
    return A_tilde, a_hat, Vi.Q, same


def _lambda_nonunique(a, B, lam, seed=0, eps=1e-8, move_tol=1e-4):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(a.shape)
    u *= eps / np.linalg.norm(u)
    try:
        lam2 = solve_dual_direction(a + u, B)
    except NumericalFailure:
        return True
    return bool(np.linalg.norm(lam2 - lam) > move_tol)


def _dual(a, B):
    try:
        return solve_dual_direction(a, B), ""
    except InfeasibleDualError:
        return None, "dual unbounded (target outside span of same-subspace points)"
    except NumericalFailure:
        return None, "dual LP failed"


def check_case1(ensemble, pattern, i, cert_margin=CERT_MARGIN):
    """Common-support condition for point ``i``."""
    labels, ell, coefs = _point_info(ensemble, i)
    d = ensemble.d
    omega = pattern.masks[i]
    entry = CertificateEntry(i, ell + 1, 1, Verdict.HYPOTHESIS_VIOLATED)
    if any(not np.array_equal(m, omega) for m in pattern.masks):
        entry.reason = "masks are not identical"
        return entry
    if omega.size < d:
        entry.reason = "|Omega| < d"
        return entry
    V_l = ensemble.bases[ell][omega]
    if np.linalg.matrix_rank(V_l) < d:
        entry.reason = "restricted basis rank deficient"
        return entry
    same = np.flatnonzero((labels == ell + 1) & (np.arange(labels.size) != i))
    A_minus = coefs[:, same]
    rin, exact = _full_inradius(A_minus)
    entry.inradius, entry.inradius_exact = rin, exact
    lam, why = _dual(coefs[:, i], A_minus)
    if lam is None:
        entry.verdict, entry.reason = Verdict.NOT_CERTIFIED, why
        return entry
    entry.dual_direction = lam
    entry.lambda_nonunique = _lambda_nonunique(coefs[:, i], A_minus, lam, seed=i)
    lam_hat = lam / np.linalg.norm(lam)
    pinv = np.linalg.pinv(V_l)
    worst, pair = 0.0, None
    for k in range(ensemble.L):
        if k == ell:
            continue
        cols = np.flatnonzero(labels == k + 1)
        vals = np.abs(lam_hat @ (pinv @ ensemble.bases[k][omega]) @ coefs[:, cols])
        t = int(np.argmax(vals))
        if vals[t] > worst or pair is None:
            worst, pair = float(vals[t]), (k + 1, int(cols[t]))
    entry.max_lhs, entry.worst_pair = worst, pair
    ok = worst < rin - cert_margin
    entry.verdict = Verdict.CERTIFIED if ok else Verdict.NOT_CERTIFIED
    return entry


def check_case2(ensemble, pattern, i, cert_margin=CERT_MARGIN):
    """Exactly-``d``-observations condition for point ``i``, with the
    operator-norm worst-case variant recorded in ``worst_case_pass``."""
    labels, ell, coefs = _point_info(ensemble, i)
    d = ensemble.d
    rows_i = pattern.masks[i]
    entry = CertificateEntry(i, ell + 1, 2, Verdict.HYPOTHESIS_VIOLATED)
    if rows_i.size != d:
        entry.reason = "|Omega_i| != d"
        return entry
    Vi = restricted_basis(ensemble.bases[ell], rows_i)
    if Vi.sigma[-1] <= 1e-10 * max(Vi.sigma[0], 1e-300):
        entry.reason = "restricted basis singular"
        return entry
    A_tilde, a_hat, Q, same = tilde_dictionary(ensemble, pattern, i)
    rin, exact = _full_inradius(A_tilde)
    entry.inradius, entry.inradius_exact = rin, exact
    lam, why = _dual(a_hat, A_tilde)
    worst_op, op_pair = 0.0, None
    worst, pair = 0.0, None
    lam_hat = None if lam is None else lam / np.linalg.norm(lam)
    for j in np.flatnonzero(labels != ell + 1):
        k = int(labels[j]) - 1
        M = Q.T @ restricted_basis(ensemble.bases[k], rows_i, pattern.masks[j]).V
        scale = ensemble.scales[k][j - int(np.sum(ensemble.counts[:k]))]
        op = float(np.linalg.norm(M, 2)) * scale
        if op > worst_op or op_pair is None:
            worst_op, op_pair = op, (k + 1, int(j))
        if lam_hat is not None:
            v = abs(float(lam_hat @ (M @ coefs[:, j])))
            if v > worst or pair is None:
                worst, pair = v, (k + 1, int(j))
    entry.worst_case_pass = worst_op < rin - cert_margin
    if lam is None:
        entry.verdict, entry.reason = Verdict.NOT_CERTIFIED, why
        entry.max_lhs, entry.worst_pair = worst_op, op_pair
        return entry
    entry.dual_direction = lam
    entry.lambda_nonunique = _lambda_nonunique(a_hat, A_tilde, lam, seed=i)
    entry.max_lhs, entry.worst_pair = worst, pair
    ok = worst < rin - cert_margin
    entry.verdict = Verdict.CERTIFIED if ok else Verdict.NOT_CERTIFIED
    return entry


def check_case3(ensemble, pattern, dataset, i, cert_margin=CERT_MARGIN):
    """General-support condition for point ``i``.

    Certified when ``(T1 + T2)/r < 1 - margin`` for every other-subspace
    point, where ``T1``/``T2`` are the operator norms of the in-span and
    out-of-span parts of its restricted basis and ``r`` is the in-radius of
    the same-subspace restricted points. The witnessing split weight of the
    tightest pair is recorded in ``alpha``.
    """
    labels, ell, coefs = _point_info(ensemble, i)
    d = ensemble.d
    rows_i = pattern.masks[i]
    entry = CertificateEntry(i, ell + 1, 3, Verdict.HYPOTHESIS_VIOLATED)
    entry.notes.append("body read as untransposed restricted columns")
    if rows_i.size <= d:
        entry.reason = "|Omega_i| <= d"
        return entry
    Vi = restricted_basis(ensemble.bases[ell], rows_i)
    if Vi.sigma[-1] <= 1e-10 * max(Vi.sigma[0], 1e-300):
        entry.reason = "restricted basis not full column rank"
        return entry
    Q = Vi.Q
    same = np.flatnonzero((labels == ell + 1) & (np.arange(labels.size) != i))
    X_same = dataset.zero_filled[np.ix_(rows_i, same)]
    r, exact, _ = span_inradius(X_same)
    entry.inradius, entry.inradius_exact = r, exact
    if r <= 0.0:
        entry.verdict, entry.reason = Verdict.NOT_CERTIFIED, "zero in-radius"
        return entry
    P_perp = np.eye(rows_i.size) - Q @ Q.T
    worst, pair, t_pair = -1.0, None, (0.0, 0.0)
    for j in np.flatnonzero(labels != ell + 1):
        k = int(labels[j]) - 1
        V = restricted_basis(ensemble.bases[k], rows_i, pattern.masks[j]).V
        scale = ensemble.scales[k][j - int(np.sum(ensemble.counts[:k]))]
        t1 = float(np.linalg.norm(Q.T @ V, 2)) * scale
        t2 = float(np.linalg.norm(P_perp @ V, 2)) * scale
        ratio = (t1 + t2) / r
        if ratio > worst:
            worst, pair, t_pair = ratio, (k + 1, int(j)), (t1, t2)
    entry.max_lhs, entry.worst_pair = worst, pair
    t1, t2 = t_pair
    ok = worst < 1.0 - cert_margin
    if alpha_exists(t1, t2, r):
        entry.alpha = min(1.0, 0.5 * (t1 / r + 1.0 - t2 / r))
    entry.verdict = Verdict.CERTIFIED if ok else Verdict.NOT_CERTIFIED
    if not exact:
        entry.notes.append("in-radius is a lower bound (not exact)")
    return entry


def alpha_exists(t1, t2, r):
    """Whether some ``alpha`` in [0, 1] gives ``t1 < alpha r`` and
    ``t2 <= (1 - alpha) r``."""
    return t1 / r + t2 / r < 1.0


def check_lemma1(A, y, c, nu, S, T, tol=1e-9):
    """Dual-certificate test: true implies every l1-optimal solution of
    ``A c = y`` vanishes outside ``T``."""
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    N = A.shape[1]
    S = np.asarray(sorted(S), dtype=np.intp)
    T = np.asarray(sorted(T), dtype=np.intp)
    if not np.all(np.isin(S, T)):
        raise ParameterError("S must be a subset of T")
    if np.linalg.norm(A @ c - y) > tol * (1.0 + np.linalg.norm(y)):
        raise ParameterError("c is not feasible for A c = y")
    outside = np.setdiff1d(np.arange(N), S)
    if np.any(np.abs(c[outside]) > tol):
        raise ParameterError("support of c is not contained in S")
    Tc = np.setdiff1d(np.arange(N), T)
    TnotS = np.setdiff1d(T, S)
    g = A.T @ nu
    if S.size and np.max(np.abs(g[S] - np.sign(c[S]))) > tol:
        return False
    if TnotS.size and np.max(np.abs(g[TnotS])) > 1.0 + tol:
        return False
    if Tc.size and np.max(np.abs(g[Tc])) >= 1.0 - tol:
        return False
    return True


def reduced_certificate(A, y, T, tol=1e-10):
    """Primal/dual pair built from the problem restricted to columns ``T``.

    Solves ``min |b|_1 s.t. A_T b = y``, pads ``b`` with zeros and projects
    the reduced dual onto ``span(A_T)``; the projection leaves ``A_T^T nu``
    unchanged while shrinking inner products with the other columns.
    Returns ``(c, nu, S)`` with ``S`` the support of ``c``; raises
    :class:`NumericalFailure` when the reduced problem is not solvable.
    """
    A = np.asarray(A, dtype=np.float64)
    T = np.asarray(sorted(T), dtype=np.intp)
    sol = solve_bp(A[:, T], y)
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure(f"reduced problem {sol.status.value}")
    U, s, _ = np.linalg.svd(A[:, T], full_matrices=False)
    U = U[:, s > tol * max(s[0], 1e-300)]
    nu = U @ (U.T @ sol.nu)
    b = np.where(np.abs(sol.c) > tol, sol.c, 0.0)
    c = np.zeros(A.shape[1])
    c[T] = b
    return c, nu, T[np.flatnonzero(b)]


def coherence_diagnostic(ensemble, omega, ell, k):
    """``|pinv(V_l) V_k|_F / d`` for bases restricted to rows ``omega``
    (subspace indices 1-based)."""
    V_l = ensemble.bases[ell - 1][omega]
    V_k = ensemble.bases[k - 1][omega]
    s = np.linalg.svd(V_l, compute_uv=False)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        cond = np.inf if s[-1] == 0 else s[0] / s[-1]
        raise ParameterError(f"restricted basis rank deficient (condition number {cond:.3g})")
    return float(np.linalg.norm(np.linalg.pinv(V_l) @ V_k, "fro") / ensemble.d)


def support_is_correct(C, labels, i, tol=SUPPORT_TOL):
    """No coefficient of column ``i`` above ``tol`` on another subspace."""
    col = np.abs(C[:, i])
    other = np.asarray(labels) != labels[i]
    return not bool(np.any(col[other] > tol))


def certify_points(ensemble, pattern, dataset, case, points=None,
                   cert_margin=CERT_MARGIN):
    points = range(pattern.N) if points is None else points
    entries = []
    for i in points:
        if case == 1:
            entries.append(check_case1(ensemble, pattern, i, cert_margin))
        elif case == 2:
            entries.append(check_case2(ensemble, pattern, i, cert_margin))
        elif case == 3:
            entries.append(check_case3(ensemble, pattern, dataset, i, cert_margin))
        else:
            raise ParameterError(f"unknown case {case}")
    return CertificateReport(entries)


def ssc_lp_column(dataset, i):
    """SSC-LP coefficient column ``i`` (unnormalized) as a length-N vector."""
    from .selfrep import _column_problem
    A, y, idx = _column_problem(dataset.zero_filled, dataset.pattern.masks, i)
    out = np.zeros(dataset.N)
    if idx.size == 0:
        status = SolveStatus.INFEASIBLE if np.any(y) else SolveStatus.NUMERICAL_FAILURE
        return out, status
    sol = solve_bp(A, y)
    if sol.status is SolveStatus.OPTIMAL:
        out[idx] = sol.c
    return out, sol.status
