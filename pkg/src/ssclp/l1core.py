"""Equality-constrained l1 minimization, its dual, and the lasso.

``solve_bp`` runs the compiled simplex kernel and certifies the answer
(primal feasibility, dual feasibility and duality gap) before reporting
``OPTIMAL``. A failed certificate retries with HiGHS, and the retry must
pass the same certificate.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .exceptions import InfeasibleDualError, NumericalFailure, ParameterError

FEAS_TOL = 1e-8
DUAL_GAP_TOL = 1e-7


class SolveStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class L1Solution:
    c: np.ndarray
    nu: np.ndarray | None
    status: SolveStatus
    backend: str = ""

    @property
    def objective(self):
        return float(np.abs(self.c).sum())


def _as_problem(A, y):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if A.shape[0] != y.shape[0]:
        raise ParameterError(f"A has {A.shape[0]} rows but y has length {y.shape[0]}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ParameterError("A must have at least one row and one column")
    return A, y


def certify_bp(A, y, c, nu, feas_tol=FEAS_TOL, dual_gap_tol=DUAL_GAP_TOL):
    """Primal feasibility, dual feasibility and strong duality checks."""
    if nu is None or not np.all(np.isfinite(c)) or not np.all(np.isfinite(nu)):
        return False
    ny = np.linalg.norm(y)
    if np.linalg.norm(A @ c - y) > feas_tol * (1.0 + ny):
        return False
    obj = np.abs(c).sum()
    if abs(obj - y @ nu) > dual_gap_tol * (1.0 + obj):
        return False
    return np.max(np.abs(A.T @ nu)) <= 1.0 + dual_gap_tol


def _highs_bp(A, y):
    m = A.shape[1]
    res = linprog(np.ones(2 * m), A_eq=np.hstack([A, -A]), b_eq=y,
                  bounds=(0, None), method="highs")
    if res.status == 2:
        return SolveStatus.INFEASIBLE, None, None
    if res.status != 0:
        return SolveStatus.NUMERICAL_FAILURE, None, None
    return SolveStatus.OPTIMAL, res.x[:m] - res.x[m:], np.asarray(res.eqlin.marginals)


def solve_bp(A, y, feas_tol=FEAS_TOL, dual_gap_tol=DUAL_GAP_TOL):
    """Solve ``min |c|_1 s.t. A c = y`` with its equality dual.

    Returns an :class:`L1Solution`; ``nu`` maximizes ``<y, nu>`` subject to
    ``|A^T nu|_inf <= 1`` whenever the status is ``OPTIMAL``.
    """
    A, y = _as_problem(A, y)
    r, m = A.shape
    if not np.any(y):
        return L1Solution(np.zeros(m), np.zeros(r), SolveStatus.OPTIMAL, "trivial")

    status, c, nu, _ = kernels.bp_simplex(A, y)
    if status == kernels.OPTIMAL and certify_bp(A, y, c, nu, feas_tol, dual_gap_tol):
        return L1Solution(c, nu, SolveStatus.OPTIMAL, kernels.BACKEND)
    if status == kernels.INFEASIBLE:
        c_ls = np.linalg.lstsq(A, y, rcond=None)[0]
        if np.linalg.norm(A @ c_ls - y) > feas_tol * (1.0 + np.linalg.norm(y)):
            return L1Solution(np.zeros(m), None, SolveStatus.INFEASIBLE, kernels.BACKEND)

    status, c, nu = _highs_bp(A, y)
    if status is SolveStatus.OPTIMAL and certify_bp(A, y, c, nu, feas_tol, dual_gap_tol):
        return L1Solution(c, nu, status, "highs")
    if status is SolveStatus.INFEASIBLE:
        return L1Solution(np.zeros(m), None, status, "highs")
    return L1Solution(np.zeros(m), None, SolveStatus.NUMERICAL_FAILURE, "highs")


def solve_dual_direction(a, B, tol=DUAL_GAP_TOL):
    """Maximize ``<a, lam>`` subject to ``|B^T lam|_inf <= 1``.

    Returns the basic (vertex) maximizer reached by the simplex method.
    Raises :class:`InfeasibleDualError` when the objective is unbounded,
    i.e. ``a`` is outside the span of the columns of ``B``.
    """
    sol = solve_bp(B, a, dual_gap_tol=tol)
    if sol.status is SolveStatus.INFEASIBLE:
        raise InfeasibleDualError("dual objective unbounded: target outside span(B)")
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure("dual direction LP failed")
    return sol.nu


def solve_lasso(A, y, lam, tol=1e-8, max_iter=100000, c0=None):
    """Minimize ``lam |c|_1 + 0.5 |A c - y|^2``.

    Convergence is certified by the subgradient optimality residual
    ``max_j |A_j^T (A c - y) + lam s_j|`` with ``s_j`` in ``sign(c_j)``.
    """
    A, y = _as_problem(A, y)
    if not lam > 0:
        raise ParameterError("lasso weight must be positive")
    c0 = np.zeros(A.shape[1]) if c0 is None else np.asarray(c0, dtype=np.float64)
    c, kkt, sweeps = kernels.lasso_cd(A, y, float(lam), c0, float(tol), int(max_iter))
    if kkt > tol:
        raise NumericalFailure("lasso coordinate descent did not converge",
                               residual=kkt, sweeps=sweeps)
    return c


def lasso_residual(A, y, lam, c):
    """Subgradient optimality residual of ``c`` for the lasso."""
    grad = A.T @ (A @ c - y)
    nz = c != 0
    out = np.where(nz, np.abs(grad + lam * np.sign(c)),
                   np.maximum(np.abs(grad) - lam, 0.0))
    return float(out.max()) if out.size else 0.0


def brute_force_l1(A, y, max_support=None, tol=1e-9):
    """Exhaustive l1 minimization over supports of size <= ``max_support``.

    An optimal basic solution has at most ``rows`` nonzeros, so the default
    ``max_support = rows`` is exact. Desk scale only (``m <= 15``).
    """
    A, y = _as_problem(A, y)
    r, m = A.shape
    k_max = r if max_support is None else int(max_support)
    if m > 15 or k_max > r:
        raise ParameterError("brute force limited to m <= 15 and max_support <= rows")
    best_c, best_obj = None, np.inf
    scale = tol * (1.0 + np.linalg.norm(y))
    if np.linalg.norm(y) <= scale:
        return L1Solution(np.zeros(m), None, SolveStatus.OPTIMAL, "brute")
    for k in range(1, k_max + 1):
        for S in combinations(range(m), k):
            AS = A[:, S]
            if np.linalg.matrix_rank(AS) < k:
                continue
            cS = np.linalg.lstsq(AS, y, rcond=None)[0]
            if np.linalg.norm(AS @ cS - y) > scale * 1e2:
                continue
            obj = np.abs(cS).sum()
            if obj < best_obj:
                best_obj = obj
                best_c = np.zeros(m)
                best_c[list(S)] = cS
    if best_c is None:
        return L1Solution(np.zeros(m), None, SolveStatus.INFEASIBLE, "brute")
    return L1Solution(best_c, None, SolveStatus.OPTIMAL, "brute")
