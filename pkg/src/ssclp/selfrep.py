"""Self-representation coefficients and affinities for SSC-LP, SSC-EWZF and
TSC on zero-filled data."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalFailure, ParameterError
from .l1core import SolveStatus, solve_bp, solve_lasso

SSC_LP = "SSC-LP"
SSC_EWZF = "SSC-EWZF"
TSC = "TSC"
ALGORITHMS = (SSC_LP, SSC_EWZF, TSC)


@dataclass
class CoefficientMatrix:
    C: np.ndarray
    status: list
    algorithm: str
    parameters: dict = field(default_factory=dict)

    @property
    def n_failed(self):
        return sum(s is not SolveStatus.OPTIMAL for s in self.status)


def _column_problem(Z, masks, i):
    """Rows of column ``i``'s mask, dictionary of the other columns, and the
    indices of dictionary columns that are not identically zero there."""
    rows = masks[i]
    sub = Z[rows]
    y = sub[:, i].copy()
    others = np.concatenate([np.arange(i), np.arange(i + 1, Z.shape[1])])
    A = sub[:, others]
    keep = np.flatnonzero(np.any(A != 0.0, axis=0))
    return np.ascontiguousarray(A[:, keep]), y, others[keep]


def ssc_lp_coefficients(dataset, normalize_columns=False, feas_tol=1e-8):
    """Column-wise basis pursuit restricted to each column's observed rows."""
    Z = dataset.zero_filled
    masks = dataset.pattern.masks
    N = Z.shape[1]
    if N < 2:
        raise ParameterError("need at least two columns")
    C = np.zeros((N, N))
    status = []
    for i in range(N):
        A, y, idx = _column_problem(Z, masks, i)
        if not np.any(y):
            status.append(SolveStatus.NUMERICAL_FAILURE)
            continue
        if idx.size == 0:
            status.append(SolveStatus.INFEASIBLE)
            continue
        if normalize_columns:
            col_norm = np.linalg.norm(A, axis=0)
            y_norm = np.linalg.norm(y)
            sol = solve_bp(A / col_norm, y / y_norm, feas_tol=feas_tol)
            c = sol.c * y_norm / col_norm
        else:
            sol = solve_bp(A, y, feas_tol=feas_tol)
            c = sol.c
        status.append(sol.status)
        if sol.status is SolveStatus.OPTIMAL:
            C[idx, i] = c
    return CoefficientMatrix(C, status, SSC_LP,
                             {"normalize_columns": bool(normalize_columns),
                              "feas_tol": feas_tol})


def ewzf_weight(Z, alpha):
    """l1 weight of the per-column lasso for tuning constant ``alpha``.

    The regularization parameter ``alpha / max_{i != j} |x_i^T x_j|`` weights
    the data-fit term of ``|c|_1 + (reg/2)|x - X c|^2``; dividing through gives
    the l1 weight ``max_{i != j} |x_i^T x_j| / alpha`` of the solver's form.
    """
    G = np.abs(Z.T @ Z)
    np.fill_diagonal(G, 0.0)
    mu = float(G.max()) if G.size else 0.0
    if mu == 0.0:
        raise ParameterError("zero-filled data has no nonzero off-diagonal Gram entry")
    return mu / alpha


def ssc_ewzf_coefficients(dataset, alpha=7.34, tol=1e-6, max_iter=20000):
    """Per-column lasso restricted to each column's observed rows."""
    Z = dataset.zero_filled
    masks = dataset.pattern.masks
    N = Z.shape[1]
    lam = ewzf_weight(Z, alpha)
    C = np.zeros((N, N))
    status = []
    for i in range(N):
        A, y, idx = _column_problem(Z, masks, i)
        if idx.size == 0:
            status.append(SolveStatus.NUMERICAL_FAILURE)
            continue
        scale = max(1.0, float(np.max(np.abs(A.T @ y))))
        try:
            c = solve_lasso(A, y, lam, tol=tol * scale, max_iter=max_iter)
        except NumericalFailure:
            status.append(SolveStatus.NUMERICAL_FAILURE)
            continue
        C[idx, i] = c
        status.append(SolveStatus.OPTIMAL)
    return CoefficientMatrix(C, status, SSC_EWZF,
                             {"alpha": alpha, "l1_weight": lam, "tol": tol})


def tsc_neighbors(N_per):
    """Neighbor count ``round(sqrt(N_l log N_l))``."""
    return int(round(math.sqrt(N_per * math.log(N_per))))


def tsc_affinity(dataset, N_per=None, q=None):
    """Thresholded absolute correlations of normalized zero-filled columns.

    Each column keeps its ``q`` largest correlations (raw magnitudes as
    weights) and the result is symmetrized with an elementwise maximum.
    Returns ``(W, q, warnings)``.
    """
    Z = dataset.zero_filled
    N = Z.shape[1]
    if q is None:
        if N_per is None:
            counts = dataset.meta.get("counts")
            if not counts:
                raise ParameterError("points per subspace unknown; pass N_per or q")
            N_per = float(np.mean(counts))
        q = tsc_neighbors(N_per)
    q = int(min(max(q, 1), N - 1))
    norms = np.linalg.norm(Z, axis=0)
    notes = []
    zero = norms == 0.0
    if zero.any():
        notes.append(f"{int(zero.sum())} unobserved column(s) have zero affinity")
    Xh = Z / np.where(zero, 1.0, norms)
    corr = np.abs(Xh.T @ Xh)
    np.fill_diagonal(corr, -1.0)
    top = np.argsort(-corr, axis=0, kind="stable")[:q]
    W = np.zeros((N, N))
    cols = np.broadcast_to(np.arange(N), top.shape)
    W[top, cols] = corr[top, cols]
    np.fill_diagonal(W, 0.0)
    W[zero, :] = 0.0
    W[:, zero] = 0.0
    W = np.maximum(W, W.T)
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return W, q, notes


def affinity_from_coefficients(coeffs):
    C = coeffs.C if isinstance(coeffs, CoefficientMatrix) else np.asarray(coeffs)
    A = np.abs(C)
    return A + A.T
