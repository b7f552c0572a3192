"""Pure NumPy implementations of the hot kernels.

These mirror ``_kernels.pyx`` line for line and are used when the compiled
extension is not available (or when ``SSCLP_PURE_PYTHON=1``).
"""
from itertools import combinations

import numpy as np

OPTIMAL = 0
INFEASIBLE = 1
FAILED = 2

_REFACTOR_EVERY = 64
_DEGENERATE_LIMIT = 50


def _column(A, j, m, sgn):
    """Column ``j`` of the extended matrix ``[A, -A, diag(sgn)]``."""
    if j < m:
        return A[:, j]
    if j < 2 * m:
        return -A[:, j - m]
    e = np.zeros(A.shape[0])
    e[j - 2 * m] = sgn[j - 2 * m]
    return e


def _refactor(A, basis, m, sgn, y):
    B = np.column_stack([_column(A, j, m, sgn) for j in basis])
    Binv = np.linalg.inv(B)
    xB = Binv @ y
    np.maximum(xB, 0.0, out=xB)
    return Binv, xB


def _run_phase(A, y, basis, Binv, xB, phase, sgn, piv_tol, opt_tol,
               feas_tol, max_iter, it):
    r, m = A.shape
    n_struct = 2 * m
    in_basis = np.zeros(n_struct + r, dtype=bool)
    in_basis[basis] = True
    degenerate = 0
    while it < max_iter:
        if it % _REFACTOR_EVERY == _REFACTOR_EVERY - 1:
            Binv, xB = _refactor(A, basis, m, sgn, y)
        cB = np.array([(0.0 if j >= n_struct else 1.0) if phase == 2
                       else (1.0 if j >= n_struct else 0.0) for j in basis])
        pi = Binv.T @ cB
        g = A.T @ pi
        base = 1.0 if phase == 2 else 0.0
        d = np.concatenate([base - g, base + g])
        d[in_basis[:n_struct]] = 0.0
        if degenerate > _DEGENERATE_LIMIT:
            cand = np.flatnonzero(d < -opt_tol)
            if cand.size == 0:
                return OPTIMAL, basis, Binv, xB, pi, it
            q = int(cand[0])
        else:
            q = int(np.argmin(d))
            if d[q] >= -opt_tol:
                return OPTIMAL, basis, Binv, xB, pi, it
        w = Binv @ _column(A, q, m, sgn)
        pos = w > piv_tol
        if not pos.any():
            return FAILED, basis, Binv, xB, pi, it
        # Harris two-pass ratio test
        theta_max = np.min((xB[pos] + feas_tol) / w[pos])
        rows = np.flatnonzero(pos)
        ok = rows[xB[rows] / w[rows] <= theta_max]
        if degenerate > _DEGENERATE_LIMIT:
            p = int(ok[np.argmin(np.asarray(basis)[ok])])
        else:
            p = int(ok[np.argmax(w[ok])])
        theta = max(xB[p] / w[p], 0.0)
        degenerate = degenerate + 1 if theta <= feas_tol else 0
        xB -= theta * w
        xB[p] = theta
        np.maximum(xB, 0.0, out=xB)
        in_basis[basis[p]] = False
        in_basis[q] = True
        basis[p] = q
        rowp = Binv[p] / w[p]
        Binv -= np.outer(w, rowp)
        Binv[p] = rowp
        it += 1
    return FAILED, basis, Binv, xB, None, it


def bp_simplex(A, y, piv_tol=1e-9, opt_tol=1e-9, feas_tol=1e-10,
               max_iter=20000):
    """Two-phase revised simplex for ``min |c|_1 s.t. A c = y``.

    Returns ``(status, c, nu, iterations)`` where ``nu`` is the equality
    dual (a vertex of ``{nu : |A^T nu|_inf <= 1}`` at optimality).
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    r, m = A.shape
    scale = max(1.0, float(np.max(np.abs(y))))
    feas_abs = feas_tol * scale
    sgn = np.where(y >= 0, 1.0, -1.0)
    basis = list(range(2 * m, 2 * m + r))
    Binv = np.diag(sgn)
    xB = np.abs(y).copy()

    status, basis, Binv, xB, pi, it = _run_phase(
        A, y, basis, Binv, xB, 1, sgn, piv_tol, opt_tol, feas_abs,
        max_iter, 0)
    if status != OPTIMAL:
        return FAILED, np.zeros(m), np.zeros(r), it
    art = sum(xB[k] for k, j in enumerate(basis) if j >= 2 * m)
    if art > 1e3 * feas_abs * r:
        return INFEASIBLE, np.zeros(m), np.zeros(r), it

    # drive zero-level artificials out of the basis
    for p, j in enumerate(list(basis)):
        if j < 2 * m:
            continue
        row = Binv[p] @ A
        row_ext = np.concatenate([row, -row])
        row_ext[[b for b in basis if b < 2 * m]] = 0.0
        k = int(np.argmax(np.abs(row_ext)))
        if abs(row_ext[k]) <= 1e-7:
            continue  # redundant row, artificial stays at zero
        w = Binv @ _column(A, k, m, sgn)
        rowp = Binv[p] / w[p]
        Binv -= np.outer(w, rowp)
        Binv[p] = rowp
        xB[p] = 0.0
        basis[p] = k
    Binv, xB = _refactor(A, basis, m, sgn, y)

    status, basis, Binv, xB, pi, it = _run_phase(
        A, y, basis, Binv, xB, 2, sgn, piv_tol, opt_tol, feas_abs,
        max_iter, it)
    if status != OPTIMAL:
        return FAILED, np.zeros(m), np.zeros(r), it
    x = np.zeros(2 * m)
    for k, j in enumerate(basis):
        if j < 2 * m:
            x[j] = xB[k]
    return OPTIMAL, x[:m] - x[m:], pi, it


def lasso_cd(A, y, lam, c, tol, max_iter):
    """Coordinate descent for ``lam |c|_1 + 0.5 |A c - y|^2``.

    ``c`` is the warm start and is not modified. Returns
    ``(c, kkt_residual, sweeps)``.
    """
    A = np.asarray(A, dtype=np.float64)
    c = np.array(c, dtype=np.float64)
    col_sq = np.einsum("ij,ij->j", A, A)
    res = y - A @ c
    m = A.shape[1]
    kkt = np.inf
    sweeps = 0
    while sweeps < max_iter:
        for active_only in (False, True):
            inner = 0
            while True:
                idx = np.flatnonzero(c) if active_only else range(m)
                delta = 0.0
                for j in idx:
                    if col_sq[j] == 0.0:
                        continue
                    rho = A[:, j] @ res + col_sq[j] * c[j]
                    new = np.sign(rho) * max(abs(rho) - lam, 0.0) / col_sq[j]
                    if new != c[j]:
                        diff = new - c[j]
                        res -= diff * A[:, j]
                        delta = max(delta, abs(diff) * np.sqrt(col_sq[j]))
                        c[j] = new
                inner += 1
                if not active_only or delta <= 0.1 * tol or inner >= 200:
                    break
        sweeps += 1
        kkt = _kkt_residual(A, res, c, lam)
        if kkt <= tol:
            break
    return c, kkt, sweeps


def _kkt_residual(A, res, c, lam):
    grad = -(A.T @ res)
    nz = c != 0
    out = np.where(nz, np.abs(grad + lam * np.sign(c)),
                   np.maximum(np.abs(grad) - lam, 0.0))
    return float(out.max()) if out.size else 0.0


def polar_vertex_max(A, feas_tol=1e-9, sing_tol=1e-12):
    """Largest-norm vertex of ``{lam : |A^T lam|_inf <= 1}``.

    Enumerates every ``d``-subset of columns and every sign pattern (up to
    a global sign). Returns ``(max_norm, lam)``; ``max_norm`` is ``inf``
    when no vertex exists.
    """
    A = np.asarray(A, dtype=np.float64)
    d, m = A.shape
    signs = np.array([(1.0,) + s for s in
                      np.ndindex(*(2,) * (d - 1))], dtype=np.float64)
    signs[:, 1:] = 1.0 - 2.0 * signs[:, 1:]
    scale = max(float(np.max(np.abs(A))), 1e-300)
    best, best_lam = -1.0, None
    chunk = 20000
    subsets = combinations(range(m), d)
    while True:
        block = np.array([s for _, s in zip(range(chunk), subsets)],
                         dtype=np.intp)
        if block.size == 0:
            break
        M = np.transpose(A[:, block], (1, 2, 0))  # K x d x d, rows a_j^T
        det = np.linalg.det(M / scale)
        keep = np.abs(det) > sing_tol
        if not keep.any():
            continue
        M = M[keep]
        lam = np.linalg.solve(M[:, None, :, :],
                              np.broadcast_to(signs, (M.shape[0],) + signs.shape)[..., None])[..., 0]
        lam = lam.reshape(-1, d)
        norms = np.einsum("ij,ij->i", lam, lam)
        order = np.argsort(-norms, kind="stable")
        for k in order:
            if norms[k] <= best:
                break
            if np.max(np.abs(A.T @ lam[k])) <= 1.0 + feas_tol:
                best, best_lam = norms[k], lam[k].copy()
                break
    if best_lam is None:
        return np.inf, np.zeros(d)
    return float(np.sqrt(best)), best_lam
