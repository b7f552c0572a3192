# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: basis-pursuit simplex, lasso coordinate descent and
polar-polytope vertex enumeration. ``_fallback.py`` holds the reference
NumPy versions with identical signatures."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, INFINITY

cnp.import_array()

DEF REFACTOR_EVERY = 64
DEF DEGENERATE_LIMIT = 50

cdef int OPTIMAL = 0
cdef int INFEASIBLE = 1
cdef int FAILED = 2


cdef inline double _col_entry(const double[:, ::1] A, Py_ssize_t i,
                              Py_ssize_t j, Py_ssize_t m,
                              const double[::1] sgn) nogil:
    if j < m:
        return A[i, j]
    if j < 2 * m:
        return -A[i, j - m]
    return sgn[i] if i == j - 2 * m else 0.0


cdef int _invert(double[:, ::1] B, double[:, ::1] out) nogil:
    """Gauss-Jordan inverse with partial pivoting; B is destroyed."""
    cdef Py_ssize_t n = B.shape[0], i, j, k, p
    cdef double v, best, f
    for i in range(n):
        for j in range(n):
            out[i, j] = 1.0 if i == j else 0.0
    for k in range(n):
        p = k
        best = fabs(B[k, k])
        for i in range(k + 1, n):
            if fabs(B[i, k]) > best:
                best = fabs(B[i, k])
                p = i
        if best < 1e-300:
            return -1
        if p != k:
            for j in range(n):
                v = B[k, j]; B[k, j] = B[p, j]; B[p, j] = v
                v = out[k, j]; out[k, j] = out[p, j]; out[p, j] = v
        f = 1.0 / B[k, k]
        for j in range(n):
            B[k, j] *= f
            out[k, j] *= f
        for i in range(n):
            if i != k and B[i, k] != 0.0:
                f = B[i, k]
                for j in range(n):
                    B[i, j] -= f * B[k, j]
                    out[i, j] -= f * out[k, j]
    return 0


cdef int _refactor(const double[:, ::1] A, const double[::1] y,
                   Py_ssize_t[::1] basis, Py_ssize_t m,
                   const double[::1] sgn, double[:, ::1] work,
                   double[:, ::1] Binv, double[::1] xB) nogil:
    cdef Py_ssize_t r = A.shape[0], i, k
    cdef double s
    for k in range(r):
        for i in range(r):
            work[i, k] = _col_entry(A, i, basis[k], m, sgn)
    if _invert(work, Binv) != 0:
        return -1
    for i in range(r):
        s = 0.0
        for k in range(r):
            s += Binv[i, k] * y[k]
        xB[i] = s if s > 0.0 else 0.0
    return 0


cdef int _pivot(double[:, ::1] Binv, double[::1] w, Py_ssize_t p) nogil:
    cdef Py_ssize_t r = Binv.shape[0], i, j
    cdef double inv = 1.0 / w[p], f
    for j in range(r):
        Binv[p, j] *= inv
    for i in range(r):
        if i != p and w[i] != 0.0:
            f = w[i]
            for j in range(r):
                Binv[i, j] -= f * Binv[p, j]
    return 0


cdef int _run_phase(const double[:, ::1] A, const double[::1] y,
                    Py_ssize_t[::1] basis, char[::1] in_basis,
                    double[:, ::1] Binv, double[::1] xB, int phase,
                    const double[::1] sgn, double piv_tol, double opt_tol,
                    double feas_tol, Py_ssize_t max_iter, Py_ssize_t* it,
                    double[::1] cB, double[::1] pi, double[::1] g,
                    double[::1] w, double[:, ::1] work) nogil:
    cdef Py_ssize_t r = A.shape[0], m = A.shape[1], n_struct = 2 * m
    cdef Py_ssize_t i, j, k, q, p
    cdef double base = 1.0 if phase == 2 else 0.0
    cdef double dmin, dj, s, theta, theta_max, ratio, wbest
    cdef Py_ssize_t degenerate = 0, bbest
    cdef bint bland
    while it[0] < max_iter:
        if it[0] % REFACTOR_EVERY == REFACTOR_EVERY - 1:
            if _refactor(A, y, basis, m, sgn, work, Binv, xB) != 0:
                return FAILED
        for k in range(r):
            if phase == 2:
                cB[k] = 0.0 if basis[k] >= n_struct else 1.0
            else:
                cB[k] = 1.0 if basis[k] >= n_struct else 0.0
        for i in range(r):
            s = 0.0
            for k in range(r):
                s += Binv[k, i] * cB[k]
            pi[i] = s
        for j in range(m):
            s = 0.0
            for i in range(r):
                s += A[i, j] * pi[i]
            g[j] = s
        bland = degenerate > DEGENERATE_LIMIT
        q = -1
        dmin = -opt_tol
        for j in range(n_struct):
            if in_basis[j]:
                continue
            dj = base - g[j] if j < m else base + g[j - m]
            if dj < dmin:
                dmin = dj
                q = j
                if bland:
                    break
        if q < 0:
            return OPTIMAL
        for i in range(r):
            s = 0.0
            for k in range(r):
                s += Binv[i, k] * _col_entry(A, k, q, m, sgn)
            w[i] = s
        # Harris two-pass ratio test
        theta_max = INFINITY
        for i in range(r):
            if w[i] > piv_tol:
                ratio = (xB[i] + feas_tol) / w[i]
                if ratio < theta_max:
                    theta_max = ratio
        if theta_max == INFINITY:
            return FAILED
        p = -1
        wbest = 0.0
        bbest = 0
        for i in range(r):
            if w[i] > piv_tol and xB[i] / w[i] <= theta_max:
                if bland:
                    if p < 0 or basis[i] < bbest:
                        p = i
                        bbest = basis[i]
                elif w[i] > wbest:
                    wbest = w[i]
                    p = i
        theta = xB[p] / w[p]
        if theta < 0.0:
            theta = 0.0
        if theta <= feas_tol:
            degenerate += 1
        else:
            degenerate = 0
        for i in range(r):
            xB[i] -= theta * w[i]
            if xB[i] < 0.0:
                xB[i] = 0.0
        xB[p] = theta
        in_basis[basis[p]] = 0
        in_basis[q] = 1
        basis[p] = q
        _pivot(Binv, w, p)
        it[0] += 1
    return FAILED


def bp_simplex(A, y, double piv_tol=1e-9, double opt_tol=1e-9,
               double feas_tol=1e-10, Py_ssize_t max_iter=20000):
    """Two-phase revised simplex for ``min |c|_1 s.t. A c = y``.

    Returns ``(status, c, nu, iterations)``.
    """
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t r = Av.shape[0], m = Av.shape[1], n_struct = 2 * m
    cdef Py_ssize_t i, j, k, p, it = 0, best_k
    cdef double scale = 1.0, art = 0.0, s, v, best_v
    for i in range(r):
        if fabs(yv[i]) > scale:
            scale = fabs(yv[i])
    cdef double feas_abs = feas_tol * scale
    sgn_arr = np.where(np.asarray(yv) >= 0, 1.0, -1.0)
    cdef double[::1] sgn = sgn_arr
    cdef Py_ssize_t[::1] basis = np.arange(n_struct, n_struct + r, dtype=np.intp)
    cdef char[::1] in_basis = np.zeros(n_struct + r, dtype=np.int8)
    cdef double[:, ::1] Binv = np.diag(sgn_arr)
    cdef double[::1] xB = np.abs(np.asarray(yv)).copy()
    cdef double[::1] cB = np.empty(r)
    cdef double[::1] pi = np.zeros(r)
    cdef double[::1] g = np.empty(m)
    cdef double[::1] w = np.empty(r)
    cdef double[::1] rowv = np.empty(m)
    cdef double[:, ::1] work = np.empty((r, r))
    cdef int status
    for i in range(r):
        in_basis[n_struct + i] = 1

    with nogil:
        status = _run_phase(Av, yv, basis, in_basis, Binv, xB, 1, sgn,
                            piv_tol, opt_tol, feas_abs, max_iter, &it,
                            cB, pi, g, w, work)
    if status != OPTIMAL:
        return FAILED, np.zeros(m), np.zeros(r), it
    for k in range(r):
        if basis[k] >= n_struct:
            art += xB[k]
    if art > 1e3 * feas_abs * r:
        return INFEASIBLE, np.zeros(m), np.zeros(r), it

    with nogil:
        for p in range(r):
            if basis[p] < n_struct:
                continue
            for j in range(m):
                s = 0.0
                for i in range(r):
                    s += Binv[p, i] * Av[i, j]
                rowv[j] = s
            best_k = -1
            best_v = 1e-7
            for k in range(n_struct):
                if in_basis[k]:
                    continue
                v = fabs(rowv[k] if k < m else rowv[k - m])
                if v > best_v:
                    best_v = v
                    best_k = k
            if best_k < 0:
                continue
            for i in range(r):
                s = 0.0
                for k in range(r):
                    s += Binv[i, k] * _col_entry(Av, k, best_k, m, sgn)
                w[i] = s
            _pivot(Binv, w, p)
            xB[p] = 0.0
            in_basis[basis[p]] = 0
            in_basis[best_k] = 1
            basis[p] = best_k
        status = _refactor(Av, yv, basis, m, sgn, work, Binv, xB)
    if status != 0:
        return FAILED, np.zeros(m), np.zeros(r), it

    with nogil:
        status = _run_phase(Av, yv, basis, in_basis, Binv, xB, 2, sgn,
                            piv_tol, opt_tol, feas_abs, max_iter, &it,
                            cB, pi, g, w, work)
    if status != OPTIMAL:
        return FAILED, np.zeros(m), np.zeros(r), it
    x = np.zeros(n_struct)
    for k in range(r):
        if basis[k] < n_struct:
            x[basis[k]] = xB[k]
    return OPTIMAL, x[:m] - x[m:], np.asarray(pi).copy(), it


cdef double _kkt(const double[:, ::1] At, const double[::1] res,
                 const double[::1] c, double lam) nogil:
    cdef Py_ssize_t m = At.shape[0], r = At.shape[1], i, j
    cdef double grad, v, worst = 0.0
    for j in range(m):
        grad = 0.0
        for i in range(r):
            grad -= At[j, i] * res[i]
        if c[j] > 0.0:
            v = fabs(grad + lam)
        elif c[j] < 0.0:
            v = fabs(grad - lam)
        else:
            v = fabs(grad) - lam
        if v > worst:
            worst = v
    return worst


def lasso_cd(A, y, double lam, c0, double tol, Py_ssize_t max_iter):
    """Coordinate descent for ``lam |c|_1 + 0.5 |A c - y|^2``.

    Returns ``(c, kkt_residual, sweeps)``.
    """
    cdef double[:, ::1] At = np.ascontiguousarray(np.asarray(A, dtype=np.float64).T)
    cdef Py_ssize_t m = At.shape[0], r = At.shape[1], i, j, sweeps = 0, inner
    c_arr = np.array(c0, dtype=np.float64)
    cdef double[::1] c = c_arr
    res_arr = np.asarray(y, dtype=np.float64) - np.asarray(A, dtype=np.float64) @ c_arr
    cdef double[::1] res = res_arr
    cdef double[::1] col_sq = np.einsum("ji,ji->j", np.asarray(At), np.asarray(At))
    cdef double rho, new, diff, delta, kkt = INFINITY, mag
    cdef int pass_
    with nogil:
        while sweeps < max_iter:
            for pass_ in range(2):
                inner = 0
                while True:
                    delta = 0.0
                    for j in range(m):
                        if col_sq[j] == 0.0 or (pass_ == 1 and c[j] == 0.0):
                            continue
                        rho = col_sq[j] * c[j]
                        for i in range(r):
                            rho += At[j, i] * res[i]
                        mag = fabs(rho) - lam
                        if mag > 0.0:
                            new = (mag if rho > 0.0 else -mag) / col_sq[j]
                        else:
                            new = 0.0
                        if new != c[j]:
                            diff = new - c[j]
                            for i in range(r):
                                res[i] -= diff * At[j, i]
                            if fabs(diff) * sqrt(col_sq[j]) > delta:
                                delta = fabs(diff) * sqrt(col_sq[j])
                            c[j] = new
                    inner += 1
                    if pass_ == 0 or delta <= 0.1 * tol or inner >= 200:
                        break
            sweeps += 1
            kkt = _kkt(At, res, c, lam)
            if kkt <= tol:
                break
    return c_arr, kkt, sweeps


cdef bint _next_subset(Py_ssize_t* idx, Py_ssize_t d, Py_ssize_t m) nogil:
    cdef Py_ssize_t k = d - 1, t
    while k >= 0 and idx[k] == m - d + k:
        k -= 1
    if k < 0:
        return False
    idx[k] += 1
    for t in range(k + 1, d):
        idx[t] = idx[t - 1] + 1
    return True


def polar_vertex_max(A, double feas_tol=1e-9, double sing_tol=1e-12):
    """Largest-norm vertex of ``{lam : |A^T lam|_inf <= 1}`` (d <= 4).

    Returns ``(max_norm, lam)``; ``max_norm`` is ``inf`` when the polytope
    has no vertex.
    """
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t d = Av.shape[0], m = Av.shape[1]
    if d > 4 or d < 1:
        raise ValueError("polar_vertex_max supports 1 <= d <= 4")
    cdef Py_ssize_t idx[4]
    cdef Py_ssize_t perm[4]
    cdef double M[4][4]
    cdef double lam[4]
    cdef double rhs[4]
    cdef double best_lam[4]
    cdef double best = -1.0, scale = 1e-300, piv, f, v, nrm, s
    cdef Py_ssize_t i, j, k, t, p, pattern, n_patterns = 1 << (d - 1)
    cdef bint singular, feasible
    cdef bint found = False
    for i in range(d):
        for j in range(m):
            if fabs(Av[i, j]) > scale:
                scale = fabs(Av[i, j])
    if m < d:
        return np.inf, np.zeros(d)
    for k in range(d):
        idx[k] = k
    with nogil:
        while True:
            # LU with partial pivoting of the d x d system rows a_{idx[k]}^T
            for k in range(d):
                perm[k] = k
                for t in range(d):
                    M[k][t] = Av[t, idx[k]] / scale
            singular = False
            for k in range(d):
                p = k
                piv = fabs(M[k][k])
                for i in range(k + 1, d):
                    if fabs(M[i][k]) > piv:
                        piv = fabs(M[i][k])
                        p = i
                if piv <= sing_tol:
                    singular = True
                    break
                if p != k:
                    for t in range(d):
                        v = M[k][t]; M[k][t] = M[p][t]; M[p][t] = v
                    t = perm[k]; perm[k] = perm[p]; perm[p] = t
                for i in range(k + 1, d):
                    f = M[i][k] / M[k][k]
                    M[i][k] = f
                    for t in range(k + 1, d):
                        M[i][t] -= f * M[k][t]
            if not singular:
                for pattern in range(n_patterns):
                    for k in range(d):
                        # sign of equation perm[k]; equation 0 fixed to +1
                        if perm[k] == 0:
                            rhs[k] = 1.0
                        else:
                            rhs[k] = -1.0 if (pattern >> (perm[k] - 1)) & 1 else 1.0
                    for k in range(d):
                        s = rhs[k]
                        for t in range(k):
                            s -= M[k][t] * lam[t]
                        lam[k] = s
                    for k in range(d - 1, -1, -1):
                        s = lam[k]
                        for t in range(k + 1, d):
                            s -= M[k][t] * lam[t]
                        lam[k] = s / M[k][k]
                    nrm = 0.0
                    for k in range(d):
                        lam[k] /= scale
                        nrm += lam[k] * lam[k]
                    if nrm <= best:
                        continue
                    feasible = True
                    for j in range(m):
                        s = 0.0
                        for k in range(d):
                            s += Av[k, j] * lam[k]
                        if fabs(s) > 1.0 + feas_tol:
                            feasible = False
                            break
                    if feasible:
                        best = nrm
                        found = True
                        for k in range(d):
                            best_lam[k] = lam[k]
            if not _next_subset(idx, d, m):
                break
    if not found:
        return np.inf, np.zeros(d)
    return sqrt(best), np.array([best_lam[k] for k in range(d)])
