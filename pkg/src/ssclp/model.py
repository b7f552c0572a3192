"""Union-of-subspaces data generation and observation masks.

Two generation modes are provided:

``orthonormal``
    Each basis is an orthonormalized Gaussian matrix and coefficients are
    uniform on the unit sphere; the setting under which the certificate
    conditions are stated.
``gaussian``
    Each subspace block is the product of an ``n x d`` and a ``d x N_l``
    standard Gaussian matrix, with no normalization; the benchmark recipe.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError


class GenerationMode(str, enum.Enum):
    ORTHONORMAL = "orthonormal"
    GAUSSIAN = "gaussian"


class CaseTag(str, enum.Enum):
    SAME_SUPPORT = "same_support"
    EXACTLY_D = "exactly_d"
    RANDOM_PER_COLUMN = "random_per_column"


@dataclass
class SubspaceEnsemble:
    """Ground truth of the generative model.

    ``bases[l]`` is ``n x d`` with orthonormal columns, ``coefficients[l]`` is
    ``d x N_l`` with unit-norm columns and ``scales[l]`` holds the column
    norms so that ``X_i = scale_i * U a_i`` (all ones in orthonormal mode).
    """

    n: int
    d: int
    bases: list
    coefficients: list
    scales: list

    @property
    def L(self):
        return len(self.bases)

    @property
    def counts(self):
        return [a.shape[1] for a in self.coefficients]

    @property
    def labels(self):
        """1-based subspace label of every column, in generation order."""
        return np.concatenate([np.full(c, l + 1, dtype=int)
                               for l, c in enumerate(self.counts)])

    def matrix(self):
        return np.hstack([U @ (A * s) for U, A, s in
                          zip(self.bases, self.coefficients, self.scales)])

    def column_coefficients(self):
        """``d x N`` matrix of unit coefficient vectors in column order."""
        return np.hstack(self.coefficients)


@dataclass
class ObservationPattern:
    """Per-column sorted arrays of observed row indices (0-based)."""

    masks: list
    case_tag: CaseTag
    n: int

    def __post_init__(self):
        for i, m in enumerate(self.masks):
            m = np.asarray(m, dtype=np.intp)
            if m.size == 0:
                raise ParameterError(f"mask {i} is empty")
            if np.any(np.diff(m) <= 0) or m[0] < 0 or m[-1] >= self.n:
                raise ParameterError(f"mask {i} must be sorted, unique and in range")
            self.masks[i] = m

    @property
    def N(self):
        return len(self.masks)

    def to_matrix(self):
        M = np.zeros((self.n, self.N), dtype=bool)
        for i, m in enumerate(self.masks):
            M[m, i] = True
        return M

    @classmethod
    def from_matrix(cls, M, case_tag=CaseTag.RANDOM_PER_COLUMN):
        M = np.asarray(M, dtype=bool)
        return cls([np.flatnonzero(M[:, i]) for i in range(M.shape[1])],
                   CaseTag(case_tag), M.shape[0])


@dataclass
class ObservedDataset:
    zero_filled: np.ndarray
    pattern: ObservationPattern
    full_matrix: np.ndarray | None = None
    true_labels: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.zero_filled.shape[0]

    @property
    def N(self):
        return self.zero_filled.shape[1]

    @property
    def mask(self):
        return self.pattern.to_matrix()


def _rng(seed, *key):
    """Counter-based stream for ``(seed, *key)``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def generate_ensemble(n, d, L, N_per, mode=GenerationMode.GAUSSIAN, seed=0):
    """Draw ``L`` subspaces of dimension ``d`` in ``R^n`` and their points.

    ``N_per`` is an int (same count for every subspace) or a sequence of
    per-subspace counts. Returns ``(ensemble, X)``.
    """
    counts = [N_per] * L if np.isscalar(N_per) else list(N_per)
    if not (n >= d >= 1 and L >= 1) or len(counts) != L or min(counts) < 1:
        raise ParameterError(f"invalid dimensions n={n}, d={d}, L={L}, N={counts}")
    mode = GenerationMode(mode)
    bases, coefs, scales, blocks = [], [], [], []
    for l, Nl in enumerate(counts):
        rng = _rng(seed, 0, l)
        G = rng.standard_normal((n, d))
        H = rng.standard_normal((d, Nl))
        U, R = np.linalg.qr(G)
        if mode is GenerationMode.ORTHONORMAL:
            A = H / np.linalg.norm(H, axis=0)
            s = np.ones(Nl)
            blocks.append(U @ A)
        else:
            implied = R @ H
            s = np.linalg.norm(implied, axis=0)
            A = implied / s
            blocks.append(G @ H)
        bases.append(U)
        coefs.append(A)
        scales.append(s)
    ens = SubspaceEnsemble(n, d, bases, coefs, scales)
    return ens, np.hstack(blocks)


def _partial_shuffle(rng, n, k):
    """First ``k`` entries of a Fisher-Yates shuffle of ``range(n)``."""
    perm = np.arange(n)
    for t in range(k):
        j = t + int(rng.integers(n - t))
        perm[t], perm[j] = perm[j], perm[t]
    return np.sort(perm[:k])


def _check_p(p):
    if not 0 < p <= 1:
        raise ParameterError(f"sampling ratio must be in (0, 1], got {p}")


def round_half_up(x):
    return int(math.floor(x + 0.5))


def sample_case1(n, N, p):
    """Every column observed on the same leading ``ceil(p n)`` rows."""
    _check_p(p)
    k = min(n, math.ceil(round(p * n, 9)))
    if k == 0:
        raise ParameterError("ceil(p n) = 0")
    rows = np.arange(k)
    return ObservationPattern([rows.copy() for _ in range(N)],
                              CaseTag.SAME_SUPPORT, n)


def sample_case3(n, N, p, seed=0):
    """Each column observed on an independent uniform subset of size round(p n)."""
    _check_p(p)
    k = round_half_up(round(p * n, 9))
    if k == 0:
        raise ParameterError("round(p n) = 0")
    return ObservationPattern([_partial_shuffle(_rng(seed, 1, i), n, k)
                               for i in range(N)],
                              CaseTag.RANDOM_PER_COLUMN, n)


def sample_case2(n, N, d, seed=0):
    """Each column observed on an independent uniform subset of size ``d``."""
    if not 1 <= d <= n:
        raise ParameterError(f"need 1 <= d <= n, got d={d}, n={n}")
    return ObservationPattern([_partial_shuffle(_rng(seed, 2, i), n, d)
                               for i in range(N)],
                              CaseTag.EXACTLY_D, n)


def zero_fill(X, pattern, labels=None, meta=None):
    """Zero every entry outside the observation masks."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (pattern.n, pattern.N):
        raise ParameterError(
            f"matrix shape {X.shape} does not match pattern ({pattern.n}, {pattern.N})")
    mask = pattern.to_matrix()
    Z = np.where(mask, X, 0.0)
    return ObservedDataset(Z, pattern, full_matrix=X.copy(),
                           true_labels=None if labels is None else np.asarray(labels),
                           meta=dict(meta or {}))


def ensemble_from_bases(bases, N_per, seed=0):
    """Orthonormal-mode ensemble on given bases (orthonormalized first).

    Useful for constructing instances with prescribed geometry, e.g.
    mutually orthogonal subspaces. Returns ``(ensemble, X)``.
    """
    bases = [np.linalg.qr(np.asarray(B, dtype=np.float64))[0] for B in bases]
    n, d = bases[0].shape
    if any(B.shape != (n, d) for B in bases):
        raise ParameterError("all bases must share the same shape")
    counts = [N_per] * len(bases) if np.isscalar(N_per) else list(N_per)
    coefs, scales = [], []
    for l, Nl in enumerate(counts):
        H = _rng(seed, 3, l).standard_normal((d, Nl))
        coefs.append(H / np.linalg.norm(H, axis=0))
        scales.append(np.ones(Nl))
    ens = SubspaceEnsemble(n, d, bases, coefs, scales)
    return ens, ens.matrix()
