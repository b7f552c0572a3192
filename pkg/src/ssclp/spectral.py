"""Spectral clustering with the symmetric normalized Laplacian."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from .exceptions import NumericalFailure, ParameterError


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    L: int
    inertia: float
    eigenvalues: np.ndarray
    flags: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)


def normalized_laplacian(W):
    """``I - D^-1/2 W D^-1/2``; rows of zero-degree vertices of the normalized
    affinity are zero. Returns ``(L_sym, degrees)``."""
    W = np.asarray(W, dtype=np.float64)
    deg = W.sum(axis=1)
    inv = np.zeros_like(deg)
    pos = deg > 0
    inv[pos] = 1.0 / np.sqrt(deg[pos])
    return np.eye(W.shape[0]) - inv[:, None] * W * inv[None, :], deg


def spectral_cluster(W, L, seed=0, kmeans_restarts=20, max_iter=300):
    """Cluster the graph with affinity ``W`` into ``L`` groups.

    Labels are 1-based. The embedding is the ``L`` eigenvectors of smallest
    eigenvalue, row-normalized; isolated vertices keep a zero row.
    """
    W = np.asarray(W, dtype=np.float64)
    N = W.shape[0]
    if W.shape != (N, N):
        raise ParameterError("affinity must be square")
    if not 1 <= L <= N:
        raise ParameterError(f"cannot form {L} clusters from {N} points")
    if np.any(W < 0) or not np.array_equal(W, W.T):
        raise ParameterError("affinity must be symmetric and nonnegative")
    Lsym, deg = normalized_laplacian(W)
    try:
        evals, evecs = np.linalg.eigh(Lsym)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("eigendecomposition did not converge") from exc
    flags = []
    isolated = deg <= 0
    if isolated.all():
        flags.append("empty_graph")
    elif isolated.any():
        flags.append(f"isolated_vertices={int(isolated.sum())}")
    emb = evecs[:, :L].copy()
    emb[isolated] = 0.0
    norms = np.linalg.norm(emb, axis=1)
    nz = norms > 1e-12
    emb[nz] /= norms[nz, None]
    emb[~nz] = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        km = KMeans(n_clusters=L, n_init=kmeans_restarts, max_iter=max_iter,
                    random_state=int(seed) % (2**32), init="k-means++")
        raw = km.fit_predict(emb)
    labels = raw.astype(int) + 1
    empty = L - np.unique(labels).size
    if empty:
        flags.append(f"empty_clusters={empty}")
    return ClusterAssignment(labels, L, float(km.inertia_),
                             evals[:min(L + 1, N)].copy(), flags,
                             {"laplacian": "symmetric", "seed": int(seed),
                              "kmeans_restarts": kmeans_restarts})
