"""Clustering, completion and subspace errors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import ParameterError


@dataclass
class EvaluationRecord:
    clustering_error: float
    completion_error: float
    subspace_errors: np.ndarray
    permutation: dict

    @property
    def subspace_error_max(self):
        return float(np.max(self.subspace_errors))

    @property
    def subspace_error_mean(self):
        return float(np.mean(self.subspace_errors))


def align_labels(predicted, true):
    """Best matching of predicted to true labels.

    Returns ``(mismatches, mapping)`` where ``mapping[pred_label] =
    true_label``. The confusion matrix is padded to square so empty clusters
    are handled.
    """
    predicted = np.asarray(predicted)
    true = np.asarray(true)
    if predicted.shape != true.shape:
        raise ParameterError(
            f"label vectors differ in length: {predicted.shape} vs {true.shape}")
    p_vals = np.unique(predicted)
    t_vals = np.unique(true)
    k = max(p_vals.size, t_vals.size)
    conf = np.zeros((k, k), dtype=np.int64)
    p_idx = np.searchsorted(p_vals, predicted)
    t_idx = np.searchsorted(t_vals, true)
    np.add.at(conf, (p_idx, t_idx), 1)
    rows, cols = linear_sum_assignment(-conf)
    matched = int(conf[rows, cols].sum())
    mapping = {int(p_vals[r]): int(t_vals[c]) for r, c in zip(rows, cols)
               if r < p_vals.size and c < t_vals.size}
    return predicted.size - matched, mapping


def clustering_error(predicted, true):
    """Fraction of points misclassified under the best label permutation."""
    miss, _ = align_labels(predicted, true)
    return miss / len(true)


def completion_error(recovered, truth):
    """``|recovered - truth|_F / |truth|_F``."""
    recovered = np.asarray(recovered, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if recovered.shape != truth.shape:
        raise ParameterError("shape mismatch")
    nt = np.linalg.norm(truth)
    if nt == 0:
        raise ParameterError("true matrix is zero")
    return float(np.linalg.norm(recovered - truth) / nt)


def _check_orthonormal(M, name, tol):
    G = M.T @ M
    if np.max(np.abs(G - np.eye(G.shape[0]))) > tol:
        raise ParameterError(f"{name} does not have orthonormal columns")


def subspace_error(A, B, tol=1e-8):
    """Largest principal angle ``arcsin |B - A A^T B|_2`` in radians.

    ``A`` is the recovered basis, ``B`` the true one.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    _check_orthonormal(A, "A", tol)
    _check_orthonormal(B, "B", tol)
    s = np.linalg.norm(B - A @ (A.T @ B), 2)
    return float(np.arcsin(min(s, 1.0)))


def evaluate(predicted, true, recovered, truth, recovered_bases, true_bases):
    """All three metrics; recovered cluster bases are matched to true
    subspaces with the clustering permutation. ``recovered_bases`` maps a
    predicted label to its basis (``None`` when the cluster is empty)."""
    miss, mapping = align_labels(predicted, true)
    inverse = {t: p for p, t in mapping.items()}
    errs = []
    for l, B in enumerate(true_bases, start=1):
        Abasis = recovered_bases.get(inverse.get(l))
        if Abasis is None or Abasis.shape[1] < B.shape[1]:
            errs.append(np.pi / 2)
        else:
            errs.append(subspace_error(Abasis, B))
    return EvaluationRecord(miss / len(true), completion_error(recovered, truth),
                            np.array(errs), mapping)
