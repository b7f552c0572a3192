"""On-disk dataset and coefficient formats.

A dataset directory holds::

    values.csv   n rows x N columns, missing entries as empty fields
    mask.csv     0/1 with the same shape
    meta.json    n, N, L, d, counts, case_tag, seed and optional labels

Generated datasets additionally carry ``truth.csv`` (the complete matrix),
which the CLI uses to report completion error, and ``ensemble.npz`` (the
ground-truth bases and coefficients) needed by the certificate checks.
"""
import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import ParameterError
from .model import CaseTag, ObservationPattern, ObservedDataset, SubspaceEnsemble


def _fmt(x):
    return repr(float(x))


def _write_matrix(path, M, mask=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for k in range(M.shape[0]):
            if mask is None:
                w.writerow([_fmt(v) for v in M[k]])
            else:
                w.writerow([_fmt(v) if o else "" for v, o in zip(M[k], mask[k])])


def _read_matrix(path, allow_empty=False):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParameterError(f"{path} is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParameterError(f"{path} has ragged rows")
    out = np.zeros((len(rows), width))
    present = np.ones((len(rows), width), dtype=bool)
    for k, r in enumerate(rows):
        for i, v in enumerate(r):
            v = v.strip()
            if v == "":
                if not allow_empty:
                    raise ParameterError(f"{path}: empty field at ({k}, {i})")
                present[k, i] = False
            else:
                out[k, i] = float(v)
    return out, present


def write_dataset(directory, dataset, extra_meta=None):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    mask = dataset.mask
    _write_matrix(d / "values.csv", dataset.zero_filled, mask)
    with open(d / "mask.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in mask.astype(int):
            w.writerow(row.tolist())
    if dataset.full_matrix is not None:
        _write_matrix(d / "truth.csv", dataset.full_matrix)
    meta = dict(dataset.meta)
    meta.update(extra_meta or {})
    meta.update(n=int(dataset.n), N=int(dataset.N),
                case_tag=CaseTag(dataset.pattern.case_tag).value)
    if dataset.true_labels is not None:
        meta["labels"] = [int(v) for v in dataset.true_labels]
    with open(d / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_dataset(directory):
    d = Path(directory)
    values, present = _read_matrix(d / "values.csv", allow_empty=True)
    mask_vals, _ = _read_matrix(d / "mask.csv")
    with open(d / "meta.json") as fh:
        meta = json.load(fh)
    if mask_vals.shape != values.shape:
        raise ParameterError(
            f"mask.csv shape {mask_vals.shape} != values.csv shape {values.shape}")
    if (meta.get("n"), meta.get("N")) != values.shape:
        raise ParameterError(
            f"meta.json declares ({meta.get('n')}, {meta.get('N')}) "
            f"but values.csv is {values.shape}")
    if not np.isin(mask_vals, (0, 1)).all():
        raise ParameterError("mask.csv must contain only 0/1")
    mask = mask_vals.astype(bool)
    if np.any(mask & ~present):
        raise ParameterError("values.csv has empty fields at observed locations")
    labels = meta.get("labels")
    if labels is not None:
        labels = np.asarray(labels, dtype=int)
        if labels.shape != (values.shape[1],):
            raise ParameterError("labels length does not match N")
    truth = None
    if (d / "truth.csv").exists():
        truth, _ = _read_matrix(d / "truth.csv")
        if truth.shape != values.shape:
            raise ParameterError("truth.csv shape mismatch")
    pattern = ObservationPattern.from_matrix(mask, meta.get("case_tag",
                                                            CaseTag.RANDOM_PER_COLUMN))
    return ObservedDataset(np.where(mask, values, 0.0), pattern,
                           full_matrix=truth, true_labels=labels, meta=meta)


def write_labels(path, labels):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "label"])
        for i, v in enumerate(labels):
            w.writerow([i, int(v)])


def read_labels(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([int(r["label"]) for r in rows], dtype=int)


def write_coefficients(directory, coeffs):
    """Write ``coeffs.csv`` and ``coeffs_meta.json``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _write_matrix(d / "coeffs.csv", coeffs.C)
    meta = {"algorithm": coeffs.algorithm, "parameters": coeffs.parameters,
            "status": [s.value for s in coeffs.status]}
    with open(d / "coeffs_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_ensemble(path, ensemble):
    """Ground-truth bases, unit coefficients and scales as ``.npz``."""
    arrays = {"n": ensemble.n, "d": ensemble.d}
    for l, (U, A, s) in enumerate(zip(ensemble.bases, ensemble.coefficients,
                                      ensemble.scales)):
        arrays[f"basis_{l}"] = U
        arrays[f"coefficients_{l}"] = A
        arrays[f"scales_{l}"] = s
    np.savez(path, **arrays)


def read_ensemble(path):
    with np.load(path) as z:
        L = sum(k.startswith("basis_") for k in z.files)
        return SubspaceEnsemble(int(z["n"]), int(z["d"]),
                                [z[f"basis_{l}"] for l in range(L)],
                                [z[f"coefficients_{l}"] for l in range(L)],
                                [z[f"scales_{l}"] for l in range(L)])
