"""Experiment harness: sampling-ratio sweeps and certificate tabulation."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import certify as cert
from .complete import SVTParams, complete_by_cluster
from .exceptions import ParameterError
from .l1core import SolveStatus
from .metrics import evaluate
from .model import (GenerationMode, generate_ensemble, sample_case1,
                    sample_case2, sample_case3, zero_fill)
from .selfrep import (SSC_EWZF, SSC_LP, TSC, affinity_from_coefficients,
                      ssc_ewzf_coefficients, ssc_lp_coefficients, tsc_affinity)
from .spectral import spectral_cluster

log = logging.getLogger(__name__)

CSV_COLUMNS = ["case", "p", "trial", "algorithm", "clustering_error",
               "completion_error", "subspace_error_max_rad", "status", "seed"]


@dataclass
class ExperimentConfig:
    n: int = 50
    d: int = 3
    L: int = 3
    N_per: int = 150
    mode: str = "gaussian"
    case: int = 3
    p_grid: list = field(default_factory=lambda: [round(0.25 + 0.02 * k, 2)
                                                  for k in range(36)])
    algorithms: list = field(default_factory=lambda: [SSC_LP, SSC_EWZF, TSC])
    alpha_tuning: float = 7.34
    normalize_columns: bool = False
    tsc_q: int | None = None
    trials: int = 25
    master_seed: int = 0
    kmeans_restarts: int = 20
    svt: dict = field(default_factory=dict)
    output_dir: str = "results"

    def __post_init__(self):
        self.p_grid = [float(p) for p in self.p_grid]
        if any(not 0 < p <= 1 for p in self.p_grid):
            raise ParameterError("p-grid values must lie in (0, 1]")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.case not in (1, 2, 3):
            raise ParameterError("case must be 1, 2 or 3")
        unknown = set(self.algorithms) - {SSC_LP, SSC_EWZF, TSC}
        if unknown:
            raise ParameterError(f"unknown algorithms {sorted(unknown)}")
        try:
            GenerationMode(self.mode)
        except ValueError:
            raise ParameterError(f"unknown generation mode {self.mode!r}") from None
        try:
            SVTParams(**self.svt)
        except TypeError as exc:
            raise ParameterError(f"bad svt parameters: {exc}") from None

    @classmethod
    def from_json(cls, path):
        return _load_config(cls, path)

    def to_dict(self):
        return dataclasses.asdict(self)


def _load_config(cls, path):
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ParameterError("config must be a JSON object")
    extra = set(raw) - {f.name for f in dataclasses.fields(cls)}
    if extra:
        raise ParameterError(f"unknown config fields {sorted(extra)}")
    return cls(**raw)


def trial_seed(master, p_index, trial):
    """Counter-based per-(p, trial) seed shared by every algorithm."""
    words = np.random.SeedSequence([int(master), int(p_index), int(trial)]).generate_state(2)
    return (int(words[0]) << 31) ^ int(words[1])


def _pattern(cfg, N, p, seed):
    if cfg.case == 1:
        return sample_case1(cfg.n, N, p)
    if cfg.case == 2:
        return sample_case2(cfg.n, N, cfg.d, seed)
    return sample_case3(cfg.n, N, p, seed)


def make_trial_dataset(cfg, p, seed):
    ens, X = generate_ensemble(cfg.n, cfg.d, cfg.L, cfg.N_per, cfg.mode, seed)
    pattern = _pattern(cfg, X.shape[1], p, seed)
    ds = zero_fill(X, pattern, ens.labels,
                   {"counts": ens.counts, "L": cfg.L, "d": cfg.d, "seed": seed})
    return ens, ds


def affinity_for(algorithm, ds, cfg):
    if algorithm == SSC_LP:
        coeffs = ssc_lp_coefficients(ds, normalize_columns=cfg.normalize_columns)
        return affinity_from_coefficients(coeffs), coeffs.n_failed
    if algorithm == SSC_EWZF:
        coeffs = ssc_ewzf_coefficients(ds, alpha=cfg.alpha_tuning)
        return affinity_from_coefficients(coeffs), coeffs.n_failed
    W, _, _ = tsc_affinity(ds, N_per=cfg.N_per, q=cfg.tsc_q)
    return W, 0


def _fmt(x):
    return repr(float(x))


def run_trial(cfg, p_index, trial):
    """All algorithms on one (p, trial) instance. Returns CSV rows."""
    p = cfg.p_grid[p_index]
    seed = trial_seed(cfg.master_seed, p_index, trial)
    ens, ds = make_trial_dataset(cfg, p, seed)
    svt = SVTParams(**cfg.svt)
    rows = []
    for alg in cfg.algorithms:
        row = {"case": cfg.case, "p": format(p, ".10g"), "trial": trial,
               "algorithm": alg, "seed": seed}
        try:
            W, n_failed = affinity_for(alg, ds, cfg)
            assign = spectral_cluster(W, cfg.L, seed=seed,
                                      kmeans_restarts=cfg.kmeans_restarts)
            comp = complete_by_cluster(ds, assign.labels, cfg.d, svt)
            ev = evaluate(assign.labels, ens.labels, comp.recovered,
                          ds.full_matrix, comp.bases, ens.bases)
            row.update(clustering_error=_fmt(ev.clustering_error),
                       completion_error=_fmt(ev.completion_error),
                       subspace_error_max_rad=_fmt(ev.subspace_error_max),
                       status="OK" if n_failed == 0 else f"DEGRADED:{n_failed}")
        except Exception as exc:  # noqa: BLE001 -- one bad trial must not stop a sweep
            log.warning("trial failed p=%s trial=%s alg=%s: %s", p, trial, alg, exc)
            row.update(clustering_error="nan", completion_error="nan",
                       subspace_error_max_rad="nan",
                       status=f"FAILED:{type(exc).__name__}")
        rows.append(row)
    return rows


def worker_count():
    raw = os.environ.get("UOS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ParameterError(f"UOS_THREADS must be an integer, got {raw!r}") from None


def _sort_key(row):
    return (float(row["p"]), int(row["trial"]), row["algorithm"])


def run_sweep(cfg, output_dir=None, threads=None):
    """Run every (p, trial) job and write results, summary and figure data.

    Returns the sorted list of result rows.
    """
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    threads = worker_count() if threads is None else threads
    jobs = [(k, t) for k in range(len(cfg.p_grid)) for t in range(cfg.trials)]
    rows = []
    partial = out / "results.partial.csv"
    with open(partial, "w", newline="") as fh:
        w = csv.DictWriter(fh, CSV_COLUMNS, lineterminator="\n")
        w.writeheader()

        def emit(new):
            rows.extend(new)
            w.writerows(new)
            fh.flush()

        if threads == 1:
            for k, t in jobs:
                emit(run_trial(cfg, k, t))
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futs = [pool.submit(run_trial, cfg, k, t) for k, t in jobs]
                for fut in as_completed(futs):
                    emit(fut.result())
    rows.sort(key=_sort_key)
    write_results(out / "results.csv", rows)
    summary = summarize(rows)
    write_summary(out, summary, cfg)
    with open(out / "config.json", "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rows


def write_results(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def read_results(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


METRICS = {"clustering": "clustering_error", "completion": "completion_error",
           "subspace": "subspace_error_max_rad"}


def summarize(rows):
    """Per (algorithm, p): mean, standard error and count of each metric
    over trials whose status is not FAILED."""
    groups = {}
    for r in rows:
        if r["status"].startswith("FAILED"):
            continue
        groups.setdefault((r["algorithm"], float(r["p"])), []).append(r)
    out = {}
    for key, rs in sorted(groups.items()):
        entry = {"n": len(rs)}
        for name, col in METRICS.items():
            v = np.array([float(r[col]) for r in rs])
            entry[name] = float(v.mean())
            entry[name + "_se"] = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        out[key] = entry
    return out


def curve(summary, algorithm, metric):
    ps = sorted(p for a, p in summary if a == algorithm)
    return np.array(ps), np.array([summary[(algorithm, p)][metric] for p in ps])


def threshold(ps, means, level):
    """Smallest grid value whose mean is below ``level`` (``nan`` if none)."""
    hit = np.flatnonzero(np.asarray(means) < level)
    return float(ps[hit[0]]) if hit.size else float("nan")


def sustained_threshold(ps, means, level):
    """Smallest grid value from which every larger grid value stays below
    ``level``."""
    below = np.asarray(means) < level
    if not below.size or not below[-1]:
        return float("nan")
    k = below.size - 1
    while k > 0 and below[k - 1]:
        k -= 1
    return float(ps[k])


LEVELS = {"clustering": 1e-3, "completion": 1e-3, "subspace": 0.01}


def bootstrap_threshold(rows, algorithm, metric, level, reps=1000, seed=0):
    """Percentile interval of the threshold under resampling of trials."""
    col = METRICS[metric]
    by_p = {}
    for r in rows:
        if r["algorithm"] == algorithm and not r["status"].startswith("FAILED"):
            by_p.setdefault(float(r["p"]), []).append(float(r[col]))
    ps = np.array(sorted(by_p))
    vals = [np.array(by_p[p]) for p in ps]
    rng = np.random.default_rng(seed)
    draws = []
    for _ in range(reps):
        means = [v[rng.integers(0, v.size, v.size)].mean() for v in vals]
        draws.append(threshold(ps, means, level))
    draws = np.array(draws)
    finite = draws[np.isfinite(draws)]
    if finite.size == 0:
        return float("nan"), float("nan")
    return float(np.percentile(finite, 2.5)), float(np.percentile(finite, 97.5))


def thresholds(rows, summary=None, bootstrap=True):
    summary = summarize(rows) if summary is None else summary
    algs = sorted({a for a, _ in summary})
    out = {}
    for alg in algs:
        out[alg] = {}
        for metric, level in LEVELS.items():
            ps, means = curve(summary, alg, metric)
            entry = {"level": level, "threshold": threshold(ps, means, level),
                     "sustained": sustained_threshold(ps, means, level)}
            if bootstrap:
                entry["ci95"] = bootstrap_threshold(rows, alg, metric, level)
            out[alg][metric] = entry
    return out


def write_summary(out, summary, cfg):
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "p", "n"] + [f"{m}{s}" for m in METRICS for s in ("", "_se")])
        for (alg, p), e in sorted(summary.items()):
            w.writerow([alg, format(p, ".10g"), e["n"]] +
                       [_fmt(e[f"{m}{s}"]) for m in METRICS for s in ("", "_se")])
    algs = [a for a in cfg.algorithms if any(k[0] == a for k in summary)]
    for metric in METRICS:
        with open(out / f"fig_case{cfg.case}_{metric}.dat", "w") as fh:
            fh.write("# p " + " ".join(f"{a} {a}_se" for a in algs) + "\n")
            for p in cfg.p_grid:
                vals = []
                for a in algs:
                    e = summary.get((a, p))
                    vals += (["nan", "nan"] if e is None
                             else [_fmt(e[metric]), _fmt(e[metric + "_se"])])
                fh.write(format(p, ".10g") + " " + " ".join(vals) + "\n")
    rows = read_results(out / "results.csv")
    with open(out / "thresholds.json", "w") as fh:
        json.dump(thresholds(rows, summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# certificates

@dataclass
class CertifyConfig:
    n: int = 10
    d: int = 2
    L: int = 2
    N_per: int = 20
    p: float = 0.6
    trials: int = 5
    master_seed: int = 0
    max_points: int | None = None
    output_dir: str = "certify"

    def __post_init__(self):
        if not 0 < self.p <= 1 or self.trials < 1:
            raise ParameterError("need 0 < p <= 1 and trials >= 1")

    @classmethod
    def from_json(cls, path):
        return _load_config(cls, path)


def run_certify(cfg, case):
    """Certify every point of fresh orthonormal-mode instances and tabulate
    verdict against the observed SSC-LP support.

    Returns ``(table, records)`` where ``table[(certified, correct)]`` counts
    points; the ``(True, False)`` cell must stay empty.
    """
    table = {(c, k): 0 for c in (True, False) for k in (True, False)}
    records = []
    for trial in range(cfg.trials):
        seed = trial_seed(cfg.master_seed, case, trial)
        ens, X = generate_ensemble(cfg.n, cfg.d, cfg.L, cfg.N_per,
                                   GenerationMode.ORTHONORMAL, seed)
        N = X.shape[1]
        if case == 1:
            pattern = sample_case1(cfg.n, N, cfg.p)
        elif case == 2:
            pattern = sample_case2(cfg.n, N, cfg.d, seed)
        else:
            pattern = sample_case3(cfg.n, N, cfg.p, seed)
        ds = zero_fill(X, pattern, ens.labels, {"counts": ens.counts})
        points = range(N) if cfg.max_points is None else range(min(N, cfg.max_points))
        for i in points:
            entry = cert.certify_points(ens, pattern, ds, case, [i]).entries[0]
            col, status = cert.ssc_lp_column(ds, i)
            other = ens.labels != ens.labels[i]
            correct = (status is SolveStatus.OPTIMAL and
                       not bool(np.any(np.abs(col[other]) > cert.SUPPORT_TOL)))
            certified = entry.verdict is cert.Verdict.CERTIFIED
            table[(certified, correct)] += 1
            records.append((trial, entry, correct, status))
    return table, records


def write_certify(out, case, table, records):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"certificates_case{case}.txt", "w") as fh:
        for trial, entry, correct, status in records:
            fh.write(f"trial={trial} {entry.to_record()} support_correct="
                     f"{'yes' if correct else 'no'} lp_status={status.value}\n")
    with open(out / f"contingency_case{case}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["certified", "support_correct", "count"])
        for (c, k), v in sorted(table.items(), reverse=True):
            w.writerow([int(c), int(k), v])
