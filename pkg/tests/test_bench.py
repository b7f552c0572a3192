import json

import numpy as np
import pytest

from ssclp import bench
from ssclp.exceptions import ParameterError


def _tiny(tmp_path, **kw):
    cfg = dict(n=12, d=2, L=2, N_per=15, case=3, p_grid=[0.5, 0.8],
               trials=2, master_seed=3, output_dir=str(tmp_path / "out"))
    cfg.update(kw)
    return bench.ExperimentConfig(**cfg)


def test_config_validation(tmp_path):
    with pytest.raises(ParameterError):
        _tiny(tmp_path, p_grid=[0.0])
    with pytest.raises(ParameterError):
        _tiny(tmp_path, trials=0)
    with pytest.raises(ParameterError):
        _tiny(tmp_path, algorithms=["k-means"])
    with pytest.raises(ParameterError):
        _tiny(tmp_path, svt={"bogus": 1})
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": 10, "extra": 1}))
    with pytest.raises(ParameterError):
        bench.ExperimentConfig.from_json(path)


def test_trial_seed_is_counter_based():
    assert bench.trial_seed(0, 1, 2) == bench.trial_seed(0, 1, 2)
    seeds = {bench.trial_seed(0, k, t) for k in range(5) for t in range(5)}
    assert len(seeds) == 25


def test_sweep_outputs(tmp_path):
    cfg = _tiny(tmp_path)
    rows = bench.run_sweep(cfg, threads=1)
    out = tmp_path / "out"
    assert len(rows) == 2 * 2 * 3
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header == ("case,p,trial,algorithm,clustering_error,completion_error,"
                      "subspace_error_max_rad,status,seed")
    for name in ("summary.csv", "thresholds.json", "config.json",
                 "fig_case3_clustering.dat", "fig_case3_completion.dat",
                 "fig_case3_subspace.dat", "results.partial.csv"):
        assert (out / name).exists()
    # same seed for every algorithm of a trial (paired comparison)
    by_trial = {}
    for r in rows:
        by_trial.setdefault((r["p"], r["trial"]), set()).add(r["seed"])
    assert all(len(s) == 1 for s in by_trial.values())
    th = json.loads((out / "thresholds.json").read_text())
    assert set(th) == {"SSC-LP", "SSC-EWZF", "TSC"}
    assert "ci95" in th["TSC"]["clustering"]


def test_sweep_is_independent_of_worker_count(tmp_path):
    a = _tiny(tmp_path / "a")
    b = _tiny(tmp_path / "b")
    bench.run_sweep(a, threads=1)
    bench.run_sweep(b, threads=2)
    ra = (tmp_path / "a" / "out" / "results.csv").read_bytes()
    rb = (tmp_path / "b" / "out" / "results.csv").read_bytes()
    assert ra == rb


def test_failed_trials_are_recorded(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("injected")
    monkeypatch.setattr(bench, "complete_by_cluster", boom)
    rows = bench.run_sweep(_tiny(tmp_path, p_grid=[0.8], trials=1), threads=1)
    assert all(r["status"] == "FAILED:RuntimeError" for r in rows)


def test_threshold_helpers():
    ps = np.array([0.1, 0.2, 0.3, 0.4])
    means = np.array([0.5, 0.0, 0.2, 0.0])
    assert bench.threshold(ps, means, 1e-3) == 0.2
    assert bench.sustained_threshold(ps, means, 1e-3) == 0.4
    assert np.isnan(bench.threshold(ps, np.ones(4), 1e-3))


def test_worker_count(monkeypatch):
    monkeypatch.setenv("UOS_THREADS", "3")
    assert bench.worker_count() == 3
    monkeypatch.setenv("UOS_THREADS", "x")
    with pytest.raises(ParameterError):
        bench.worker_count()
