import json

import pytest

from ssclp.cli import main


@pytest.fixture
def dataset(tmp_path):
    out = tmp_path / "ds"
    assert main(["generate", "--out", str(out), "--n", "12", "--d", "2", "--L", "2",
                 "--N-per", "12", "--case", "3", "--p", "0.7",
                 "--mode", "orthonormal", "--seed", "1"]) == 0
    return out


@pytest.mark.parametrize("alg", ["SSC-LP", "SSC-EWZF", "TSC"])
def test_cluster(tmp_path, dataset, alg, capsys):
    labels = tmp_path / "labels.csv"
    assert main(["cluster", str(dataset), "--algorithm", alg, "--out", str(labels),
                 "--coeffs-dir", str(tmp_path / "co")]) == 0
    assert labels.read_text().splitlines()[0] == "index,label"
    assert len(labels.read_text().splitlines()) == 25
    assert "clustering_error=" in capsys.readouterr().out


def test_complete(tmp_path, dataset, capsys):
    labels = tmp_path / "labels.csv"
    main(["cluster", str(dataset), "--out", str(labels)])
    code = main(["complete", str(dataset), "--labels", str(labels),
                 "--out", str(tmp_path / "rec"), "--max-iter", "2000"])
    assert code in (0, 2)
    assert (tmp_path / "rec" / "values.csv").exists()
    assert "completion_error=" in capsys.readouterr().out


def test_certify_dataset(tmp_path, dataset, capsys):
    out = tmp_path / "report.txt"
    assert main(["certify", str(dataset), "--case", "3", "--points", "4",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4 and all(l.startswith("point=") for l in lines)


def test_certify_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 8, "d": 2, "L": 2, "N_per": 6, "trials": 1,
                               "p": 0.75}))
    assert main(["certify", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "certified&incorrect=0" in capsys.readouterr().out
    assert (tmp_path / "o" / "contingency_case2.csv").exists()


def test_sweep(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"n": 12, "d": 2, "L": 2, "N_per": 12, "case": 3,
                               "p_grid": [0.8], "trials": 1,
                               "output_dir": str(tmp_path / "r")}))
    assert main(["sweep", str(cfg)]) == 0
    assert (tmp_path / "r" / "results.csv").exists()


@pytest.mark.parametrize("content", ['{"trials": 0}', '{"nope": 1}', "not json",
                                     '{"p_grid": [1.5]}'])
def test_config_errors_exit_1(tmp_path, content, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content)
    assert main(["sweep", str(cfg)]) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_dataset_exit_1(tmp_path):
    assert main(["cluster", str(tmp_path / "none"), "--out", str(tmp_path / "l")]) == 1


def test_partial_failure_exit_2(tmp_path, monkeypatch):
    from ssclp import bench

    def boom(*a, **k):
        raise RuntimeError("injected")
    monkeypatch.setattr(bench, "complete_by_cluster", boom)
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"n": 12, "d": 2, "L": 2, "N_per": 12, "p_grid": [0.8],
                               "trials": 1, "output_dir": str(tmp_path / "r")}))
    assert main(["sweep", str(cfg), "--threads", "1"]) == 2
