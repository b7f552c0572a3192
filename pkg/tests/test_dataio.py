import numpy as np
import pytest

from ssclp import dataio
from ssclp.exceptions import ParameterError
from ssclp.model import generate_ensemble, sample_case3, zero_fill
from ssclp.selfrep import ssc_lp_coefficients


@pytest.fixture
def dataset():
    ens, X = generate_ensemble(6, 2, 2, 4, seed=0)
    return ens, zero_fill(X, sample_case3(6, 8, 0.5, seed=0), ens.labels, {"L": 2})


def test_roundtrip(tmp_path, dataset):
    ens, ds = dataset
    dataio.write_dataset(tmp_path, ds)
    back = dataio.read_dataset(tmp_path)
    assert np.array_equal(back.zero_filled, ds.zero_filled)
    assert np.array_equal(back.mask, ds.mask)
    assert np.array_equal(back.full_matrix, ds.full_matrix)
    assert np.array_equal(back.true_labels, ds.true_labels)
    assert back.meta["L"] == 2
    row = (tmp_path / "values.csv").read_text().splitlines()[0].split(",")
    assert "" in row  # missing entries are empty fields


def test_ensemble_roundtrip(tmp_path, dataset):
    ens, _ = dataset
    dataio.write_ensemble(tmp_path / "e.npz", ens)
    back = dataio.read_ensemble(tmp_path / "e.npz")
    assert np.array_equal(back.matrix(), ens.matrix())


def test_shape_mismatch_is_reported(tmp_path, dataset):
    _, ds = dataset
    dataio.write_dataset(tmp_path, ds)
    lines = (tmp_path / "mask.csv").read_text().splitlines()
    (tmp_path / "mask.csv").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ParameterError, match="shape"):
        dataio.read_dataset(tmp_path)


def test_missing_observed_value_is_reported(tmp_path, dataset):
    _, ds = dataset
    dataio.write_dataset(tmp_path, ds)
    mask = ds.mask.astype(int)
    mask[:] = 1
    (tmp_path / "mask.csv").write_text(
        "\n".join(",".join(map(str, r)) for r in mask) + "\n")
    with pytest.raises(ParameterError):
        dataio.read_dataset(tmp_path)


def test_labels_roundtrip(tmp_path):
    dataio.write_labels(tmp_path / "l.csv", [3, 1, 2])
    assert list(dataio.read_labels(tmp_path / "l.csv")) == [3, 1, 2]


def test_coefficients_export(tmp_path, dataset):
    _, ds = dataset
    co = ssc_lp_coefficients(ds)
    dataio.write_coefficients(tmp_path, co)
    assert (tmp_path / "coeffs.csv").exists()
    import json
    meta = json.loads((tmp_path / "coeffs_meta.json").read_text())
    assert meta["algorithm"] == "SSC-LP" and len(meta["status"]) == ds.N
