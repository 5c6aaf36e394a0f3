import json

import numpy as np
import pytest

from cjdesign import fileio
from cjdesign.core import PriorSpec, SchedulingDistribution
from cjdesign.scheduler import approx_schedule

from conftest import random_psd


@pytest.mark.parametrize("suffix", [".csv", ".mtx"])
def test_matrix_round_trip(tmp_path, rng, suffix):
    M = random_psd(5, rng)
    path = tmp_path / f"m{suffix}"
    fileio.write_matrix(path, M)
    np.testing.assert_array_equal(fileio.read_matrix(path), M)


def test_sparse_adjacency_mtx(tmp_path):
    A = np.zeros((4, 4))
    A[0, 1] = A[1, 0] = 1
    fileio.write_matrix(tmp_path / "a.mtx", A)
    np.testing.assert_array_equal(fileio.read_matrix(tmp_path / "a.mtx"), A)


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_schedule_round_trip_bit_identical(tmp_path, rng, fmt):
    S = approx_schedule(PriorSpec(random_psd(9, rng)))
    path = tmp_path / f"s.{fmt}"
    fileio.write_schedule(path, S, fmt)
    back = fileio.read_schedule(path)
    assert back.n_objects == 9
    assert np.array_equal(back.probs, S.probs)


def test_schedule_json_schema(tmp_path):
    S = approx_schedule(PriorSpec(np.eye(3)))
    fileio.write_schedule(tmp_path / "s.json", S)
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["n"] == 3 and doc["method"] == "rbd"
    assert [(p["i"], p["j"]) for p in doc["pairs"]] == [(1, 2), (1, 3), (2, 3)]
    assert {"tol", "d", "residual", "seconds"} <= set(doc["meta"])


def test_schedule_missing_pair(tmp_path):
    (tmp_path / "s.csv").write_text("i,j,q\n1,2,0.5\n2,3,0.5\n")
    with pytest.raises(ValueError):
        fileio.read_schedule(tmp_path / "s.csv")


def test_read_comparisons_formats(tmp_path):
    (tmp_path / "agg.csv").write_text("i,j,y,n\n1,2,3,4\n3,2,1,2\n")
    (tmp_path / "raw.csv").write_text("i,j,winner\n1,2,1\n1,2,1\n1,2,2\n1,2,1\n2,3,3\n3,2,2\n")
    agg = fileio.read_comparisons(tmp_path / "agg.csv")
    raw = fileio.read_comparisons(tmp_path / "raw.csv")
    assert agg.records() == raw.records() == [(1, 2, 3.0, 4.0), (2, 3, 1.0, 2.0)]
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        fileio.read_comparisons(tmp_path / "bad.csv")


def test_read_comparisons_empty_needs_n(tmp_path):
    (tmp_path / "e.csv").write_text("i,j,y,n\n")
    with pytest.raises(ValueError):
        fileio.read_comparisons(tmp_path / "e.csv")
    assert fileio.read_comparisons(tmp_path / "e.csv", 4).n_objects == 4


def test_unknown_schedule_format(tmp_path):
    with pytest.raises(ValueError):
        fileio.write_schedule(tmp_path / "s.txt", SchedulingDistribution(2, [1.0]), "xml")
