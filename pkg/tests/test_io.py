import math
import os

import numpy as np
import pytest

from wassreward import io
from wassreward.exceptions import InvalidArgumentError
from wassreward.lab import ResultRecord
from wassreward.rewards import DiscreteMeasure, RewardTable


def records():
    return [ResultRecord("noise", 0.0, -1, "c_hat", 0.0, True, 0.0),
            ResultRecord("noise", 0.1, 0, "wp_noise", 1 / 3, True, 12.5),
            ResultRecord("noise", 0.1, 1, "wp_noise", float("nan"), False, 4.0)]


def test_reward_table_round_trip(tmp_path):
    values = np.random.default_rng(0).normal(size=(4, 5))
    path = tmp_path / "r.csv"
    io.write_reward_table(RewardTable(values), path)
    assert np.array_equal(io.read_reward_table(path).values, values)


def test_reward_set_round_trip(tmp_path):
    tables = [RewardTable(x) for x in np.random.default_rng(1).normal(size=(3, 2, 5))]
    path = tmp_path / "set.csv"
    io.write_reward_set(tables, path)
    back = io.read_reward_set(path)
    assert len(back) == 3
    assert all(np.array_equal(a.values, b.values) for a, b in zip(tables, back))


def test_measure_and_matrix_round_trip(tmp_path):
    w = np.random.default_rng(2).dirichlet(np.ones(7))
    io.write_measure(DiscreteMeasure(w), tmp_path / "m.csv")
    assert np.array_equal(io.read_measure(tmp_path / "m.csv").weights, w)
    c = np.array([[0.0, 1.5], [1.5, 0.0]])
    io.write_matrix(c, tmp_path / "c.csv")
    assert np.array_equal(io.read_metric(tmp_path / "c.csv").costs, c)


def test_records_round_trip_including_nan(tmp_path):
    path = tmp_path / "rec.csv"
    io.write_records(records(), path)
    back = io.read_records(path)
    assert back[:2] == records()[:2]
    assert math.isnan(back[2].value) and back[2].converged is False


def test_empty_and_single_record_files(tmp_path):
    io.write_records([], tmp_path / "empty.csv")
    assert io.read_records(tmp_path / "empty.csv") == []
    io.write_records(records()[:1], tmp_path / "one.csv")
    assert io.read_records(tmp_path / "one.csv") == records()[:1]


def test_write_records_requires_canonical_order(tmp_path):
    with pytest.raises(InvalidArgumentError):
        io.write_records(records()[::-1], tmp_path / "x.csv")


def test_digest_ignores_wall_time(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    io.write_records(records(), a)
    slower = [ResultRecord(r.kind, r.variable, r.seed, r.metric, r.value, r.converged, r.wall_ms + 99)
              for r in records()]
    io.write_records(slower, b)
    assert io.records_digest(a) == io.records_digest(b)
    changed = records()
    changed[1] = ResultRecord("noise", 0.1, 0, "wp_noise", 0.5, True, 12.5)
    io.write_records(changed, b)
    assert io.records_digest(a) != io.records_digest(b)


def test_manifest_round_trip_and_tamper_detection(tmp_path):
    path = tmp_path / "noise.csv"
    io.write_records(records(), path)
    manifest = io.RunManifest({"kind": "noise"}, 0, "0.1.0", "t0", "t1",
                              {"noise.csv": io.records_digest(path)})
    io.write_manifest(manifest, tmp_path)
    assert io.read_manifest(tmp_path) == manifest
    assert io.verify_manifest(tmp_path) == []
    path.write_text(path.read_text().replace("0.33333", "0.43333"))
    assert io.verify_manifest(tmp_path) == ["noise.csv"]
    os.remove(path)
    assert io.verify_manifest(tmp_path) == ["noise.csv"]


def test_malformed_inputs_report_file_and_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("state,action,value\n0,0,1.0\n0,1,oops\n")
    with pytest.raises(InvalidArgumentError, match="bad.csv:3"):
        io.read_reward_table(path)
    path.write_text("index,weight\n0,0.5\n0,0.5\n")
    with pytest.raises(InvalidArgumentError, match="duplicate"):
        io.read_measure(path)
    path.write_text("row,col\n")
    with pytest.raises(InvalidArgumentError, match="header"):
        io.read_matrix(path)
    path.write_text("state,action,value\n0,0,1.0\n1,1,1.0\n")
    with pytest.raises(InvalidArgumentError, match="every"):
        io.read_reward_table(path)
    with pytest.raises(InvalidArgumentError, match="cannot read"):
        io.read_measure(tmp_path / "missing.csv")
    (tmp_path / "manifest.json").write_text("{}")
    with pytest.raises(InvalidArgumentError, match="malformed"):
        io.read_manifest(tmp_path)


def test_atomic_write_replaces_and_leaves_no_temp(tmp_path):
    path = tmp_path / "out.txt"
    path.write_text("old")
    io.atomic_write_text(path, "new")
    assert path.read_text() == "new"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_unwritable_path_raises(tmp_path):
    with pytest.raises(InvalidArgumentError, match="cannot write"):
        io.atomic_write_text(tmp_path / "no" / "such" / "dir.csv", "x")
