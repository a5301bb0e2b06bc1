import json

import numpy as np
import pandas as pd

from mprk.analytics.generate import (
    read_snapshot, snapshot_name, write_history_csv, write_json, write_snapshot,
)
from mprk.analytics.metrics import HISTORY_COLUMNS, ConservationHistory


def test_snapshot_name():
    assert snapshot_name(2, 41) == "snapshot_d2_000041.dat"


def test_snapshot_is_bit_exact(small_problem, tmp_path):
    _, state = small_problem("manufactured")
    path = write_snapshot(state.field2, 2, 0.125, 3, tmp_path)
    header, field = read_snapshot(path)
    assert header["domain"] == "2"
    assert float(header["time"]) == 0.125
    assert header["variables"] == "rho rhou rhov rhow rhoE"
    assert header["dtype"] == "<f8"
    assert field.grid == state.field2.grid
    np.testing.assert_array_equal(field.data, state.field2.data)


def test_snapshot_payload_size(small_problem, tmp_path):
    _, state = small_problem("manufactured")
    path = write_snapshot(state.field1, 1, 0.0, 0, tmp_path)
    raw = path.read_bytes()
    payload = raw[raw.index(b"end_header\n") + len(b"end_header\n"):]
    assert len(payload) == 8 * state.field1.data.size
    assert raw.startswith(b"mprk-snapshot 1\n")


def test_history_csv(small_problem, tmp_path):
    _, state = small_problem("manufactured")
    history = ConservationHistory()
    history.append(state)
    history.append(state)
    path = write_history_csv(history, tmp_path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == HISTORY_COLUMNS
    assert len(frame) == 2
    assert frame["mass"].iloc[0] == history.records[0]["mass"]


def test_json_writer_handles_paths(tmp_path):
    path = write_json({"output": tmp_path, "n": 3}, tmp_path / "out.json")
    data = json.loads(path.read_text())
    assert data == {"output": str(tmp_path), "n": 3}
