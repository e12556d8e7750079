import json
import math

import numpy as np
import pytest

from edgepump import io as eio


def test_csv_float_roundtrip(tmp_path):
    path = tmp_path / "t.csv"
    vals = [1.0 / 3.0, 1e-300, 123456789.123456789, -0.0]
    eio.write_csv(path, ["x"], [[v] for v in vals])
    lines = path.read_text().splitlines()
    assert lines[0] == "x"
    back = [float(s) for s in lines[1:]]
    assert back == vals


def test_csv_bool_and_int(tmp_path):
    path = tmp_path / "t.csv"
    eio.write_csv(path, ["a", "b", "c"], [[True, False, np.int64(7)]])
    assert path.read_text().splitlines()[1] == "1,0,7"


def test_manifest_deterministic(tmp_path):
    payload = {"b": 2.5, "a": np.float64(1.0),
                "arr": np.arange(3), "inf": math.inf}
    p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
    eio.write_manifest(p1, payload)
    eio.write_manifest(p2, payload)
    assert p1.read_bytes() == p2.read_bytes()
    body = json.loads(p1.read_text())
    assert body["schema_version"] == eio.SCHEMA_VERSION
    assert body["arr"] == [0, 1, 2]
    assert body["inf"] == "inf"       # json has no inf literal
    # sorted keys, no timestamps
    assert list(body) == sorted(body)
    assert not any("time" in k or "date" in k for k in body)


def test_naps_json(tmp_path):
    path = tmp_path / "naps.json"
    eio.write_naps_json(path, [0.5, np.float64(3.25)])
    body = json.loads(path.read_text())
    assert body["naps"] == [0.5, 3.25]
    assert body["schema_version"] == eio.SCHEMA_VERSION
