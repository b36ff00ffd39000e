import csv
import io
import json
import math

import numpy as np
import pytest

from kerrswitch import cli
from kerrswitch.config import merge, parse_config
from kerrswitch.emit import csv_text, json_text, jsonable, metadata_block, read_json
from kerrswitch.errors import ValidationError


def run_cli(tmp_path, *args, name="out"):
    path = tmp_path / name
    code = cli.main([*args, "-o", str(path), "--no-timestamp"])
    return code, path


# configuration

def test_parse_config_types_and_comments():
    cfg = parse_config("# header\nG = 6\nN=30 # inline\nmethods = numeric-gap, kramers-barrier\n\ngrid.spacing = log\n")
    assert cfg == {"G": 6.0, "N": 30, "methods": ["numeric-gap", "kramers-barrier"], "grid.spacing": "log"}
    assert isinstance(cfg["N"], int)


@pytest.mark.parametrize("text", ["G 6", "bogus = 1", "N = 3.5"])
def test_parse_config_rejects(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_precedence():
    assert merge({"G": 1, "eta": 1}, {"G": 2, "Delta": 3}, {"G": 4, "Delta": None}) == {"G": 4, "eta": 1, "Delta": 3}


def test_config_file_and_flag_in_metadata(tmp_path):
    conf = tmp_path / "c.txt"
    conf.write_text("G = 5\nDelta = 2\n")
    code, path = run_cli(tmp_path, "fixed-points", "--config", str(conf), "--Delta", "1.5", "--format", "json")
    assert code == 0
    meta = read_json(path)["metadata"]
    assert meta["config"]["G"] == 5 and meta["config"]["Delta"] == 1.5
    assert "timestamp" not in meta and "version" in meta


# emitters

def test_header_only_csv():
    assert csv_text(["Delta", "gamma_numeric"], []) == "Delta,gamma_numeric\r\n"


def test_csv_round_trip_floats():
    vals = [0.1, 1 / 3, 1e-300, 6.02e23]
    text = csv_text(["a", "b", "c"], [[v, None, True] for v in vals])
    rows = list(csv.reader(io.StringIO(text)))
    assert [float(r[0]) for r in rows[1:]] == vals
    assert rows[1][1:] == ["", "true"]


def test_csv_quoting():
    text = csv_text(["s"], [["a,b"], ['say "x"']])
    assert list(csv.reader(io.StringIO(text)))[1:] == [["a,b"], ['say "x"']]


def test_json_non_finite_and_complex():
    out = jsonable({"a": math.inf, "b": -math.inf, "c": math.nan, "z": 1 + 2j, "arr": np.arange(2)})
    assert out == {"a": "inf", "b": "-inf", "c": "nan", "z": [1.0, 2.0], "arr": [0, 1]}


def test_json_is_sorted_and_stable():
    meta = metadata_block({"b": 1, "a": 2}, seed=3, timestamp=False)
    a = json_text({"z": 1, "y": [1.5]}, meta)
    assert a == json_text({"y": [1.5], "z": 1}, meta)
    assert list(json.loads(a)["result"]) == ["y", "z"]


def test_sweep_json_round_trip(tmp_path):
    code, path = run_cli(tmp_path, "sweep", "--methods", "kramers-barrier", "--start", "1", "--stop", "5",
                         "--count", "3", "--format", "json")
    assert code == 0
    res = read_json(path)["result"]
    assert res["columns"] == ["Delta", "gamma_barrier", "status_barrier"]
    assert [r[0] for r in res["rows"]] == [1.0, 3.0, 5.0]


def test_sweep_csv_schema(tmp_path):
    code, path = run_cli(tmp_path, "sweep", "--start", "2", "--stop", "4", "--count", "2")
    assert code == 0
    header = path.read_text().splitlines()[0]
    assert header == "Delta,gamma_numeric,gamma_barrier,status_numeric,status_barrier"


# exit codes

def test_validation_exit_code(tmp_path):
    assert run_cli(tmp_path, "gap", "--G", "-1")[0] == 2
    assert run_cli(tmp_path, "sweep", "--methods", "nope")[0] == 2


def test_partial_failure_exit_code(tmp_path):
    code, path = run_cli(tmp_path, "sweep", "--methods", "kramers-full", "--start", "1", "--stop", "7", "--count", "3")
    assert code == 3
    assert "error:" in path.read_text()


def test_io_exit_code(tmp_path):
    assert cli.main(["fixed-points", "-o", str(tmp_path / "missing" / "x.csv")]) == 4
    assert cli.main(["fixed-points", "--config", str(tmp_path / "nope.txt")]) == 4


def test_wigner_raster(tmp_path):
    from kerrswitch.grids import PhaseSpaceGrid
    code, path = run_cli(tmp_path, "wigner", "--n", "9", "--format", "raster")
    assert code == 0
    grid = PhaseSpaceGrid.from_raster(path.read_bytes())
    assert grid.values.shape == (9, 9) and np.all(grid.values > 0)


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "kerrswitch", "fixed-points", "--format", "json", "--no-timestamp"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["result"]
