import json
import math
import struct

import numpy as np
import pytest

from dbec.config import RunConfig, apply, parse_config, parse_text
from dbec.errors import ConfigError, FormatError, IoError
from dbec.grid import WaveField, make_grid
from dbec.io import (
    MAGIC,
    fmt,
    read_csv,
    read_report,
    read_snapshot,
    write_csv,
    write_report,
    write_snapshot,
)


@pytest.fixture
def field(rng):
    g = make_grid((8, 16, 8), (2.0, 3.0, 2.5))
    return WaveField(g, rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n))


def test_snapshot_round_trip_bit_exact(tmp_path, field):
    p = tmp_path / "f.bin"
    write_snapshot(p, field)
    back = read_snapshot(p)
    assert back.grid == field.grid
    assert back.values.tobytes() == field.values.tobytes()


def test_snapshot_layout(tmp_path, field):
    p = tmp_path / "f.bin"
    write_snapshot(p, field)
    raw = p.read_bytes()
    assert raw[:4] == MAGIC
    assert struct.unpack_from("<I", raw, 4)[0] == 1
    assert struct.unpack_from("<3I", raw, 8) == (8, 16, 8)
    first = np.frombuffer(raw, "<c16", count=2, offset=44)
    # x1 runs fastest
    assert first[1] == field.values[1, 0, 0]


def test_truncated_snapshot(tmp_path, field):
    p = tmp_path / "f.bin"
    write_snapshot(p, field)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(FormatError):
        read_snapshot(p)
    p.write_bytes(b"DBE")
    with pytest.raises(FormatError):
        read_snapshot(p)


def test_bad_magic_and_version(tmp_path, field):
    p = tmp_path / "f.bin"
    write_snapshot(p, field)
    raw = bytearray(p.read_bytes())
    bad = bytearray(raw)
    bad[:4] = b"XXXX"
    p.write_bytes(bytes(bad))
    with pytest.raises(FormatError, match="magic"):
        read_snapshot(p)
    struct.pack_into("<I", raw, 4, 2)
    p.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="supported versions: 1"):
        read_snapshot(p)


def test_missing_snapshot(tmp_path):
    with pytest.raises(IoError):
        read_snapshot(tmp_path / "nope.bin")


def test_report_sorted_and_lossless(tmp_path):
    data = {"b": 0.1 + 0.2, "a": math.nan, "c": [1, 2.5], "d": np.float64(1 / 3)}
    p = tmp_path / "r.json"
    write_report(p, data)
    text = p.read_text()
    assert list(json.loads(text)) == ["a", "b", "c", "d"]
    back = read_report(p)
    assert back["a"] is None
    assert back["b"] == 0.1 + 0.2
    assert back["d"] == 1 / 3


def test_csv_17_digits(tmp_path):
    p = tmp_path / "t.csv"
    x = 1 / 3
    write_csv(p, ("x", "flag"), [(x, True)])
    header, rows = read_csv(p)
    assert header == ["x", "flag"]
    assert float(rows[0][0]) == x
    assert fmt(x) == "0.33333333333333331"


# ---------------------------------------------------------------- config


def test_defaults_from_minimal_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# minimal\nlambda1 = -1\nlambda2 = 0.3\nmass = 1\n")
    cfg = parse_config(p)
    assert cfg.grid == (64, 64, 64)
    assert cfg.box == (8.0, 8.0, 8.0)
    assert cfg.trap == 0.0
    assert (cfg.lambda1, cfg.lambda2, cfg.mass) == (-1.0, 0.3, 1.0)


def test_unknown_key(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("lamda1 = -1\n")
    with pytest.raises(ConfigError, match="lamda1"):
        parse_config(p)


def test_negative_trap():
    with pytest.raises(ConfigError) as ei:
        parse_config(overrides={"trap": "-0.5"})
    assert ei.value.key == "trap"
    assert "trap must be ≥ 0" in str(ei.value)


@pytest.mark.parametrize("key, value", [
    ("grid", "12"), ("box", "-1"), ("dt", "0"), ("mass", "0"), ("tol", "-1"),
    ("lambda1", "nan"), ("experiment", "bogus"), ("complex_field", "maybe"),
    ("lambda1_range", "1,0"), ("max_iters", "abc"),
])
def test_invalid_values_name_key(key, value):
    with pytest.raises(ConfigError) as ei:
        parse_config(overrides={key: value})
    assert ei.value.key == key


def test_grammar():
    vals = parse_text("a-b = 1, 2 # comment\n\n  c=x\n")
    assert vals == {"a_b": "1, 2", "c": "x"}
    with pytest.raises(ConfigError):
        parse_text("novalue\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_text("a = 1\na = 2\n")


def test_flags_override_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("lambda1 = -2\ngrid = 32\n")
    cfg = parse_config(p, {"lambda1": "-3", "box": "4,4,8"})
    assert cfg.lambda1 == -3.0
    assert cfg.grid == (32, 32, 32)
    assert cfg.box == (4.0, 4.0, 8.0)


def test_echo_round_trip(tmp_path):
    cfg = parse_config(overrides={"lambda2": "0.25", "tol": "1e-9", "a_list": "0.3,0.1",
                                  "experiment": "gap"})
    p = tmp_path / "echo.cfg"
    cfg.echo(p)
    assert parse_config(p) == cfg


def test_every_key_settable():
    cfg = RunConfig()
    for line in cfg.to_lines():
        k, v = (s.strip() for s in line.split("=", 1))
        assert apply(cfg, {k: v}) == cfg
