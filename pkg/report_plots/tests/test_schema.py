"""Header validation and raw column access."""

import pytest

from report_plots.schema import (
    EmptyInputError,
    SchemaError,
    floats,
    paired,
    read_columns,
)


def _write(path, text):
    path.write_text(text)
    return path


def test_reads_columns_by_name(tmp_path):
    p = _write(tmp_path / "a.csv", "x,y,z\n1,2,3\n4,,6\n")
    cols = read_columns(p, ("x", "z"))
    assert cols["x"] == ["1", "4"]
    assert cols["y"] == ["2", ""]
    assert cols["z"] == ["3", "6"]


def test_missing_column_is_named(tmp_path):
    p = _write(tmp_path / "a.csv", "x,y\n1,2\n")
    with pytest.raises(SchemaError) as exc:
        read_columns(p, ("x", "tau"))
    assert exc.value.missing == ("tau",)
    assert "tau" in str(exc.value)


def test_all_missing_columns_are_named(tmp_path):
    p = _write(tmp_path / "a.csv", "x\n1\n")
    with pytest.raises(SchemaError) as exc:
        read_columns(p, ("t_day", "x", "w_kcal"))
    assert exc.value.missing == ("t_day", "w_kcal")
    msg = str(exc.value)
    assert "t_day" in msg and "w_kcal" in msg


def test_header_checked_before_data(tmp_path):
    # schema failure must win even when the file also has no rows
    p = _write(tmp_path / "a.csv", "x,y\n")
    with pytest.raises(SchemaError):
        read_columns(p, ("q",))


def test_empty_data_rejected(tmp_path):
    p = _write(tmp_path / "a.csv", "x,y\n")
    with pytest.raises(EmptyInputError):
        read_columns(p, ("x",))
    q = _write(tmp_path / "b.csv", "")
    with pytest.raises(SchemaError):
        read_columns(q, ("x",))


def test_extra_columns_are_kept(tmp_path):
    p = _write(tmp_path / "a.csv", "x,new_thing\n1,7\n")
    cols = read_columns(p, ("x",))
    assert cols["new_thing"] == ["7"]


def test_float_parsing_and_pairing():
    assert floats(["1.5", "", "2"]) == [1.5, None, 2.0]
    xs, ys = paired([1.0, None, 3.0, 4.0], [10.0, 20.0, None, 40.0])
    assert xs == [1.0, 4.0]
    assert ys == [10.0, 40.0]
