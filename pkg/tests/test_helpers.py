# tests/test_helpers.py
import pandas as pd
import pytest

from app.utils.errors import GeometryDomainError, ScenarioError
from app.utils.helpers import db_to_linear, linear_to_db, parse_grid, write_csv
from app.utils.validators import clamp_nonnegative, clamp_unit_interval


def test_parse_grid_forms():
    assert parse_grid("5:25:10") == [5.0, 15.0, 25.0]
    assert parse_grid("0:1:0.1")[-1] == pytest.approx(1.0)
    assert len(parse_grid("0:1:0.1")) == 11
    assert parse_grid("1,2.5, 4") == [1.0, 2.5, 4.0]
    assert parse_grid("7") == [7.0]


@pytest.mark.parametrize("bad", ["1:2", "5:1:1", "0:1:0", "a,b"])
def test_parse_grid_rejects(bad):
    with pytest.raises(ScenarioError):
        parse_grid(bad, "lambda")


def test_decibels():
    assert db_to_linear(30.0) == pytest.approx(1000.0)
    assert linear_to_db(db_to_linear(-174.0)) == pytest.approx(-174.0)


def test_clamps():
    assert clamp_unit_interval(1.0 + 1e-14) == 1.0
    assert clamp_nonnegative(-1e-15) == 0.0
    with pytest.raises(GeometryDomainError):
        clamp_unit_interval(1.001)
    with pytest.raises(GeometryDomainError):
        clamp_nonnegative(-1e-3)


def test_write_csv_replaces_atomically(tmp_path):
    target = tmp_path / "rows.csv"
    target.write_text("stale\n")
    write_csv(pd.DataFrame({"a": [1, 2], "b": [0.5, 1.5]}), str(target))
    assert target.read_bytes() == b"a,b\n1,0.5\n2,1.5\n"
    assert [p.name for p in tmp_path.iterdir()] == ["rows.csv"]
