import numpy as np
import pytest

from mubcert.counts import CountsTable, read_counts_csv, write_counts_csv
from mubcert.errors import CountsFormatError


@pytest.fixture
def table():
    rng = np.random.default_rng(1)
    return CountsTable(dim=4, cells=rng.integers(0, 500, (4, 4, 2, 4)))


def test_round_trip(tmp_path, table):
    path = tmp_path / "counts.csv"
    write_counts_csv(table, path)
    back = read_counts_csv(path)
    assert back.dim == 4
    assert np.array_equal(back.cells, table.cells)


def test_write_is_canonical(tmp_path, table):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_counts_csv(table, p1)
    write_counts_csv(read_counts_csv(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_rejects_duplicate_cells(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("i,j,y,outcome,count\n1,1,1,1,5\n1,1,1,1,6\n")
    with pytest.raises(CountsFormatError, match="duplicate"):
        read_counts_csv(path)


def test_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,1,1\n")
    with pytest.raises(CountsFormatError, match="header"):
        read_counts_csv(path)


def test_rejects_bad_indices(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("i,j,y,outcome,count\n1,1,3,1,5\n")
    with pytest.raises(CountsFormatError):
        read_counts_csv(path)


def test_rejects_negative_count(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("i,j,y,outcome,count\n1,1,1,1,-2\n")
    with pytest.raises(CountsFormatError):
        read_counts_csv(path)


def test_rejects_non_integer(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("i,j,y,outcome,count\n1,1,1,1,2.5\n")
    with pytest.raises(CountsFormatError):
        read_counts_csv(path)


def test_setting_totals(table):
    totals = table.setting_totals()
    assert totals.shape == (4, 4, 2)
    assert totals.sum() == table.total()
