"""Tests for CSV artifacts."""

from utils.csv_writer import format_cell, read_csv, write_csv


def test_cell_formatting():
    assert format_cell(0.1 + 0.2) == "0.3"
    assert format_cell(3) == "3"
    assert format_cell(True) == "1"
    assert format_cell("mc") == "mc"


def test_round_trip_with_provenance(out_dir):
    path = write_csv(out_dir / "t.csv", ["x", "y"], [[0.5, 1.25], [1.0, 2.0]], {"seed": 7, "mode": "pdf"})
    provenance, columns, rows = read_csv(path)
    assert provenance == {"mode": "pdf", "seed": 7}
    assert columns == ["x", "y"]
    assert rows == [["0.5", "1.25"], ["1", "2"]]


def test_provenance_is_first_line_and_sorted(out_dir):
    path = write_csv(out_dir / "t.csv", ["x"], [[1.0]], {"z": 1, "a": 2})
    assert path.read_text().splitlines()[0] == '# {"a":2,"z":1}'


def test_rewrite_is_byte_identical_and_leaves_no_temp_files(out_dir):
    first = write_csv(out_dir / "t.csv", ["x"], [[0.123456789012345]], {"seed": 1}).read_bytes()
    second = write_csv(out_dir / "t.csv", ["x"], [[0.123456789012345]], {"seed": 1}).read_bytes()
    assert first == second
    assert sorted(p.name for p in out_dir.iterdir()) == ["t.csv"]
