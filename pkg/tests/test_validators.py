"""Tests for configuration parsing helpers."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from utils.validators import (
    check_unknown_keys,
    parse_grid,
    parse_key_value_text,
    validate_float,
    validate_positive,
    validate_positive_int,
)


class TestKeyValueText:
    """Plain-text key=value files."""

    def test_comments_case_and_dashes(self):
        ok, values, error = parse_key_value_text("# header\nAlpha = 2  # nonlinearity\n\nsnr-db=0:40:2\n")
        assert ok, error
        assert values == {"alpha": "2", "snr_db": "0:40:2"}

    def test_missing_equals(self):
        ok, _, error = parse_key_value_text("alpha 2")
        assert not ok
        assert error.startswith("line 1")

    def test_duplicate_key(self):
        ok, _, error = parse_key_value_text("mu=1\nmu=2")
        assert not ok
        assert "duplicate" in error


class TestNumbers:
    """Scalar validators return (ok, value, message)."""

    def test_float(self):
        assert validate_float("2.5") == (True, 2.5, "")
        assert not validate_float("abc", "eta")[0]
        assert not validate_float("inf")[0]

    def test_positive(self):
        assert validate_positive("0.1")[0]
        ok, _, error = validate_positive("0", "kappa")
        assert not ok and error.startswith("kappa")

    @pytest.mark.parametrize("text,value", [("100", 100), ("1e7", 10_000_000)])
    def test_positive_int(self, text, value):
        assert validate_positive_int(text) == (True, value, "")

    def test_positive_int_rejects_fraction(self):
        assert not validate_positive_int("2.5")[0]


class TestGrids:
    """start:stop:step and list grids."""

    def test_inclusive_stop(self):
        ok, grid, _ = parse_grid("0:3:0.02")
        assert ok
        assert grid.size == 151
        assert grid[-1] == pytest.approx(3.0)

    def test_points_are_not_accumulated(self):
        grid = parse_grid("0:40:0.1")[1]
        assert_allclose(grid, 0.1 * np.arange(401), rtol=0, atol=1e-12)

    def test_list(self):
        assert_allclose(parse_grid("10, 20,30")[1], [10.0, 20.0, 30.0])

    @pytest.mark.parametrize("text", ["", "0:1", "0:1:0", "3:1:1", "0:x:1", "1,,2"])
    def test_invalid(self, text):
        assert not parse_grid(text, "grid")[0]


def test_unknown_keys():
    ok, unknown, error = check_unknown_keys(["alpha", "colour", "beta"], ["alpha", "mu"])
    assert not ok
    assert unknown == ["beta", "colour"]
    assert "beta" in error
