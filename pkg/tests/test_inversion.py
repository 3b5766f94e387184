"""Tests for the inverse Laplace transforms."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from numerics.inversion import dehoog, fixed_talbot
from utils.error_handler import InversionFailure

TIMES = np.array([0.05, 0.3, 1.0, 2.5, 8.0])


@pytest.mark.parametrize("invert", [dehoog, fixed_talbot])
class TestKnownPairs:
    """Transform pairs with closed-form originals."""

    def test_exponential(self, invert):
        assert_allclose(invert(lambda s: 1.0 / (s + 1.0), TIMES), np.exp(-TIMES), rtol=1e-6)

    def test_ramp(self, invert):
        assert_allclose(invert(lambda s: 1.0 / s ** 2, TIMES), TIMES, rtol=1e-6)

    def test_algebraic_singularity(self, invert):
        expected = 1.0 / np.sqrt(math.pi * TIMES)
        assert_allclose(invert(lambda s: 1.0 / np.sqrt(s), TIMES), expected, rtol=1e-6)


class TestFailures:
    """Invalid input and non-finite transforms."""

    def test_non_positive_times(self):
        with pytest.raises(InversionFailure):
            dehoog(lambda s: 1.0 / s, [0.0, 1.0])

    def test_non_finite_transform(self):
        with pytest.raises(InversionFailure):
            dehoog(lambda s: np.full(np.shape(s), np.nan + 0j), [1.0])

    def test_talbot_non_finite_transform(self):
        with pytest.raises(InversionFailure):
            fixed_talbot(lambda s: np.full(np.shape(s), np.nan + 0j), [1.0])
