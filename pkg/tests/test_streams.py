"""Tests for counter-addressed random streams."""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from services.streams import RandomStream, normal_pair


class TestAddressing:
    """Every variate depends only on (seed, stream_id, counter)."""

    def test_reproducible(self):
        assert_array_equal(RandomStream(11).uniforms(50), RandomStream(11).uniforms(50))

    @pytest.mark.parametrize("split", [1, 3, 4, 17])
    def test_split_draws_match_one_draw(self, split):
        whole = RandomStream(5).uniforms(40)
        stream = RandomStream(5)
        parts = np.concatenate([stream.uniforms(split), stream.uniforms(40 - split)])
        assert_array_equal(parts, whole)

    def test_jump_to_counter(self):
        whole = RandomStream(5, stream_id=2).uniforms(100)
        assert_array_equal(RandomStream(5, stream_id=2).at(37).uniforms(63), whole[37:])

    def test_streams_and_seeds_differ(self):
        base = RandomStream(5).uniforms(8)
        assert not np.array_equal(base, RandomStream(5).substream(1).uniforms(8))
        assert not np.array_equal(base, RandomStream(6).uniforms(8))

    def test_counter_advances(self):
        stream = RandomStream(1)
        stream.uniforms(7)
        stream.normals(3)
        assert stream.counter == 7 + 4


class TestDistributions:
    """Uniform range and Box-Muller normals."""

    def test_uniform_range(self):
        u = RandomStream(9).uniforms(100_000)
        assert u.min() > 0.0
        assert u.max() <= 1.0
        assert abs(u.mean() - 0.5) < 5.0 * np.sqrt(1.0 / 12.0 / u.size)

    def test_normal_moments(self):
        z = RandomStream(9).normals(200_000)
        assert abs(z.mean()) < 5.0 / np.sqrt(z.size)
        assert abs(z.var() - 1.0) < 5.0 * np.sqrt(2.0 / z.size)

    def test_normal_pair_consumes_two_uniforms(self):
        stream = RandomStream(4)
        a, b = normal_pair(stream)
        assert stream.counter == 2
        assert_array_equal(np.array([a, b]), RandomStream(4).normals(2))
