"""Tests for the chunked Monte Carlo engine and its estimators."""

import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from cli.checks import histogram_agreement
from cli.recipes import CANONICAL
from models.metrics import ModulationScheme
from models.rrs import RrsLink
from services.montecarlo_service import (
    BerReducer,
    CompositeReducer,
    HistogramReducer,
    MomentReducer,
    MonteCarloEngine,
    OutageReducer,
    conditional_ber,
    estimate_ber,
    estimate_outage,
    estimate_pdf,
)
from services.rrs_service import SumChannel
from services.streams import RandomStream
from utils.error_handler import DomainError, EmptyInput


def uniform_sampler(stream, count):
    return stream.uniforms(count)


@pytest.fixture
def uniform_engine():
    return MonteCarloEngine(uniform_sampler, 1, seed=11, chunk_size=1000)


class TestEstimators:
    """Stateless estimators on a sample array."""

    def test_histogram_density_and_overflow(self):
        hist = estimate_pdf([0.1, 0.2, 0.6, 1.5, -1.0], [0.0, 0.5, 1.0])
        assert_array_equal(hist.counts, [2, 1])
        assert (hist.below, hist.above, hist.total) == (1, 1, 5)
        np.testing.assert_allclose(hist.density, [0.8, 0.4])
        assert hist.integral == pytest.approx(0.6)

    def test_histogram_rejects_bad_edges(self):
        with pytest.raises(DomainError):
            estimate_pdf([0.1], [1.0, 0.5])

    @pytest.mark.parametrize("estimate", [estimate_outage, estimate_ber])
    def test_empty_input(self, estimate):
        argument = 1.0 if estimate is estimate_outage else ModulationScheme.named("bpsk")
        with pytest.raises(EmptyInput):
            estimate(np.array([]), argument)

    def test_outage_fraction(self):
        p, se = estimate_outage(np.array([0.5, 1.5, 2.5, 3.5]), 2.0)
        assert p == 0.5
        assert se == pytest.approx(0.25)

    def test_conditional_ber_closed_forms(self):
        snr = np.array([0.0, 1.0, 4.0])
        np.testing.assert_allclose(conditional_ber(snr, ModulationScheme.named("dpsk")), 0.5 * np.exp(-snr))
        assert conditional_ber(np.array([0.0]), ModulationScheme.named("bpsk"))[0] == pytest.approx(0.5)

    def test_ber_standard_error(self):
        value, se = estimate_ber(np.array([0.0, 0.0]), ModulationScheme.named("dpsk"))
        assert (value, se) == (0.5, 0.0)


class TestEngine:
    """Chunking, determinism and worker invariance."""

    def test_draw_is_one_continuous_stream(self, uniform_engine):
        assert_array_equal(uniform_engine.draw(3500), RandomStream(11).uniforms(3500))

    def test_statistics_independent_of_workers(self):
        link = RrsLink.identical(CANONICAL, 2, gain=0.5)
        sum_channel = SumChannel(link)
        reducer = CompositeReducer(OutageReducer([0.5, 1.0]), MomentReducer([1.0, 2.0]))
        results = [
            MonteCarloEngine(sum_channel.sample, sum_channel.uniforms_per_sample, seed=4,
                             chunk_size=2048, workers=workers).run(10_000, reducer)
            for workers in (1, 3)
        ]
        assert results[0] == results[1]

    def test_outage_reducer_matches_direct_count(self, uniform_engine):
        samples = uniform_engine.draw(5000)
        (p, se), = uniform_engine.run(5000, OutageReducer([0.3]))
        assert p == np.count_nonzero(samples < 0.3) / 5000
        assert se == pytest.approx(math.sqrt(p * (1.0 - p) / 5000))

    def test_ber_reducer_matches_estimator(self, uniform_engine):
        mod = ModulationScheme.named("bpsk")
        samples = uniform_engine.draw(4000)
        (value, se), = uniform_engine.run(4000, BerReducer([2.0], mod))
        expected, expected_se = estimate_ber(2.0 * samples ** 2, mod)
        assert value == pytest.approx(expected, rel=1e-12)
        assert se == pytest.approx(expected_se, rel=1e-6)

    def test_histogram_of_uniforms(self):
        engine = MonteCarloEngine(uniform_sampler, 1, seed=11, chunk_size=50_000)
        edges = np.linspace(0.0, 1.0, 201)
        hist = engine.run(400_000, HistogramReducer(edges))
        assert hist.total == 400_000
        assert hist.below == 0 and hist.above == 0
        check = histogram_agreement("uniform", hist.density, hist.stderr, np.ones(200), hist.total, hist.widths)
        assert check.passed, check.measured

    def test_pilot_edges(self, uniform_engine):
        edges = uniform_engine.pilot_edges(bins=50)
        assert edges.size == 51
        assert edges[0] == 0.0
        assert 0.99 < edges[-1] <= 1.0

    def test_moments(self, uniform_engine):
        first, second = uniform_engine.run(50_000, MomentReducer([1.0, 2.0]))
        assert first == pytest.approx(0.5, abs=5.0 * math.sqrt(1.0 / 12.0 / 50_000))
        assert second == pytest.approx(1.0 / 3.0, abs=0.01)

    def test_zero_samples_rejected(self, uniform_engine):
        with pytest.raises(EmptyInput):
            uniform_engine.run(0, OutageReducer([0.5]))

    def test_different_streams_differ(self):
        a = MonteCarloEngine(uniform_sampler, 1, seed=1, stream_id=0).draw(10)
        b = MonteCarloEngine(uniform_sampler, 1, seed=1, stream_id=1).draw(10)
        assert not np.array_equal(a, b)
