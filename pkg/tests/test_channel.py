"""Tests for the single-element envelope distribution and samplers."""

import math

import numpy as np
import pytest
from scipy import integrate

from config import settings
from models.channel import FadingParams, derive_constants
from services.channel_service import FadingChannel, InverseCdfSampler, pdf_exact
from services.streams import RandomStream
from utils.error_handler import NonIntegerClusters


class TestDerivedConstants:
    """Closed-form constants of the reference set."""

    def test_cluster_split(self, canonical):
        c = derive_constants(canonical)
        assert c.mu_x == pytest.approx(3.0)
        assert c.mu_y == pytest.approx(1.0)

    def test_parameters_validated(self):
        with pytest.raises(ValueError):
            FadingParams(alpha=-1.0, eta=1.0, kappa=1.0, mu=2.0, p=3.0, q=1.0)
        with pytest.raises(ValueError):
            FadingParams(alpha=2.0, eta=1.0, kappa=1.0, mu=2.0, p=3.0, q=1.0, extra=1.0)

    def test_shared_instance(self, canonical):
        assert FadingChannel.for_params(canonical) is FadingChannel.for_params(canonical)


class TestDensity:
    """Exact, oracle, series and small-argument densities agree."""

    @pytest.mark.parametrize("x", [0.2, 0.7, 1.0, 1.6, 2.4])
    def test_exact_matches_oracle(self, channel, x):
        assert channel.pdf_exact(x) == pytest.approx(channel.pdf_oracle_convolution(x), rel=1e-4)

    def test_vectorized_oracle(self, channel):
        xs = np.array([0.3, 0.9, 1.8])
        expected = [channel.pdf_oracle_convolution(x) for x in xs]
        np.testing.assert_allclose(channel.pdf_oracle(xs), expected, rtol=1e-6)

    def test_unit_mass(self, channel):
        assert channel.moment(0.0) == pytest.approx(1.0, abs=1e-8)

    def test_alpha_moment_is_scale(self, channel):
        assert channel.moment(2.0) == pytest.approx(1.0, abs=1e-7)

    def test_scale_parameter(self, canonical):
        scaled = canonical.model_copy(update={"r_hat": 2.0})
        for x in (0.5, 1.5, 3.0):
            assert pdf_exact(scaled, x) == pytest.approx(pdf_exact(canonical, x / 2.0) / 2.0, rel=1e-6)

    def test_series_converges_with_terms(self, channel):
        xs = np.linspace(0.1, 3.0, 12)
        exact = np.array([channel.pdf_exact(x) for x in xs])
        n20 = np.array([channel.pdf_series(x, 20) for x in xs])
        n2 = np.array([channel.pdf_series(x, 2) for x in xs])
        assert np.max(np.abs(n20 - exact)) < 1e-3
        assert n2.max() < 0.95 * exact.max()

    def test_small_argument_form(self, channel):
        assert channel.pdf_asymptotic(1e-3) / channel.pdf_exact(1e-3) == pytest.approx(1.0, abs=0.01)

    def test_fractional_clusters_exact_matches_oracle(self, fractional):
        channel = FadingChannel.for_params(fractional)
        for x in (0.3, 1.0, 2.0):
            assert channel.pdf_exact(x) == pytest.approx(channel.pdf_oracle_convolution(x), rel=1e-4)


class TestDistribution:
    """The CDF against integrated densities."""

    def test_zero_below_support(self, channel):
        assert channel.cdf(0.0) == 0.0
        assert channel.cdf(-1.0) == 0.0

    @pytest.mark.parametrize("x", [0.4, 1.0, 2.2])
    def test_matches_integrated_density(self, channel, x):
        def density(v):
            return float(channel.pdf_oracle(np.array([v]))[0])

        expected, _ = integrate.quad(density, 0.0, x, epsabs=1e-12, epsrel=1e-10)
        assert channel.cdf(x) == pytest.approx(expected, abs=1e-7)

    def test_monotone_and_saturating(self, channel):
        values = [channel.cdf(x) for x in np.linspace(0.1, 4.0, 20)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0, abs=1e-6)

    def test_oracle_and_survival(self, channel):
        assert channel.cdf_oracle(1.1) == pytest.approx(channel.cdf(1.1), abs=1e-7)
        assert channel.survival(1.1) == pytest.approx(1.0 - channel.cdf(1.1), abs=1e-7)


class TestSampling:
    """Physical and inverse-CDF samplers reproduce the analytic law."""

    def test_physical_sampler_moment(self, channel, stream):
        r = channel.sample_envelope(stream, 200_000)
        power = r ** 2
        se = power.std(ddof=1) / math.sqrt(power.size)
        assert abs(power.mean() - 1.0) < 5.0 * se

    def test_physical_sampler_cdf(self, channel, stream):
        r = channel.sample_envelope(stream, 200_000)
        for x in (0.5, 1.0, 1.5):
            p = float(np.mean(r <= x))
            se = math.sqrt(p * (1.0 - p) / r.size)
            assert abs(p - channel.cdf(x)) < 5.0 * se

    def test_stream_advances_by_declared_width(self, channel):
        stream = RandomStream(seed=3)
        channel.sample_envelope(stream, 10)
        assert stream.counter == 10 * channel.uniforms_per_sample

    def test_physical_sampler_rejects_fractional_clusters(self, fractional, stream):
        with pytest.raises(NonIntegerClusters):
            FadingChannel.for_params(fractional).sample_envelope(stream, 10)

    def test_inverse_cdf_quantiles(self, fractional):
        channel = FadingChannel.for_params(fractional)
        sampler = InverseCdfSampler(channel)
        u = np.array([0.01, 0.2, 0.5, 0.8, 0.99])
        x = sampler.quantile(u)
        assert np.all(np.diff(x) > 0.0)
        for ui, xi in zip(u, x):
            assert channel.cdf(float(xi)) == pytest.approx(ui, abs=1e-4)

    def test_generic_sampler_routes_fractional_clusters(self, fractional, stream):
        channel = FadingChannel.for_params(fractional)
        r = channel.sample(stream, 100_000)
        assert stream.counter == 100_000
        p = float(np.mean(r <= 1.0))
        se = math.sqrt(p * (1.0 - p) / r.size)
        assert abs(p - channel.cdf(1.0)) < 5.0 * se


class TestFoxHBudget:
    """Behaviour when a Fox-H kernel outgrows its term budget."""

    @pytest.fixture
    def steep(self) -> FadingParams:
        return FadingParams(alpha=2.5, eta=0.1, kappa=1.0, mu=2.0, p=3.0, q=1.0, r_hat=1.0)

    @pytest.mark.parametrize("x", [3.0, 5.0])
    def test_far_tail_density_of_steep_set(self, steep, x):
        channel = FadingChannel(steep)
        value = channel.pdf_exact(x)
        assert math.isfinite(value) and value > 0.0
        assert value == pytest.approx(channel.pdf_oracle_convolution(x), rel=1e-4)

    @pytest.mark.parametrize("x", [0.5, 1.0, 1.5])
    def test_foxh_cdf_without_fallback(self, canonical, x):
        channel = FadingChannel(canonical)
        value = FadingChannel.cdf_foxh.__wrapped__(channel, x)
        assert value == pytest.approx(channel.cdf_oracle(x), abs=1e-7)

    def test_unconverged_kernel_is_not_retried(self, canonical, monkeypatch):
        import services.channel_service as channel_service

        calls = []
        evaluate = channel_service.evaluate

        def counting(*args, **kwargs):
            calls.append(args[0].label)
            return evaluate(*args, **kwargs)

        monkeypatch.setattr(channel_service, "evaluate", counting)
        monkeypatch.setattr(channel_service.settings, "FOXH_MAX_TERMS", 1000)
        channel = FadingChannel(canonical)
        for x in (0.8, 0.9):
            assert channel.cdf(x) == pytest.approx(channel.cdf_oracle(x), abs=1e-12)
        assert len(calls) == 1
        assert channel._foxh_ceiling["cdf"] == pytest.approx(0.64)
        assert channel._foxh_ceiling["pdf"] == math.inf

    def test_cdf_past_median_is_tail_complement(self, channel):
        assert channel.cdf(2.0) == pytest.approx(1.0 - channel.survival(2.0), abs=1e-15)

    def test_shared_instances_are_bounded(self):
        info = FadingChannel.for_params.cache_info()
        assert info.maxsize == settings.CHANNEL_CACHE_SIZE
        for i in range(settings.CHANNEL_CACHE_SIZE + 8):
            FadingChannel.for_params(FadingParams(alpha=2.0, eta=1.0, kappa=1.0, mu=2.0, p=3.0, q=1.0,
                                                  r_hat=1.0 + 0.01 * i))
        assert FadingChannel.for_params.cache_info().currsize <= settings.CHANNEL_CACHE_SIZE
