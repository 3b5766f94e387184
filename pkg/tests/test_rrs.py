"""Tests for surface geometry, gains and the coherent sum channel."""

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from models.rrs import RrsGeometry, RrsLink
from services.channel_service import FadingChannel
from services.rrs_service import (
    SumChannel,
    compensated_phase,
    disc_power,
    element_phase,
    link_from_geometry,
    near_field_gain,
    near_field_gains,
    pdf_sum_exact,
    pdf_sum_laplace,
    pdf_sum_series,
    sample_sum,
    snr_from_envelopes,
)
from services.streams import RandomStream
from utils.error_handler import DimensionCap


@pytest.fixture
def geometry() -> RrsGeometry:
    return RrsGeometry.tiled(rows=3, cols=3, d0=0.5, dx=0.1, dy=0.1, wavelength=0.01)


class TestGeometry:
    """Near-field gains and phase compensation."""

    def test_tiling_centred(self, geometry):
        assert geometry.size == 9
        assert geometry.element_centers[4] == pytest.approx((0.0, 0.0))

    def test_square_power_between_inscribed_and_circumscribed_discs(self):
        d0, side = 1.0, 1.0
        single = RrsGeometry.tiled(rows=1, cols=1, d0=d0, dx=side, dy=side, wavelength=0.1)
        power = near_field_gain(single, 0) ** 2
        assert disc_power(d0, side / 2.0, 1.0) < power < disc_power(d0, side / math.sqrt(2.0), 1.0)

    def test_centre_element_strongest_and_symmetric(self, geometry):
        gains = near_field_gains(geometry)
        assert max(gains) == gains[4]
        assert gains[0] == pytest.approx(gains[8], rel=1e-12)
        assert gains[1] == pytest.approx(gains[3], rel=1e-12)

    def test_total_power_below_one(self, geometry):
        assert sum(g * g for g in near_field_gains(geometry)) < 1.0

    def test_compensated_phase_vanishes(self, geometry):
        for i in range(geometry.size):
            assert abs(compensated_phase(geometry, i)) < 1e-9

    def test_element_phase_grows_with_path_length(self, geometry):
        assert element_phase(geometry, 0) > element_phase(geometry, 4)
        assert element_phase(geometry, 4) == pytest.approx(2.0 * math.pi * 0.5 / 0.01)

    def test_link_from_geometry(self, geometry, canonical):
        link = link_from_geometry(geometry, [canonical], gamma_bar=10.0)
        assert link.size == 9
        assert link.gains == near_field_gains(geometry)
        with pytest.raises(ValueError):
            link_from_geometry(geometry, [canonical, canonical])


class TestLink:
    """Link construction and the coherent SNR."""

    def test_coherent_snr(self, canonical):
        link = RrsLink((canonical, canonical), (0.5, 0.25), gamma_bar=3.0)
        assert snr_from_envelopes(link, [2.0, 4.0]) == pytest.approx(12.0)
        batch = snr_from_envelopes(link, np.array([[2.0, 4.0], [0.0, 4.0]]))
        np.testing.assert_allclose(batch, [12.0, 3.0])

    @pytest.mark.parametrize("gains", [(1.5,), (0.0,)])
    def test_gain_range(self, canonical, gains):
        with pytest.raises(ValueError):
            RrsLink((canonical,), gains)

    def test_gain_count(self, canonical):
        with pytest.raises(ValueError):
            RrsLink((canonical, canonical), (0.5,))


class TestSumDensity:
    """Exact, series and inverse-Laplace densities of Z = sum g_i R_i."""

    def test_single_element_reduces_to_scaled_envelope(self, canonical, channel):
        g = 0.4
        sum_channel = SumChannel(RrsLink.identical(canonical, 1, gain=g))
        for x in (0.2, 0.5, 0.9):
            assert sum_channel.pdf_exact(x) == pytest.approx(channel.pdf_exact(x / g) / g, rel=1e-10)

    def test_two_elements_exact_matches_laplace(self, canonical):
        sum_channel = SumChannel(RrsLink.identical(canonical, 2))
        xs = np.linspace(0.5, 3.5, 7)
        np.testing.assert_allclose(sum_channel.pdf_laplace(xs), sum_channel.pdf_exact(xs), rtol=1e-4)

    def test_three_elements_exact_matches_laplace(self, canonical):
        sum_channel = SumChannel(RrsLink.identical(canonical, 3, gain=0.5))
        xs = np.linspace(0.6, 2.4, 4)
        np.testing.assert_allclose(sum_channel.pdf_laplace(xs), sum_channel.pdf_exact(xs), rtol=1e-3)

    def test_unequal_gains_cdf_paths_agree(self, canonical):
        sum_channel = SumChannel(RrsLink((canonical, canonical), (0.8, 0.3)))
        xs = np.array([0.4, 1.0, 1.6])
        np.testing.assert_allclose(sum_channel.cdf_laplace(xs), sum_channel.cdf_exact(xs), atol=1e-6)

    def test_mass_and_mean(self, canonical, channel):
        sum_channel = SumChannel(RrsLink.identical(canonical, 2))
        assert sum_channel.cdf_exact(8.0) == pytest.approx(1.0, abs=1e-6)
        xs = np.linspace(1e-3, 8.0, 4001)
        mean = trapezoid(xs * sum_channel.pdf_exact(xs), xs)
        assert mean == pytest.approx(2.0 * channel.moment(1.0), rel=1e-3)

    def test_series_close_to_exact(self, canonical):
        sum_channel = SumChannel(RrsLink.identical(canonical, 2))
        xs = np.linspace(0.5, 3.0, 6)
        np.testing.assert_allclose(sum_channel.pdf_series(xs, 20), sum_channel.pdf_exact(xs), atol=2e-3)

    def test_zero_outside_support(self, canonical):
        sum_channel = SumChannel(RrsLink.identical(canonical, 2))
        assert sum_channel.pdf_exact(0.0) == 0.0
        assert sum_channel.cdf_laplace(0.0) == 0.0

    def test_dimension_caps(self, canonical):
        with pytest.raises(DimensionCap):
            SumChannel(RrsLink.identical(canonical, 4)).pdf_exact(1.0)
        with pytest.raises(DimensionCap):
            SumChannel(RrsLink.identical(canonical, 3)).pdf_series(1.0, 10)

    def test_sampler_mean(self, canonical, channel):
        sum_channel = SumChannel(RrsLink.identical(canonical, 3, gain=0.5))
        z = sum_channel.sample(RandomStream(21), 100_000)
        se = z.std(ddof=1) / math.sqrt(z.size)
        assert abs(z.mean() - 1.5 * channel.moment(1.0)) < 5.0 * se

    def test_sampler_width(self, canonical, fractional):
        link = RrsLink((canonical, fractional), (1.0, 1.0))
        expected = (FadingChannel.for_params(canonical).uniforms_per_sample
                    + FadingChannel.for_params(fractional).uniforms_per_sample)
        assert SumChannel(link).uniforms_per_sample == expected


class TestFunctionalForms:
    """Module-level entry points delegate to SumChannel."""

    def test_density_entry_points(self, canonical):
        link = RrsLink.identical(canonical, 2, gain=0.5)
        exact = float(pdf_sum_exact(link, 1.0))
        assert float(pdf_sum_laplace(link, 1.0)) == pytest.approx(exact, rel=1e-4)
        assert float(pdf_sum_series(link, 1.0, 20)) == pytest.approx(exact, abs=2e-3)

    def test_sample_entry_point_matches_channel(self, canonical):
        link = RrsLink.identical(canonical, 2, gain=0.5)
        direct = SumChannel(link).sample(RandomStream(5), 100)
        np.testing.assert_array_equal(sample_sum(link, RandomStream(5), 100), direct)

    def test_snr_samples_scale_with_mean_snr(self, canonical):
        link = RrsLink.identical(canonical, 2, gain=0.5)
        z = SumChannel(link).sample(RandomStream(9), 50)
        snr = SumChannel(link.with_gamma_bar(4.0)).sample_snr(RandomStream(9), 50)
        np.testing.assert_allclose(snr, 4.0 * z * z)
