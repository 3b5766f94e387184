"""Tests for outage probability, bit-error rate and their high-SNR forms."""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import erfc

from cli.recipes import RECIPES
from models.channel import FadingParams
from models.metrics import ModulationScheme, SnrPoint, db_to_linear, linear_to_db
from models.rrs import RrsLink
from services.channel_service import FadingChannel
from services.metrics_service import (
    ber_multi,
    ber_single,
    diversity_order,
    outage_multi,
    outage_multi_asymptotic,
    outage_single,
    outage_single_asymptotic,
)
from utils.error_handler import ConfigError, DimensionCap, DomainError


class TestModels:
    """SNR points and modulation lookup."""

    def test_db_conversion(self):
        assert db_to_linear(20.0) == pytest.approx(100.0)
        assert linear_to_db(1000.0) == pytest.approx(30.0)

    def test_envelope_threshold(self):
        assert SnrPoint(gamma_bar=100.0, gamma_th=4.0).envelope_threshold() == pytest.approx(0.2)

    def test_snr_must_be_positive(self):
        with pytest.raises(ValueError):
            SnrPoint(gamma_bar=0.0)

    @pytest.mark.parametrize("name,p_m,q_m", [("BPSK", 0.5, 1.0), ("dpsk", 1.0, 1.0), ("bfsk", 0.5, 0.5)])
    def test_named_schemes(self, name, p_m, q_m):
        mod = ModulationScheme.named(name)
        assert (mod.p_m, mod.q_m) == (p_m, q_m)

    def test_unknown_scheme(self):
        with pytest.raises(KeyError):
            ModulationScheme.named("qam64")


class TestOutage:
    """Single- and multi-element outage."""

    def test_single_is_cdf_at_threshold(self, canonical, channel):
        snr = SnrPoint.from_db(10.0, 3.0)
        g = 0.6
        expected = channel.cdf(snr.envelope_threshold() / g)
        assert outage_single(canonical, g, snr) == pytest.approx(expected, rel=1e-12)

    def test_decreasing_in_snr(self, canonical):
        values = [outage_single(canonical, 1.0, SnrPoint.from_db(v)) for v in range(0, 31, 5)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_high_snr_form(self, canonical):
        snr = SnrPoint.from_db(50.0)
        ratio = outage_single_asymptotic(canonical, 1.0, snr) / outage_single(canonical, 1.0, snr)
        assert ratio == pytest.approx(1.0, abs=0.02)

    def test_printed_form_is_degenerate_when_a2_vanishes(self):
        params = FadingParams(alpha=2.0, eta=1.01, kappa=0.2, mu=2.0, p=1.0, q=1.0, r_hat=1.0)
        with pytest.raises(DomainError):
            outage_single_asymptotic(params, 1.0, SnrPoint.from_db(30.0), form="printed")

    def test_printed_form_scales_limit_form(self, canonical):
        snr = SnrPoint.from_db(30.0)
        limit = outage_single_asymptotic(canonical, 1.0, snr, form="limit")
        printed = outage_single_asymptotic(canonical, 1.0, snr, form="printed")
        assert printed < 0.0
        assert printed == pytest.approx(limit * canonical.alpha * canonical.mu / math.gamma(-0.5), rel=1e-10)

    def test_diversity_order(self, canonical, fractional):
        assert diversity_order([canonical]) == pytest.approx(2.0)
        assert diversity_order([canonical, fractional]) == pytest.approx(2.35)
        with pytest.raises(ValueError):
            diversity_order([])

    def test_slope_equals_diversity_order(self, canonical):
        snr_db = np.arange(30.0, 41.0, 2.0)
        outages = [outage_single(canonical, 1.0, SnrPoint.from_db(v)) for v in snr_db]
        slope = -np.polyfit(snr_db / 10.0, np.log10(outages), 1)[0]
        assert slope == pytest.approx(2.0, rel=0.05)

    def test_multi_reduces_to_single(self, canonical):
        snr = SnrPoint.from_db(5.0)
        result = outage_multi(RrsLink.identical(canonical, 1, gain=0.7), snr)
        assert result.method == "exact"
        assert result.value == pytest.approx(outage_single(canonical, 0.7, snr), rel=1e-12)

    def test_multi_paths(self, canonical):
        link = RrsLink.identical(canonical, 2, gain=0.5)
        snr = SnrPoint.from_db(3.0)
        exact = outage_multi(link, snr, method="exact")
        laplace = outage_multi(link, snr, method="laplace")
        mc = outage_multi(link, snr, method="mc", samples=200_000, seed=3)
        assert laplace.value == pytest.approx(exact.value, abs=1e-6)
        assert mc.method == "mc" and mc.stderr > 0.0
        assert abs(mc.value - exact.value) < 5.0 * mc.stderr

    def test_multi_auto_routing(self, canonical):
        snr = SnrPoint.from_db(10.0)
        assert outage_multi(RrsLink.identical(canonical, 4, gain=0.3), snr).method == "laplace"
        with pytest.raises(DimensionCap):
            outage_multi(RrsLink.identical(canonical, 4), snr, method="exact")
        with pytest.raises(ConfigError):
            outage_multi(RrsLink.identical(canonical, 1), snr, method="bogus")

    def test_multi_high_snr_form(self, canonical):
        link = RrsLink.identical(canonical, 2, gain=0.5)
        snr = SnrPoint.from_db(45.0)
        ratio = outage_multi_asymptotic(link, snr) / outage_multi(link, snr).value
        assert ratio == pytest.approx(1.0, abs=0.03)

    def test_multi_high_snr_form_single_element(self, canonical):
        snr = SnrPoint.from_db(20.0)
        link = RrsLink.identical(canonical, 1, gain=0.5)
        assert outage_multi_asymptotic(link, snr) == pytest.approx(
            outage_single_asymptotic(canonical, 0.5, snr), rel=1e-10
        )


class TestBitErrorRate:
    """Average BER against direct integration and Monte Carlo."""

    @pytest.mark.parametrize("snr_db", [0.0, 10.0, 20.0])
    def test_bpsk_matches_direct_integration(self, canonical, channel, snr_db):
        gamma_bar = db_to_linear(snr_db)

        def integrand(x):
            return 0.5 * erfc(math.sqrt(gamma_bar) * x) * float(channel.pdf_oracle(np.array([x]))[0])

        expected, _ = integrate.quad(integrand, 0.0, 6.0, epsabs=1e-13, epsrel=1e-10, limit=200)
        assert ber_single(canonical, 1.0, gamma_bar, ModulationScheme.named("bpsk")) == pytest.approx(
            expected, rel=1e-5
        )

    def test_dpsk_is_half_the_laplace_transform(self, canonical, channel):
        gamma_bar = db_to_linear(5.0)

        def integrand(x):
            return 0.5 * math.exp(-gamma_bar * x * x) * float(channel.pdf_oracle(np.array([x]))[0])

        expected, _ = integrate.quad(integrand, 0.0, 6.0, epsabs=1e-13, epsrel=1e-10, limit=200)
        assert ber_single(canonical, 1.0, gamma_bar, ModulationScheme.named("dpsk")) == pytest.approx(
            expected, rel=1e-5
        )

    def test_decreasing_in_snr(self, canonical):
        mod = ModulationScheme.named("bfsk")
        values = [ber_single(canonical, 1.0, db_to_linear(v), mod) for v in range(0, 31, 10)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[0] < 0.5

    def test_multi_paths(self, canonical):
        mod = ModulationScheme.named("bpsk")
        link = RrsLink.identical(canonical, 2, gain=0.5)
        gamma_bar = db_to_linear(2.0)
        exact = ber_multi(link, gamma_bar, mod, method="exact")
        laplace = ber_multi(link, gamma_bar, mod, method="laplace")
        mc = ber_multi(link, gamma_bar, mod, method="mc", samples=200_000, seed=5)
        assert laplace.value == pytest.approx(exact.value, rel=1e-3)
        assert abs(mc.value - exact.value) < 5.0 * mc.stderr

    def test_multi_reduces_to_single(self, canonical):
        mod = ModulationScheme.named("bpsk")
        single = ber_single(canonical, 0.8, 10.0, mod)
        assert ber_multi(RrsLink.identical(canonical, 1, gain=0.8), 10.0, mod).value == pytest.approx(single)

    def test_more_elements_lower_ber(self, canonical):
        mod = ModulationScheme.named("bpsk")
        one = ber_multi(RrsLink.identical(canonical, 1, gain=0.3), 1.0, mod).value
        three = ber_multi(RrsLink.identical(canonical, 3, gain=0.3), 1.0, mod).value
        assert three < one

    def test_steep_set_matches_direct_integration(self):
        params = RECIPES["fig3b"].params["alpha2.5"]
        channel = FadingChannel.for_params(params)
        gain, gamma_bar = 0.31, db_to_linear(30.0)

        def integrand(x):
            return 0.5 * erfc(math.sqrt(gamma_bar) * gain * x) * float(channel.pdf_oracle(np.array([x]))[0])

        expected, _ = integrate.quad(integrand, 0.0, 6.0, points=[0.5, 1.0], epsabs=1e-15, epsrel=1e-10, limit=200)
        assert ber_single(params, gain, gamma_bar, ModulationScheme.named("bpsk")) == pytest.approx(
            expected, rel=1e-4
        )

    @pytest.mark.parametrize("label", ["alpha1", "alpha2.5"])
    def test_calibrated_gains_reach_reference_values(self, label):
        recipe = RECIPES["fig3b"]
        value = ber_single(recipe.params[label], recipe.gain_for(label), db_to_linear(30.0),
                           ModulationScheme.named("bpsk"))
        assert recipe.targets[label].accepts(value)
