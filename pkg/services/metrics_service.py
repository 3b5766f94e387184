"""
Outage probability, average bit-error rate and diversity order.
Single-element metrics use the Fox-H CDF; multi-element metrics route to the
exact convolution, inverse-Laplace or Monte Carlo path and tag the result.
"""

from functools import lru_cache
from typing import Optional, Sequence
import logging
import math

import numpy as np
from scipy.special import roots_genlaguerre

from config import settings
from models.channel import FadingParams
from models.metrics import MetricResult, ModulationScheme, SnrPoint
from models.rrs import RrsLink
from numerics.specfun import reciprocal_gamma
from services.channel_service import FadingChannel
from services.montecarlo_service import MonteCarloEngine, OutageReducer, BerReducer
from services.rrs_service import EXACT_MAX_ELEMENTS, SumChannel
from utils.error_handler import ConfigError, DimensionCap, DomainError

logger = logging.getLogger(__name__)

METHODS = ("auto", "exact", "laplace", "mc")
_BER_TOL = 1e-7
_BER_MAX_ORDER = 256
_LOG_2 = math.log(2.0)


@lru_cache(maxsize=None)
def _genlaguerre(n: int, a: float):
    return roots_genlaguerre(n, a)


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got '{method}'")


def outage_single(params: FadingParams, gain: float, snr: SnrPoint) -> float:
    """
    Outage probability of one element, P(gamma_bar g^2 R^2 < gamma_th).

    Args:
        params: Fading parameters
        gain: Near-field gain g in (0, 1]
        snr: Mean and threshold SNR

    Returns:
        Probability in [0, 1]
    """
    x_th = snr.envelope_threshold() / gain
    return FadingChannel.for_params(params).cdf(x_th)


def _small_argument_coefficient(params: FadingParams, form: Optional[str] = None) -> float:
    """
    C with F_R(x) ~ C x^(alpha mu) as x -> 0, for the selected closed form.

    Raises:
        DomainError: for the printed form at A2 = 0, where 1/Gamma(A2) vanishes
    """
    form = form or settings.ASYMPTOTIC_FORM
    channel = FadingChannel.for_params(params)
    mu = params.mu
    a2 = channel.constants.A2
    if form == "printed":
        scale = float(reciprocal_gamma(a2))
        if scale == 0.0:
            raise DomainError(f"printed small-argument form is degenerate at A2 = {a2:g} (mu = 1 + p)")
        return math.exp(channel.log_k - math.lgamma(mu)) * scale
    if form == "shifted":
        return math.exp(channel.log_k - math.lgamma(mu) - math.lgamma(1.0 + a2))
    return math.exp(channel.log_k - math.lgamma(mu)) / (params.alpha * mu)


def outage_single_asymptotic(
    params: FadingParams, gain: float, snr: SnrPoint, form: Optional[str] = None
) -> float:
    """
    High-SNR outage C (gamma_th / gamma_bar)^(alpha mu / 2) g^(-alpha mu).

    Args:
        params: Fading parameters
        gain: Near-field gain
        snr: Mean and threshold SNR
        form: 'limit', 'printed' or 'shifted' coefficient

    Returns:
        Asymptotic outage (negative for the printed form when A2 < 0)
    """
    x_th = snr.envelope_threshold() / gain
    return _small_argument_coefficient(params, form) * x_th ** (params.alpha * params.mu)


def diversity_order(params_list: Sequence[FadingParams]) -> float:
    """
    Sum of alpha_i mu_i / 2 over the elements.

    Raises:
        ValueError: for an empty list
    """
    if not params_list:
        raise ValueError("diversity order needs at least one element")
    return sum(p.alpha * p.mu / 2.0 for p in params_list)


def _laguerre_average(scaled_cdf, exponent: float, mod: ModulationScheme, gamma_bar: float) -> float:
    """
    Average BER from a CDF written F(gamma) = (gamma / gamma_bar)^exponent G(gamma).

    BER = q^p / (2 Gamma(p)) int F(gamma) gamma^(p-1) e^(-q gamma) d gamma, whose
    algebraic part is absorbed by a generalized Gauss-Laguerre rule.
    """
    p_m, q_m = mod.p_m, mod.q_m
    shape = p_m - 1.0 + exponent
    log_front = (
        p_m * math.log(q_m) - _LOG_2 - math.lgamma(p_m)
        - (shape + 1.0) * math.log(q_m) - exponent * math.log(gamma_bar)
    )
    previous = None
    order = 16
    while True:
        w_nodes, weights = _genlaguerre(order, shape)
        values = scaled_cdf(w_nodes / q_m)
        current = math.exp(log_front) * float(np.dot(weights, values))
        if previous is not None and abs(current - previous) <= _BER_TOL * abs(current):
            return min(current, 0.5)
        if 2 * order > _BER_MAX_ORDER:
            logger.warning(f"BER rule stopped at order {order} with change {abs(current - previous):.3g}")
            return min(current, 0.5)
        previous = current
        order *= 2


def ber_single(params: FadingParams, gain: float, gamma_bar: float, mod: ModulationScheme) -> float:
    """
    Average BER of one element over the envelope distribution.

    The CDF at each quadrature node comes from the four-variate Fox-H
    integrand (oracle fallback), divided by its leading power.

    Args:
        params: Fading parameters
        gain: Near-field gain
        gamma_bar: Mean SNR, linear
        mod: Modulation

    Returns:
        BER in (0, 0.5]
    """
    channel = FadingChannel.for_params(params)
    a, mu = params.alpha, params.mu
    exponent = a * mu / 2.0

    def scaled_cdf(gammas: np.ndarray) -> np.ndarray:
        out = np.empty(gammas.shape)
        for idx, gam in enumerate(gammas):
            x = math.sqrt(gam / gamma_bar) / gain
            out[idx] = channel.cdf(x) / (gam / gamma_bar) ** exponent
        return out

    return _laguerre_average(scaled_cdf, exponent, mod, gamma_bar)


def monte_carlo_engine(link: RrsLink, seed: Optional[int] = None, workers: Optional[int] = None) -> MonteCarloEngine:
    """Chunked sampler of Z = sum g_i R_i for a link."""
    sum_channel = SumChannel(link)
    return MonteCarloEngine(
        sampler=sum_channel.sample,
        uniforms_per_sample=sum_channel.uniforms_per_sample,
        seed=seed,
        workers=workers,
    )


def outage_multi(
    link: RrsLink,
    snr: SnrPoint,
    method: str = "auto",
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> MetricResult:
    """
    Outage probability of the coherent sum channel.

    'auto' uses the single-element Fox-H CDF for N = 1, the exact
    convolution up to EXACT_MAX_ELEMENTS and the inverse Laplace path above.

    Args:
        link: Link (gamma_bar is taken from snr)
        snr: Mean and threshold SNR
        method: auto, exact, laplace or mc
        samples: Monte Carlo sample count
        seed: Monte Carlo seed
        workers: Monte Carlo worker processes

    Returns:
        MetricResult tagged with the path used
    """
    _check_method(method)
    z_th = snr.envelope_threshold()
    if method == "auto":
        method = "exact" if link.size <= EXACT_MAX_ELEMENTS else "laplace"

    if method == "exact":
        if link.size == 1:
            return MetricResult(outage_single(link.elements[0], link.gains[0], snr), "exact")
        if link.size > EXACT_MAX_ELEMENTS:
            raise DimensionCap(f"exact outage supports {EXACT_MAX_ELEMENTS} elements, link has {link.size}")
        return MetricResult(float(SumChannel(link).cdf_exact(z_th)), "exact")
    if method == "laplace":
        return MetricResult(float(SumChannel(link).cdf_laplace(z_th)), "laplace")

    engine = monte_carlo_engine(link, seed, workers)
    (p, se), = engine.run(samples or settings.MC_SAMPLES, OutageReducer([z_th]))
    return MetricResult(p, "mc", se)


def outage_multi_asymptotic(link: RrsLink, snr: SnrPoint, form: Optional[str] = None) -> float:
    """
    High-SNR outage of the sum channel.

    Each element density behaves as a_i C_i g_i^(-a_i) z^(a_i - 1) near zero
    (a_i = alpha_i mu_i); convolving the leading terms gives
    prod_i [a_i C_i g_i^(-a_i) Gamma(a_i)] z^(sum a_i) / Gamma(1 + sum a_i).

    Args:
        link: Link
        snr: Mean and threshold SNR
        form: Small-argument coefficient form

    Returns:
        Asymptotic outage
    """
    z_th = snr.envelope_threshold()
    log_value = 0.0
    sign = 1.0
    total = 0.0
    for params, g in zip(link.elements, link.gains):
        a = params.alpha * params.mu
        coefficient = _small_argument_coefficient(params, form)
        sign *= math.copysign(1.0, coefficient)
        log_value += math.log(a * abs(coefficient)) - a * math.log(g) + math.lgamma(a)
        total += a
    log_value += total * math.log(z_th) - math.lgamma(1.0 + total)
    return sign * math.exp(log_value)


def ber_multi(
    link: RrsLink,
    gamma_bar: float,
    mod: ModulationScheme,
    method: str = "auto",
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> MetricResult:
    """
    Average BER of the coherent sum channel.

    Args:
        link: Link
        gamma_bar: Mean SNR, linear
        mod: Modulation
        method: auto, exact, laplace or mc
        samples: Monte Carlo sample count
        seed: Monte Carlo seed
        workers: Monte Carlo worker processes

    Returns:
        MetricResult tagged with the path used
    """
    _check_method(method)
    if method == "auto":
        method = "exact" if link.size <= EXACT_MAX_ELEMENTS else "laplace"

    if method == "exact" and link.size == 1:
        return MetricResult(ber_single(link.elements[0], link.gains[0], gamma_bar, mod), "exact")

    sum_channel = SumChannel(link)
    exponent = sum_channel.total_exponent / 2.0
    if method == "exact":
        if link.size > EXACT_MAX_ELEMENTS:
            raise DimensionCap(f"exact BER supports {EXACT_MAX_ELEMENTS} elements, link has {link.size}")

        def scaled_cdf(gammas: np.ndarray) -> np.ndarray:
            return sum_channel.scaled_cdf(np.sqrt(gammas / gamma_bar))

        return MetricResult(_laguerre_average(scaled_cdf, exponent, mod, gamma_bar), "exact")

    if method == "laplace":
        def scaled_cdf(gammas: np.ndarray) -> np.ndarray:
            ratio = gammas / gamma_bar
            return sum_channel.cdf_laplace(np.sqrt(ratio)) / ratio ** exponent

        return MetricResult(_laguerre_average(scaled_cdf, exponent, mod, gamma_bar), "laplace")

    engine = monte_carlo_engine(link, seed, workers)
    (p, se), = engine.run(samples or settings.MC_SAMPLES, BerReducer([gamma_bar], mod))
    return MetricResult(p, "mc", se)
