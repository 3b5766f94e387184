"""
validate command: the invariant suite over every numerical path.
"""

from typing import Callable, List
import logging
import math

import numpy as np
from scipy.integrate import quad
from scipy.special import iv, jv

from cli.checks import Check, report
from cli.experiment import ExperimentConfig
from cli.recipes import CANONICAL
from config import settings
from models.channel import derive_constants
from models.metrics import MODULATIONS, ModulationScheme, SnrPoint, db_to_linear
from models.rrs import RrsLink
from numerics.foxh import ContourPlan, GammaFactor, GammaProductIntegrand, evaluate
from services.channel_service import FadingChannel
from services.metrics_service import (
    ber_multi,
    ber_single,
    diversity_order,
    monte_carlo_engine,
    outage_multi,
    outage_single,
)
from services.montecarlo_service import MonteCarloEngine, OutageReducer
from services.rrs_service import SumChannel
from utils.error_handler import NumericsError, handle_command_errors

logger = logging.getLogger(__name__)

_SUITE_SAMPLES = 200_000


def exponential_integrand(z: float) -> GammaProductIntegrand:
    return GammaProductIntegrand(
        nvars=1, factors=(GammaFactor(0.0, (-1.0,)),), arguments=(z,), label="exp identity",
    )


def bessel_j_integrand(nu: float, x: float) -> GammaProductIntegrand:
    """Gamma(nu/2 - s) / Gamma(1 + nu/2 + s) (x^2/4)^s, whose integral is J_nu(x)."""
    return GammaProductIntegrand(
        nvars=1,
        factors=(GammaFactor(nu / 2.0, (-1.0,)), GammaFactor(1.0 + nu / 2.0, (1.0,), power=-1)),
        arguments=(x * x / 4.0,),
        label="Bessel J identity",
    )


def bessel_i_integrand(nu: float, x: float) -> GammaProductIntegrand:
    """Integrand whose residue sum is (x/2)^-nu I_nu(x); the reflection pair removes the residue sign."""
    return GammaProductIntegrand(
        nvars=1,
        factors=(
            GammaFactor(0.0, (-1.0,)),
            GammaFactor(1.0 + nu, (1.0,), power=-1),
            GammaFactor(0.5, (1.0,), power=-1),
            GammaFactor(0.5, (-1.0,), power=-1),
        ),
        arguments=(x * x / 4.0,),
        prefactor=math.pi,
        label="Bessel I identity",
    )


def beta_kernel_integrand(a1: float, a2: float, z1: float, z2: float) -> GammaProductIntegrand:
    """
    Two-variable kernel with the Beta structure of the density kernel.

    Integrates to int_0^1 t^a1 (1 - t)^a2 exp(-z1 t - z2 (1 - t)) dt and
    decays along every vertical direction.
    """
    return GammaProductIntegrand(
        nvars=2,
        factors=(
            GammaFactor(0.0, (-1.0, 0.0)),
            GammaFactor(a1 + 1.0, (1.0, 0.0)),
            GammaFactor(0.0, (0.0, -1.0)),
            GammaFactor(a2 + 1.0, (0.0, 1.0)),
            GammaFactor(a1 + a2 + 2.0, (1.0, 1.0), power=-1),
        ),
        arguments=(z1, z2),
        label="Beta kernel",
    )


def beta_kernel_reference(a1: float, a2: float, z1: float, z2: float) -> float:
    value, _ = quad(lambda t: math.exp(-z1 * t - z2 * (1.0 - t)), 0.0, 1.0,
                    weight="alg", wvar=(a1, a2), epsabs=1e-13, epsrel=1e-12)
    return value


def _foxh_exponential() -> Check:
    worst = 0.0
    for z in (0.5, 2.0, 6.0):
        worst = max(worst, abs(evaluate(exponential_integrand(z), tol=1e-10) - math.exp(-z)))
    return Check.at_most("foxh exp(-z) identity", worst, 1e-10)


def _foxh_bessel() -> Check:
    worst = 0.0
    for nu, x in ((0.5, 1.0), (1.0, 2.0), (2.5, 4.0)):
        worst = max(worst, abs(evaluate(bessel_j_integrand(nu, x), tol=1e-10) - float(jv(nu, x))))
    return Check.at_most("foxh Meijer-G / Bessel J identity", worst, 1e-8)


def _contour_shift() -> Check:
    integrand = exponential_integrand(1.5)
    values = []
    for c in (-0.2, -0.5, -0.9):
        plan = ContourPlan(abscissas=(c,), half_length=settings.FOXH_HALF_LENGTH,
                           nodes_per_unit=settings.FOXH_NODES_PER_UNIT)
        values.append(evaluate(integrand, plan=plan, tol=1e-10))
    return Check.at_most("foxh contour-shift invariance", max(values) - min(values), 1e-9)


def _foxh_bessel_i() -> Check:
    c = derive_constants(CANONICAL)
    worst = 0.0
    for nu, x in ((c.A2, 2.0), (c.A1, 1.0), (1.5, 6.0)):
        expected = (x / 2.0) ** (-nu) * float(iv(nu, x))
        worst = max(worst, abs(evaluate(bessel_i_integrand(nu, x), tol=1e-10) / expected - 1.0))
    return Check.at_most("foxh Bessel I identity (relative)", worst, 1e-8)


def _beta_kernel_shift() -> Check:
    c = derive_constants(CANONICAL)
    integrand = beta_kernel_integrand(c.A1, c.A2, 0.8, 1.3)
    expected = beta_kernel_reference(c.A1, c.A2, 0.8, 1.3)
    worst = 0.0
    for abscissas in ((-0.5, -0.2), (-1.0, -0.3)):
        plan = ContourPlan(abscissas=abscissas, half_length=settings.FOXH_HALF_LENGTH,
                           nodes_per_unit=settings.FOXH_NODES_PER_UNIT)
        worst = max(worst, abs(evaluate(integrand, plan=plan, tol=1e-8) - expected))
    return Check.at_most("foxh Beta kernel on two vertical contours", worst, 1e-7)


def _exact_vs_oracle(channel: FadingChannel) -> Check:
    worst = 0.0
    for x in np.linspace(0.1, 2.5, 8):
        exact = channel.pdf_exact(float(x))
        oracle = channel.pdf_oracle_convolution(float(x))
        worst = max(worst, abs(exact - oracle) / oracle)
    return Check.at_most("pdf exact vs oracle (relative)", worst, 1e-4)


def _normalization(channel: FadingChannel) -> Check:
    return Check.at_most("pdf integrates to one", abs(channel.moment(0.0) - 1.0), 1e-8)


def _power_moment(channel: FadingChannel) -> Check:
    params = channel.params
    target = params.r_hat ** params.alpha
    return Check.at_most("E[R^alpha] = r_hat^alpha", abs(channel.moment(params.alpha) - target), 1e-7)


def _cdf_shape(channel: FadingChannel) -> Check:
    xs = np.linspace(0.05, 4.0, 25)
    values = np.array([channel.cdf(float(x)) for x in xs])
    monotone = bool(np.all(np.diff(values) >= -1e-12))
    return Check("cdf monotone and tends to one", monotone and values[-1] > 1.0 - 1e-6,
                 f"F(4) = {values[-1]:.9f}", "non-decreasing, F(4) > 1 - 1e-6")


def _series_convergence(channel: FadingChannel) -> Check:
    xs = np.linspace(0.1, 3.0, 15)
    worst = max(abs(channel.pdf_series(float(x), 20) - channel.pdf_exact(float(x))) for x in xs)
    return Check.at_most("series with 20 summands (sup-norm)", worst, 1e-3)


def _asymptote(channel: FadingChannel) -> Check:
    ratio = channel.pdf_asymptotic(1e-3) / channel.pdf_exact(1e-3)
    return Check.within("small-argument density ratio at 1e-3", ratio, 0.99, 1.01)


def _single_reduction() -> Check:
    snr = SnrPoint.from_db(10.0)
    single = outage_single(CANONICAL, 1.0, snr)
    multi = outage_multi(RrsLink.identical(CANONICAL, 1), snr).value
    return Check.at_most("outage N=1 reduces to single element", abs(single - multi), 1e-6)


def _ber_reduction() -> Check:
    mod = ModulationScheme.named("bpsk")
    single = ber_single(CANONICAL, 1.0, 10.0, mod)
    multi = ber_multi(RrsLink.identical(CANONICAL, 1), 10.0, mod).value
    return Check.at_most("BER N=1 reduces to single element", abs(single - multi), 1e-6)


def _diversity_slope(channel: FadingChannel) -> Check:
    snr_db = np.arange(30.0, 41.0, 2.0)
    outages = [outage_single(channel.params, 1.0, SnrPoint.from_db(v)) for v in snr_db]
    slope = -np.polyfit(snr_db / 10.0, np.log10(outages), 1)[0]
    order = diversity_order([channel.params])
    return Check.within("high-SNR outage slope = alpha mu / 2", slope, 0.95 * order, 1.05 * order)


def _laplace_vs_exact() -> Check:
    sum_channel = SumChannel(RrsLink.identical(CANONICAL, 2))
    xs = np.linspace(0.4, 3.6, 9)
    exact = sum_channel.pdf_exact(xs)
    laplace = sum_channel.pdf_laplace(xs)
    return Check.at_most("sum density: Laplace vs exact (N=2)", float(np.max(np.abs(laplace - exact) / exact)), 1e-4)


def _monte_carlo_agreement(seed: int) -> Check:
    link = RrsLink.identical(CANONICAL, 1)
    z_th = 0.6
    (p, se), = monte_carlo_engine(link, seed, 1).run(_SUITE_SAMPLES, OutageReducer([z_th]))
    exact = FadingChannel.for_params(CANONICAL).cdf(z_th)
    return Check.at_most("Monte Carlo outage within 4 SE", abs(p - exact) / se, 4.0)


def _worker_invariance(seed: int) -> Check:
    sum_channel = SumChannel(RrsLink.identical(CANONICAL, 2))
    thresholds = [0.5, 1.0, 2.0]

    def run(workers: int):
        engine = MonteCarloEngine(
            sum_channel.sample, sum_channel.uniforms_per_sample, seed=seed, chunk_size=4096, workers=workers,
        )
        return engine.run(20_000, OutageReducer(thresholds))

    same = run(1) == run(2)
    return Check("statistics independent of worker count", same, "identical" if same else "differ", "identical")


def _modulations() -> Check:
    ok = MODULATIONS == {"bpsk": (0.5, 1.0), "dpsk": (1.0, 1.0), "bfsk": (0.5, 0.5)}
    return Check("modulation table", ok, str(MODULATIONS), "bpsk (0.5,1), dpsk (1,1), bfsk (0.5,0.5)")


def _db_conversion() -> Check:
    return Check.at_most("dB conversion", abs(db_to_linear(30.0) - 1000.0), 1e-9)


def suite(config: ExperimentConfig) -> List[Callable[[], Check]]:
    channel = FadingChannel.for_params(CANONICAL)
    return [
        _foxh_exponential,
        _foxh_bessel,
        _contour_shift,
        _foxh_bessel_i,
        _beta_kernel_shift,
        lambda: _exact_vs_oracle(channel),
        lambda: _normalization(channel),
        lambda: _power_moment(channel),
        lambda: _cdf_shape(channel),
        lambda: _series_convergence(channel),
        lambda: _asymptote(channel),
        _single_reduction,
        _ber_reduction,
        lambda: _diversity_slope(channel),
        _laplace_vs_exact,
        lambda: _monte_carlo_agreement(config.seed),
        lambda: _worker_invariance(config.seed),
        _modulations,
        _db_conversion,
    ]


@handle_command_errors
def run(config: ExperimentConfig) -> int:
    """Run every check, write validate.csv and exit 0 only if all pass."""
    checks = []
    for check in suite(config):
        try:
            checks.append(check())
        except NumericsError as e:
            name = getattr(check, "__name__", "check").lstrip("_")
            logger.error(f"Check {name} raised {type(e).__name__}: {e}")
            checks.append(Check(name, False, f"{type(e).__name__}: {e}", "no error"))
    return report(config, "validate", checks)
