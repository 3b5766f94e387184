"""
Single-link alpha-eta-kappa-mu channel.
Exact Fox-H, series, asymptotic and quadrature-oracle densities, the envelope
CDF, and the physical and inverse-CDF envelope samplers.
"""

from functools import lru_cache
from typing import List, Optional, Tuple
import logging
import math

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import logsumexp, roots_genlaguerre, roots_jacobi, roots_laguerre, roots_legendre

from config import settings
from models.channel import DerivedConstants, FadingParams, derive_constants
from numerics.foxh import EvaluationTrace, GammaFactor, GammaProductIntegrand, evaluate
from numerics.specfun import hyp0f1_regularized, laguerre, log_bessel_i
from services.streams import RandomStream
from utils.error_handler import (
    NoConvergence,
    NonIntegerClusters,
    QuadratureFailure,
    SeriesSingularity,
    with_fallback,
)

logger = logging.getLogger(__name__)

_LOG_2 = math.log(2.0)
_INTEGER_TOL = 1e-9
_MIN_ORDER = 16
_RULE_TOL = 1e-9
# Laguerre nodes lighter than e^-80 carry no mass
_WEIGHT_FLOOR = -80.0


@lru_cache(maxsize=None)
def _jacobi_rule(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes and log weights for (1 - t)^a (1 + t)^b on [-1, 1]."""
    t, w = roots_jacobi(n, a, b)
    return t, np.log(w)


@lru_cache(maxsize=None)
def _laguerre_rule(n: int, a: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Generalized Gauss-Laguerre nodes and log weights for w^a e^-w, light nodes dropped."""
    w_nodes, weights = roots_laguerre(n) if a == 0.0 else roots_genlaguerre(n, a)
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    keep = log_w > log_w.max() + _WEIGHT_FLOOR
    return w_nodes[keep], log_w[keep]


def _log_bessel_block(nu: float, c: float, u: np.ndarray) -> np.ndarray:
    """log of u^(-nu/2) I_nu(c sqrt(u)); finite at u = 0."""
    u = np.asarray(u, dtype=float)
    out = np.full(u.shape, nu * math.log(c / 2.0) - math.lgamma(nu + 1.0))
    pos = u > 0.0
    if pos.any():
        up = u[pos]
        out[pos] = log_bessel_i(nu, c * np.sqrt(up)) - 0.5 * nu * np.log(up)
    return out


def _unit(names: List[str], *which: str, value: float = 1.0) -> Tuple[float, ...]:
    return tuple(value if name in which else 0.0 for name in names)


class FadingChannel:
    """
    Density machinery for one FadingParams set.

    The density is written f(x) = K x^(alpha mu - 1) E(x^alpha) where the
    kernel E is a Fox-H function with E(0) = 1/Gamma(mu). Every path below
    computes E (or its integral) in its own way.
    """

    def __init__(self, params: FadingParams):
        """Derive constants for a parameter set."""
        self.params = params
        self.constants: DerivedConstants = derive_constants(params)
        c = self.constants
        mu = params.mu
        log_scale = params.alpha * math.log(params.r_hat)
        self.log_c = c.log_psi1 - (1.0 + mu / 2.0) * log_scale
        self.log_k = self.log_c + (2.0 - mu) * _LOG_2 + c.A1 * math.log(c.A4) + c.A2 * math.log(c.A5)
        # exponential decay rate of E
        self.decay = min(c.psi3, c.psi3 + c.A3)
        self._inverse_sampler: Optional["InverseCdfSampler"] = None
        # smallest y at which each Fox-H kernel exhausted its budget
        self._foxh_ceiling = {"pdf": math.inf, "cdf": math.inf}

    @classmethod
    @lru_cache(maxsize=settings.CHANNEL_CACHE_SIZE)
    def for_params(cls, params: FadingParams) -> "FadingChannel":
        """Shared instance per parameter set (constants and tables are reused)."""
        return cls(params)

    @property
    def integer_clusters(self) -> bool:
        c = self.constants
        return all(abs(m - round(m)) <= _INTEGER_TOL and round(m) >= 1 for m in (c.mu_x, c.mu_y))

    # Fox-H representations

    def kernel_integrand(self, y: float, cumulative: bool = False) -> GammaProductIntegrand:
        """
        Gamma-product integrand of the kernel E(y), or of the CDF kernel.

        The exponential is expanded around the part of the support that makes
        every residue positive: in v when A3 < 0, in (y - v) when A3 > 0; it
        is dropped when A3 = 0. The cumulative form integrates the density
        termwise with the lower incomplete gamma series, again sign-definite.

        Args:
            y: x^alpha > 0
            cumulative: Build the CDF integrand instead of the PDF one

        Returns:
            GammaProductIntegrand with 2-4 variables
        """
        c = self.constants
        mu = self.params.mu
        names: List[str] = []
        arguments: List[float] = []
        if c.A3 != 0.0:
            names.append("j")
            arguments.append(abs(c.A3) * y)
        names += ["k", "l"]
        arguments += [c.A4 * c.A4 * y / 4.0, c.A5 * c.A5 * y / 4.0]
        rho = c.psi3 if c.A3 <= 0.0 else c.psi3 + c.A3
        if cumulative:
            names.append("m")
            arguments.append(rho * y)

        factors = []
        for name in names:
            factors.append(GammaFactor(0.0, _unit(names, name, value=-1.0)))
            # pi / (Gamma(1/2 + s) Gamma(1/2 - s)) = cos(pi s) cancels the residue sign
            factors.append(GammaFactor(0.5, _unit(names, name), power=-1))
            factors.append(GammaFactor(0.5, _unit(names, name, value=-1.0), power=-1))

        if c.A3 < 0.0:
            factors.append(GammaFactor(c.A2 + 1.0, _unit(names, "l"), power=-1))
            factors.append(GammaFactor(c.A2 + 1.0, _unit(names, "j", "l")))
        elif c.A3 > 0.0:
            factors.append(GammaFactor(c.A1 + 1.0, _unit(names, "k"), power=-1))
            factors.append(GammaFactor(c.A1 + 1.0, _unit(names, "j", "k")))

        if cumulative:
            factors.append(GammaFactor(1.0, _unit(names, "m")))
            factors.append(GammaFactor(mu + 1.0, _unit(names, *names), power=-1))
        else:
            factors.append(GammaFactor(mu, _unit(names, "j", "k", "l"), power=-1))

        return GammaProductIntegrand(
            nvars=len(names),
            factors=tuple(factors),
            arguments=tuple(arguments),
            prefactor=math.pi ** len(names),
            log_scale=-rho * y,
            label=f"{'cdf' if cumulative else 'pdf'} kernel y={y:.6g}",
        )

    def _evaluate_kernel(self, y: float, cumulative: bool, trace: Optional[EvaluationTrace]) -> float:
        """
        Evaluate the PDF or CDF kernel integrand at y.

        A NoConvergence is remembered per kernel: the residue window only
        grows with y, so larger arguments are refused without another attempt.
        """
        regime = "cdf" if cumulative else "pdf"
        ceiling = self._foxh_ceiling[regime]
        if y >= ceiling:
            raise NoConvergence(f"{regime} kernel did not converge at y={ceiling:.6g}, below {y:.6g}")
        try:
            return evaluate(self.kernel_integrand(y, cumulative=cumulative), trace=trace)
        except NoConvergence:
            self._foxh_ceiling[regime] = y
            logger.warning(f"{regime} kernel of {self.params} unconverged from y={y:.6g}; oracle used above it")
            raise

    def log_kernel_foxh(self, y: float, trace: Optional[EvaluationTrace] = None) -> float:
        """log E(y) from the Fox-H integrand."""
        value = self._evaluate_kernel(y, False, trace)
        return math.log(value) if value > 0.0 else -math.inf

    @with_fallback("log_kernel_oracle", level=logging.DEBUG)
    def log_kernel(self, y):
        """log E(y), Fox-H first; arrays go through the oracle rule."""
        if np.ndim(y):
            return self.log_kernel_oracle(y)
        return self.log_kernel_foxh(float(y))

    @with_fallback("pdf_oracle_convolution", level=logging.DEBUG)
    def pdf_exact(self, x: float, trace: Optional[EvaluationTrace] = None) -> float:
        """
        Envelope density from the trivariate Fox-H representation.

        Falls back to the convolution oracle when the residue sum exceeds
        its budget.

        Args:
            x: Envelope value > 0
            trace: Optional trace receiving partial sums

        Returns:
            f_R(x) >= 0
        """
        if x <= 0.0:
            return 0.0
        a, mu = self.params.alpha, self.params.mu
        log_e = self.log_kernel_foxh(x ** a, trace=trace)
        return math.exp(self.log_k + (a * mu - 1.0) * math.log(x) + log_e)

    # Quadrature oracle

    def _bracket_x(self, u: np.ndarray) -> np.ndarray:
        c = self.constants
        return _log_bessel_block(c.A1, c.A4, u) - c.psi3 * u

    def _bracket_y(self, v: np.ndarray) -> np.ndarray:
        c = self.constants
        return _log_bessel_block(c.A2, c.A5, v) - (c.psi3 + c.A3) * v

    def pdf_oracle_convolution(self, x: float, trace: Optional[EvaluationTrace] = None) -> float:
        """
        Envelope density by adaptive quadrature of the Bessel convolution.

        The algebraic endpoint factors (y - v)^A1 v^A2 are handled by the
        QUADPACK algebraic-weight rule, so the remaining integrand is smooth.

        Args:
            x: Envelope value > 0
            trace: Unused; QUADPACK keeps no partial sums

        Returns:
            f_R(x)

        Raises:
            QuadratureFailure: when QUADPACK reports non-convergence
        """
        if x <= 0.0:
            return 0.0
        c = self.constants
        y = x ** self.params.alpha

        def smooth(v: float) -> float:
            return math.exp(float(self._bracket_x(np.array([max(y - v, 0.0)]))[0] + self._bracket_y(np.array([v]))[0]))

        result = quad(
            smooth, 0.0, y,
            weight="alg", wvar=(c.A2, c.A1),
            epsabs=0.0, epsrel=settings.QUAD_TOL, limit=200, full_output=1,
        )
        if len(result) > 3:
            raise QuadratureFailure(f"oracle quadrature at x={x:g}: {result[3]}")
        value = result[0]
        if value <= 0.0:
            return 0.0
        return math.exp(self.log_c + self.constants.psi2 * math.log(x) + math.log(value))

    def log_kernel_oracle(self, y):
        """
        log E(y) for many y by Gauss-Jacobi rules of increasing order.

        Args:
            y: Scalar or array of y >= 0

        Returns:
            log E(y), same shape as y

        Raises:
            QuadratureFailure: when QUAD_MAX_ORDER is reached unconverged
        """
        c = self.constants
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.full(ys.shape, -math.lgamma(self.params.mu))
        pos = ys > 0.0
        if pos.any():
            yp = ys[pos][:, None]
            previous = None
            n = _MIN_ORDER
            while True:
                t, log_w = _jacobi_rule(n, c.A1, c.A2)
                u = yp * (1.0 - t) / 2.0
                v = yp * (1.0 + t) / 2.0
                current = logsumexp(self._bracket_x(u) + self._bracket_y(v) + log_w, axis=1)
                if previous is not None and np.max(np.abs(current - previous)) <= _RULE_TOL:
                    break
                if 2 * n > settings.QUAD_MAX_ORDER:
                    raise QuadratureFailure(f"Gauss-Jacobi kernel unconverged at order {n}")
                previous = current
                n *= 2
            out[pos] = current - _LOG_2 - c.A1 * math.log(c.A4) - c.A2 * math.log(c.A5)
        return float(out[0]) if np.ndim(y) == 0 else out.reshape(np.shape(y))

    def pdf_oracle(self, x) -> np.ndarray:
        """Vectorized oracle density on a grid of x values."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xs.shape)
        pos = xs > 0.0
        a, mu = self.params.alpha, self.params.mu
        out[pos] = np.exp(self.log_k + (a * mu - 1.0) * np.log(xs[pos]) + self.log_kernel_oracle(xs[pos] ** a))
        return out

    # Series and asymptotic forms

    def pdf_series(self, x: float, n_terms: int) -> float:
        """
        Truncated Laguerre-polynomial series of the envelope density.

        Args:
            x: Envelope value > 0
            n_terms: Number of summands, >= 1

        Returns:
            Partial sum with n_terms summands

        Raises:
            SeriesSingularity: when |p - eta| is below SERIES_SINGULARITY_EPS
        """
        params = self.params
        alpha, eta, kappa, mu, p, q = (
            params.alpha, params.eta, params.kappa, params.mu, params.p, params.q,
        )
        if abs(p - eta) <= settings.SERIES_SINGULARITY_EPS:
            raise SeriesSingularity(f"series undefined at p = eta = {eta:g}")
        if x <= 0.0:
            return 0.0
        c = self.constants
        scale = params.r_hat ** alpha
        y = x ** alpha
        log_pre = (
            math.log(alpha)
            + mu * math.log(c.xi * mu)
            - (1.0 + p * q) * kappa * mu / c.delta
            + p * mu / (1.0 + p) * math.log(p / eta)
            + (alpha * mu - 1.0) * math.log(x)
            - mu * math.log(scale)
            - p * c.xi * mu * y / (scale * eta)
        )
        ratio = y * c.xi * mu * (p - eta) / (scale * eta)
        lag_arg = eta * kappa * mu / (c.delta * (eta - p))
        hyp_arg = p * p * q * y * kappa * c.xi * mu * mu / (scale * c.delta * eta)
        terms = [
            ratio ** n * laguerre(n, c.A2, lag_arg) * hyp0f1_regularized(mu + n, hyp_arg)
            for n in range(n_terms)
        ]
        return math.exp(log_pre) * math.fsum(terms)

    def pdf_asymptotic(self, x: float, form: Optional[str] = None) -> float:
        """
        Small-argument density.

        Args:
            x: Envelope value > 0
            form: 'limit' (exact leading term) or 'printed'/'shifted' for
                the closed form with Gamma(1 + A2) Gamma(1/2) in the
                denominator; settings.ASYMPTOTIC_FORM when omitted

        Returns:
            Leading-order density
        """
        form = form or settings.ASYMPTOTIC_FORM
        a, mu = self.params.alpha, self.params.mu
        c = self.constants
        log_value = self.log_k + (a * mu - 1.0) * math.log(x) - c.psi3 * x ** a - math.lgamma(mu)
        if form != "limit":
            log_value += 1.5 * math.log(math.pi) - 2.0 * _LOG_2 - math.lgamma(1.0 + c.A2)
        return math.exp(log_value)

    # Distribution function

    def cdf(self, x: float) -> float:
        """
        P(R <= x).

        Up to the median y = r_hat^alpha the Fox-H CDF integrand is summed
        (oracle integral as fallback); past it the CDF is one minus the
        Gauss-Laguerre upper tail.

        Args:
            x: Envelope value

        Returns:
            Probability in [0, 1]
        """
        if x <= 0.0:
            return 0.0
        y = x ** self.params.alpha
        if y > self._median_y():
            return float(max(0.0, 1.0 - self._upper_mass(np.array([y]))[0]))
        return min(1.0, max(0.0, self.cdf_foxh(x)))

    @with_fallback("cdf_oracle", level=logging.DEBUG)
    def cdf_foxh(self, x: float, trace: Optional[EvaluationTrace] = None) -> float:
        """CDF from the four-variate (three when A3 = 0) Fox-H integrand."""
        a, mu = self.params.alpha, self.params.mu
        y = x ** a
        value = self._evaluate_kernel(y, True, trace)
        if value <= 0.0:
            return 0.0
        return math.exp(self.log_k - math.log(a) + mu * math.log(y) + math.log(value))

    def _lower_mass(self, y: np.ndarray) -> np.ndarray:
        """(K/alpha) int_0^y u^(mu-1) E(u) du for each y."""
        mu, a = self.params.mu, self.params.alpha
        yc = np.asarray(y, dtype=float)[:, None]
        previous = None
        n = _MIN_ORDER
        while True:
            t, log_w = _jacobi_rule(n, 0.0, mu - 1.0)
            u = yc * (1.0 + t) / 2.0
            current = logsumexp(np.reshape(self.log_kernel_oracle(u.ravel()), u.shape) + log_w, axis=1)
            if previous is not None and np.max(np.abs(current - previous)) <= _RULE_TOL:
                break
            if 2 * n > settings.QUAD_MAX_ORDER:
                raise QuadratureFailure(f"CDF rule unconverged at order {n}")
            previous = current
            n *= 2
        return np.exp(self.log_k - math.log(a) + mu * np.log(yc[:, 0] / 2.0) + current)

    def _upper_mass(self, y: np.ndarray) -> np.ndarray:
        """(K/alpha) int_y^inf u^(mu-1) E(u) du by Gauss-Laguerre after u = y + w/decay."""
        mu, a = self.params.mu, self.params.alpha
        yc = np.asarray(y, dtype=float)[:, None]
        previous = None
        n = _MIN_ORDER
        while True:
            w, log_w = _laguerre_rule(n)
            u = yc + w / self.decay
            logs = (mu - 1.0) * np.log(u) + np.reshape(self.log_kernel_oracle(u.ravel()), u.shape) + w + log_w
            current = logsumexp(logs, axis=1)
            if previous is not None and np.max(np.abs(current - previous)) <= _RULE_TOL:
                break
            if 2 * n > min(settings.QUAD_MAX_ORDER, 256):
                raise QuadratureFailure(f"tail rule unconverged at order {n}")
            previous = current
            n *= 2
        return np.exp(self.log_k - math.log(a) - math.log(self.decay) + current)

    def _median_y(self) -> float:
        return self.params.r_hat ** self.params.alpha

    def cdf_oracle(self, x: float, trace: Optional[EvaluationTrace] = None) -> float:
        """
        CDF by integrating the oracle density; past the median it is formed
        as one minus the upper tail.
        """
        if x <= 0.0:
            return 0.0
        y = x ** self.params.alpha
        if y <= self._median_y():
            return float(min(1.0, self._lower_mass(np.array([y]))[0]))
        return float(max(0.0, 1.0 - self._upper_mass(np.array([y]))[0]))

    def survival(self, x: float) -> float:
        """P(R > x) without cancellation in the upper tail."""
        if x <= 0.0:
            return 1.0
        y = x ** self.params.alpha
        if y <= self._median_y():
            return 1.0 - self.cdf(x)
        return float(self._upper_mass(np.array([y]))[0])

    # Moments and support

    def moment(self, order: float) -> float:
        """
        E[R^order] by generalized Gauss-Laguerre quadrature of the oracle density.

        Args:
            order: Moment order > -alpha mu

        Returns:
            Moment value
        """
        a, mu = self.params.alpha, self.params.mu
        shape = mu - 1.0 + order / a
        previous = None
        n = _MIN_ORDER
        while True:
            w, log_w = _laguerre_rule(n, shape)
            u = w / self.decay
            current = float(logsumexp(self.log_kernel_oracle(u) + w + log_w))
            if previous is not None and abs(current - previous) <= 1e-10:
                break
            if 2 * n > 256:
                raise QuadratureFailure(f"moment rule unconverged at order {n}")
            previous = current
            n *= 2
        return math.exp(self.log_k - math.log(a) - (shape + 1.0) * math.log(self.decay) + current)

    def support_y(self, eps: float = 1e-14) -> float:
        """Smallest y (on a 1.25x ladder) beyond which the mass is below eps."""
        a, mu = self.params.alpha, self.params.mu
        y = max(self._median_y(), 1.0 / self.decay)
        for _ in range(400):
            tail = self.log_k - math.log(a) + mu * math.log(y) + self.log_kernel_oracle(y) - math.log(self.decay * y)
            if tail < math.log(eps) and self.decay * y > mu:
                return y
            y *= 1.25
        return y

    # Sampling

    @property
    def uniforms_per_sample(self) -> int:
        """Uniforms one envelope draw consumes."""
        if not self.integer_clusters:
            return 1
        d = int(round(self.constants.mu_x)) + int(round(self.constants.mu_y))
        return d + d % 2

    def sample_envelope(self, stream: RandomStream, count: int) -> np.ndarray:
        """
        Envelope samples from the physical cluster model.

        Args:
            stream: Random stream; advanced by count * uniforms_per_sample
            count: Number of samples

        Returns:
            Array of envelope samples

        Raises:
            NonIntegerClusters: when mu_x or mu_y is not an integer
        """
        c = self.constants
        if not self.integer_clusters:
            raise NonIntegerClusters(
                f"physical sampler needs integer clusters, got mu_x={c.mu_x:g}, mu_y={c.mu_y:g}"
            )
        mx, my = int(round(c.mu_x)), int(round(c.mu_y))
        width = self.uniforms_per_sample
        z = stream.normals(count * width).reshape(count, width)
        power = ((c.sigma_x * z[:, :mx] + c.lambda_x / math.sqrt(mx)) ** 2).sum(axis=1)
        power += ((c.sigma_y * z[:, mx:mx + my] + c.lambda_y / math.sqrt(my)) ** 2).sum(axis=1)
        return power ** (1.0 / self.params.alpha)

    def sample(self, stream: RandomStream, count: int) -> np.ndarray:
        """Physical sampler for integer clusters, inverse-CDF sampler otherwise."""
        if self.integer_clusters:
            return self.sample_envelope(stream, count)
        if self._inverse_sampler is None:
            self._inverse_sampler = InverseCdfSampler(self)
        return self._inverse_sampler.sample(stream, count)


class InverseCdfSampler:
    """
    Envelope sampler by inverting a tabulated oracle CDF.

    The CDF is tabulated on a geometric grid in y = x^alpha; lower and upper
    halves are interpolated monotonically in log space against log F and
    -log(1 - F), and located by binary search.
    """

    def __init__(self, channel: FadingChannel, n_nodes: int = 600, floor: float = 1e-13):
        self.channel = channel
        a, mu = channel.params.alpha, channel.params.mu
        log_y_lo = (math.log(floor) + math.log(a * mu) + math.lgamma(mu) - channel.log_k) / mu
        y_hi = channel.support_y(floor)
        grid = np.geomspace(math.exp(log_y_lo), y_hi, n_nodes)

        t, w = roots_legendre(8)
        mid = 0.5 * (grid[1:] + grid[:-1])[:, None]
        half = 0.5 * (grid[1:] - grid[:-1])[:, None]
        u = mid + half * t
        log_density = (
            channel.log_k - math.log(a) + (mu - 1.0) * np.log(u)
            + np.reshape(channel.log_kernel_oracle(u.ravel()), u.shape)
        )
        masses = (half[:, 0] * (np.exp(log_density) * w).sum(axis=1))
        head = float(channel._lower_mass(grid[:1])[0])
        total = head + masses.sum()
        if abs(total - 1.0) > 1e-6:
            logger.warning(f"tabulated envelope mass {total:.9f} differs from 1")

        lower = np.concatenate(([head], head + np.cumsum(masses))) / total
        upper = np.concatenate((np.cumsum(masses[::-1])[::-1], [0.0])) / total
        log_y = np.log(grid)

        keep = np.concatenate(([True], np.diff(lower) > 0.0)) & (lower > 0.0)
        self._lower = PchipInterpolator(np.log(lower[keep]), log_y[keep], extrapolate=False)
        self._lower_range = (math.log(lower[keep][0]), math.log(lower[keep][-1]))
        keep = np.concatenate((np.diff(upper) < 0.0, [False])) & (upper > 0.0)
        self._upper = PchipInterpolator(-np.log(upper[keep]), log_y[keep], extrapolate=False)
        self._upper_range = (-math.log(upper[keep][0]), -math.log(upper[keep][-1]))
        self._log_y_lo = log_y[0]
        self._log_y_hi = log_y[-1]
        self._mu = mu
        logger.debug(f"inverse-CDF table for {channel.params}: y in [{grid[0]:.3g}, {y_hi:.3g}]")

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Envelope quantiles for probabilities u in (0, 1]."""
        u = np.asarray(u, dtype=float)
        log_y = np.empty(u.shape)
        low = u <= 0.5
        if low.any():
            lu = np.log(u[low])
            lo, hi = self._lower_range
            inside = np.clip(lu, lo, hi)
            values = self._lower(inside)
            # F ~ y^mu below the table
            log_y[low] = np.where(lu < lo, self._log_y_lo + (lu - lo) / self._mu, values)
        high = ~low
        if high.any():
            tail = -np.log(np.maximum(1.0 - u[high], 1e-300))
            lo, hi = self._upper_range
            log_y[high] = np.where(tail > hi, self._log_y_hi, self._upper(np.clip(tail, lo, hi)))
        return np.exp(log_y / self.channel.params.alpha)

    def sample(self, stream: RandomStream, count: int) -> np.ndarray:
        """Envelope samples from count uniforms of stream."""
        return self.quantile(stream.uniforms(count))


def pdf_exact(params: FadingParams, x: float) -> float:
    return FadingChannel.for_params(params).pdf_exact(x)


def pdf_oracle_convolution(params: FadingParams, x: float) -> float:
    return FadingChannel.for_params(params).pdf_oracle_convolution(x)


def pdf_series(params: FadingParams, x: float, n_terms: int) -> float:
    return FadingChannel.for_params(params).pdf_series(x, n_terms)


def pdf_asymptotic(params: FadingParams, x: float) -> float:
    return FadingChannel.for_params(params).pdf_asymptotic(x)


def cdf(params: FadingParams, x: float) -> float:
    return FadingChannel.for_params(params).cdf(x)


def sample_envelope(params: FadingParams, stream: RandomStream, count: int) -> np.ndarray:
    return FadingChannel.for_params(params).sample_envelope(stream, count)
