"""
Refractive-surface link layer.
Near-field gains, coherent SNR, and the density of Z = sum g_i R_i by nested
convolution, series, inverse Laplace transform and sampling.
"""

from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.special import roots_jacobi, roots_legendre

from config import settings
from models.channel import FadingParams
from models.rrs import RrsGeometry, RrsLink
from numerics.inversion import dehoog, fixed_talbot
from services.channel_service import FadingChannel
from services.streams import RandomStream
from utils.error_handler import DimensionCap, QuadratureFailure

logger = logging.getLogger(__name__)

EXACT_MAX_ELEMENTS = 3
SERIES_MAX_ELEMENTS = 2
KERNEL_DEGREE = 72
_GAIN_TOL = 1e-10
_CONVOLUTION_TOL = 1e-7


# Geometry

def _pattern_exponent(alpha_f: float, convention: Optional[str] = None) -> float:
    convention = convention or settings.NEAR_FIELD_EXPONENT
    if convention == "printed":
        return (-alpha_f + 3.0) / 2.0
    return -(alpha_f + 3.0) / 2.0


def near_field_gain(geometry: RrsGeometry, i: int, convention: Optional[str] = None) -> float:
    """
    Amplitude gain |g_i| from the feed to element i.

    The feed power pattern is integrated over the element rectangle with
    tensor Gauss-Legendre rules of doubling order.

    Args:
        geometry: Surface geometry
        i: Element index
        convention: 'physical' or 'printed' pattern exponent

    Returns:
        |g_i|
    """
    a = geometry.alpha_f
    d0 = geometry.d0
    exponent = _pattern_exponent(a, convention)
    pc, qc = geometry.element_centers[i]
    scale = (a + 1.0) * d0 ** (a + 1.0) / (2.0 * math.pi)

    previous = None
    for order in (8, 16, 32, 64, 128):
        t, w = roots_legendre(order)
        p = pc + 0.5 * geometry.dx * t[:, None]
        q = qc + 0.5 * geometry.dy * t[None, :]
        values = (d0 * d0 + p * p + q * q) ** exponent
        power = scale * 0.25 * geometry.dx * geometry.dy * float(w @ values @ w)
        if previous is not None and abs(power - previous) <= _GAIN_TOL * abs(power):
            break
        previous = power
    return math.sqrt(power)


def near_field_gains(geometry: RrsGeometry, convention: Optional[str] = None) -> Tuple[float, ...]:
    return tuple(near_field_gain(geometry, i, convention) for i in range(geometry.size))


def disc_power(d0: float, radius: float, alpha_f: float) -> float:
    """Fraction of feed power falling inside a disc of the given radius."""
    return 1.0 - (d0 / math.hypot(d0, radius)) ** (alpha_f + 1.0)


def element_phase(geometry: RrsGeometry, i: int) -> float:
    """Propagation phase 2 pi r_i / lambda from the feed to element i."""
    p, q = geometry.element_centers[i]
    return 2.0 * math.pi / geometry.wavelength * math.sqrt(p * p + q * q + geometry.d0 ** 2)


def compensated_phase(geometry: RrsGeometry, i: int) -> float:
    """Residual phase after the element's compensator, wrapped to (-pi, pi]."""
    phase = element_phase(geometry, i)
    beta = -math.fmod(phase, 2.0 * math.pi)
    return math.remainder(phase + beta, 2.0 * math.pi)


def link_from_geometry(
    geometry: RrsGeometry,
    elements: Sequence[FadingParams],
    gamma_bar: float = 1.0,
    convention: Optional[str] = None,
) -> RrsLink:
    """
    Build a link from a geometry and one parameter set per element.

    Args:
        geometry: Surface geometry
        elements: FadingParams per element (a single entry is repeated)
        gamma_bar: Mean SNR, linear
        convention: Near-field exponent convention

    Returns:
        RrsLink
    """
    elements = list(elements)
    if len(elements) == 1:
        elements = elements * geometry.size
    if len(elements) != geometry.size:
        raise ValueError(f"{len(elements)} parameter sets for {geometry.size} elements")
    return RrsLink(tuple(elements), near_field_gains(geometry, convention), gamma_bar)


def snr_from_envelopes(link: RrsLink, envelopes) -> np.ndarray:
    """
    Coherent SNR gamma_bar (sum_i g_i R_i)^2.

    Args:
        link: Link
        envelopes: Shape (N,) or (count, N)

    Returns:
        SNR, scalar for a single draw
    """
    r = np.asarray(envelopes, dtype=float)
    if r.shape[-1] != link.size:
        raise ValueError(f"expected {link.size} envelopes per draw, got {r.shape[-1]}")
    z = r @ np.asarray(link.gains)
    return link.gamma_bar * z * z


# Element kernels

@lru_cache(maxsize=None)
def _jacobi(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    return roots_jacobi(n, a, b)


class ElementKernel:
    """
    Element density f_{Z_i}(z) = z^(a - 1) h(z) for Z_i = g_i R_i, a = alpha mu.

    h is smooth; it is evaluated from a Chebyshev interpolant of log E in
    y = x^alpha, fitted to Fox-H kernel values (oracle where the residue
    budget runs out).
    """

    def __init__(self, params: FadingParams, gain: float, degree: int = KERNEL_DEGREE):
        self.channel = FadingChannel.for_params(params)
        self.params = params
        self.gain = gain
        self.a = params.alpha * params.mu
        self.y_max = self.channel.support_y()
        self.log_coefficient = self.channel.log_k - self.a * math.log(gain)
        self._log_kernel = _kernel_interpolant(params, self.y_max, degree)

    @property
    def z_max(self) -> float:
        return self.gain * self.y_max ** (1.0 / self.params.alpha)

    def h(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        y = (np.maximum(z, 0.0) / self.gain) ** self.params.alpha
        out = np.zeros(z.shape)
        inside = y <= self.y_max
        out[inside] = np.exp(self.log_coefficient + self._log_kernel(y[inside]))
        return out

    def pdf(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape)
        pos = z > 0.0
        out[pos] = z[pos] ** (self.a - 1.0) * self.h(z[pos])
        return out


@lru_cache(maxsize=None)
def _kernel_interpolant(params: FadingParams, y_max: float, degree: int) -> Chebyshev:
    channel = FadingChannel.for_params(params)

    def log_e(ys: np.ndarray) -> np.ndarray:
        return np.array([channel.log_kernel(float(y)) for y in ys])

    logger.debug(f"fitting degree-{degree} kernel interpolant on [0, {y_max:.4g}] for {params}")
    return Chebyshev.interpolate(log_e, degree, domain=[0.0, y_max])


class SeriesKernel:
    """Element density built from the truncated Laguerre series."""

    def __init__(self, params: FadingParams, gain: float, n_terms: int):
        self.channel = FadingChannel.for_params(params)
        self.params = params
        self.gain = gain
        self.n_terms = n_terms
        self.a = params.alpha * params.mu
        self.y_max = self.channel.support_y()

    @property
    def z_max(self) -> float:
        return self.gain * self.y_max ** (1.0 / self.params.alpha)

    def h(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape)
        for idx, zi in np.ndenumerate(z):
            if zi <= 0.0 or zi > self.z_max:
                continue
            x = zi / self.gain
            out[idx] = self.channel.pdf_series(x, self.n_terms) / self.gain * zi ** (1.0 - self.a)
        return out


# Sum channel

class SumChannel:
    """
    Distribution of Z = sum_i g_i R_i for one link.

    Exact densities for up to three elements come from nested Gauss-Jacobi
    convolutions of element kernels; any number of elements goes through the
    product of element transforms and a numerical inverse Laplace transform.
    """

    def __init__(self, link: RrsLink):
        self.link = link
        self._kernels: Optional[List[ElementKernel]] = None
        self._transforms: Optional[Dict[Tuple[FadingParams, float], "ElementTransform"]] = None

    @property
    def kernels(self) -> List[ElementKernel]:
        if self._kernels is None:
            self._kernels = [ElementKernel(p, g) for p, g in zip(self.link.elements, self.link.gains)]
        return self._kernels

    @property
    def total_exponent(self) -> float:
        return sum(p.alpha * p.mu for p in self.link.elements)

    # nested convolution

    @staticmethod
    def _smooth_sum(kernels: Sequence, z: np.ndarray, order: int) -> np.ndarray:
        """
        h_S(z) with f_S(z) = z^(A - 1) h_S(z) for the sum of the given kernels.

        h_{S+i}(z) = 2^(1 - A - a_i) sum_k w_k h_S(z (1 - t_k)/2) h_i(z (1 + t_k)/2)
        for the Gauss-Jacobi rule with weight (1 - t)^(A - 1) (1 + t)^(a_i - 1).
        """
        if len(kernels) == 1:
            return kernels[0].h(z)
        head, last = kernels[:-1], kernels[-1]
        a_head = sum(k.a for k in head)
        t, w = _jacobi(order, a_head - 1.0, last.a - 1.0)
        zc = np.asarray(z, dtype=float)[..., None]
        left = SumChannel._smooth_sum(head, zc * (1.0 - t) / 2.0, order)
        right = last.h(zc * (1.0 + t) / 2.0)
        return 2.0 ** (1.0 - a_head - last.a) * (left * right) @ w

    def _converged_smooth(self, kernels: Sequence, z: np.ndarray) -> np.ndarray:
        previous = None
        order = 32
        while True:
            current = self._smooth_sum(kernels, z, order)
            if previous is not None and np.all(np.abs(current - previous) <= _CONVOLUTION_TOL * np.abs(current) + 1e-300):
                return current
            if 2 * order > (settings.QUAD_MAX_ORDER if len(kernels) < 3 else 256):
                raise QuadratureFailure(f"sum-density convolution unconverged at order {order}")
            previous = current
            order *= 2

    def _check_exact(self) -> None:
        if self.link.size > EXACT_MAX_ELEMENTS:
            raise DimensionCap(
                f"exact sum density supports {EXACT_MAX_ELEMENTS} elements, link has {self.link.size}"
            )

    def pdf_exact(self, x) -> np.ndarray:
        """
        Density of Z by nested convolution of Fox-H element densities.

        Args:
            x: Scalar or array of points

        Returns:
            f_Z(x), same shape as x

        Raises:
            DimensionCap: for more than EXACT_MAX_ELEMENTS elements
        """
        self._check_exact()
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xs.shape)
        pos = xs > 0.0
        if self.link.size == 1:
            params, g = self.link.elements[0], self.link.gains[0]
            channel = FadingChannel.for_params(params)
            out[pos] = [channel.pdf_exact(v / g) / g for v in xs[pos]]
        elif pos.any():
            h = self._converged_smooth(self.kernels, xs[pos])
            out[pos] = xs[pos] ** (self.total_exponent - 1.0) * h
        return float(out[0]) if np.ndim(x) == 0 else out

    def cdf_exact(self, x) -> np.ndarray:
        """P(Z <= x) from the convolution representation."""
        self._check_exact()
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xs.shape)
        if self.link.size == 1:
            params, g = self.link.elements[0], self.link.gains[0]
            channel = FadingChannel.for_params(params)
            out = np.array([channel.cdf(v / g) for v in xs])
        else:
            pos = xs > 0.0
            out[pos] = xs[pos] ** self.total_exponent * self.scaled_cdf(xs[pos])
        return float(out[0]) if np.ndim(x) == 0 else out

    def scaled_cdf(self, x: np.ndarray) -> np.ndarray:
        """G(x) = P(Z <= x) / x^A, smooth down to x = 0."""
        big_a = self.total_exponent
        xs = np.asarray(x, dtype=float)
        t, w = _jacobi(64, 0.0, big_a - 1.0)
        inner = self._converged_smooth(self.kernels, xs[..., None] * (1.0 + t) / 2.0)
        return 2.0 ** (-big_a) * inner @ w

    def pdf_series(self, x, n_terms: int) -> np.ndarray:
        """
        Density of Z from truncated series element densities.

        Args:
            x: Scalar or array
            n_terms: Summands per element

        Raises:
            DimensionCap: for more than SERIES_MAX_ELEMENTS elements
            SeriesSingularity: when an element has p = eta
        """
        if self.link.size > SERIES_MAX_ELEMENTS:
            raise DimensionCap(
                f"series sum density supports {SERIES_MAX_ELEMENTS} elements, link has {self.link.size}"
            )
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xs.shape)
        pos = xs > 0.0
        kernels = [SeriesKernel(p, g, n_terms) for p, g in zip(self.link.elements, self.link.gains)]
        if pos.any():
            h = self._smooth_sum(kernels, xs[pos], 64)
            out[pos] = xs[pos] ** (self.total_exponent - 1.0) * h
        return float(out[0]) if np.ndim(x) == 0 else out

    # inverse Laplace

    def transform(self, s: np.ndarray) -> np.ndarray:
        """Laplace transform E[exp(-s Z)] as the product of element transforms."""
        if self._transforms is None:
            self._transforms = {}
            for p, g in zip(self.link.elements, self.link.gains):
                key = (p, g)
                if key not in self._transforms:
                    self._transforms[key] = ElementTransform(p, g)
        s = np.asarray(s, dtype=np.complex128)
        out = np.ones(s.shape, dtype=np.complex128)
        counts: Dict[Tuple[FadingParams, float], int] = {}
        for key in zip(self.link.elements, self.link.gains):
            counts[key] = counts.get(key, 0) + 1
        for key, n in counts.items():
            out = out * self._transforms[key](s) ** n
        return out

    def _invert(self, transform: Callable, xs: np.ndarray, inversion: str) -> np.ndarray:
        if inversion == "talbot":
            return fixed_talbot(transform, xs)
        return dehoog(transform, xs)

    def pdf_laplace(self, x, inversion: str = "dehoog") -> np.ndarray:
        """
        Density of Z by inverting the product of element transforms.

        Args:
            x: Scalar or array of positive points
            inversion: 'dehoog' or 'talbot'

        Returns:
            f_Z(x)

        Raises:
            InversionFailure: on non-finite inversion output
        """
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xs.shape)
        pos = xs > 0.0
        if pos.any():
            out[pos] = np.maximum(self._invert(self.transform, xs[pos], inversion), 0.0)
        return float(out[0]) if np.ndim(x) == 0 else out

    def cdf_laplace(self, x, inversion: str = "dehoog") -> np.ndarray:
        """P(Z <= x) by inverting transform(s) / s."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xs.shape)
        pos = xs > 0.0
        if pos.any():
            values = self._invert(lambda s: self.transform(s) / s, xs[pos], inversion)
            out[pos] = np.clip(values, 0.0, 1.0)
        return float(out[0]) if np.ndim(x) == 0 else out

    # sampling

    @property
    def uniforms_per_sample(self) -> int:
        return sum(FadingChannel.for_params(p).uniforms_per_sample for p in self.link.elements)

    def sample(self, stream: RandomStream, count: int) -> np.ndarray:
        """
        Samples of Z; elements draw from the stream one after another.

        Args:
            stream: Random stream, advanced by count * uniforms_per_sample
            count: Number of samples

        Returns:
            Array of Z samples
        """
        z = np.zeros(count)
        for params, g in zip(self.link.elements, self.link.gains):
            z += g * FadingChannel.for_params(params).sample(stream, count)
        return z

    def sample_snr(self, stream: RandomStream, count: int) -> np.ndarray:
        z = self.sample(stream, count)
        return self.link.gamma_bar * z * z


class ElementTransform:
    """
    E[exp(-s g R)] for complex s by Gauss-Jacobi quadrature of the oracle
    density over its support; the rule order follows the oscillation of
    exp(-s g x) across the support.
    """

    def __init__(self, params: FadingParams, gain: float):
        self.channel = FadingChannel.for_params(params)
        self.params = params
        self.gain = gain
        self.x_max = self.channel.support_y() ** (1.0 / params.alpha)
        self._rules: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    def _rule(self, order: int) -> Tuple[np.ndarray, np.ndarray]:
        if order not in self._rules:
            a, mu = self.params.alpha, self.params.mu
            t, w = roots_jacobi(order, 0.0, a * mu - 1.0)
            x = self.x_max * (1.0 + t) / 2.0
            # weights carry K (x_max/2)^(alpha mu) and the smooth kernel E(x^alpha)
            log_e = self.channel.log_kernel_oracle(x ** a)
            weights = w * np.exp(self.channel.log_k + a * mu * math.log(self.x_max / 2.0) + log_e)
            self._rules[order] = (x, weights)
        return self._rules[order]

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128)
        frequency = float(np.max(np.abs(s.imag), initial=0.0)) * self.gain * self.x_max / 2.0
        order = 64
        while order < 1.5 * frequency + 48 and order < 4096:
            order *= 2
        x, weights = self._rule(order)
        flat = s.ravel()
        out = np.empty(flat.shape, dtype=np.complex128)
        step = max(1, 2_000_000 // len(x))
        for lo in range(0, len(flat), step):
            block = flat[lo:lo + step, None]
            out[lo:lo + step] = np.exp(-block * self.gain * x[None, :]) @ weights
        return out.reshape(s.shape)


def pdf_sum_exact(link: RrsLink, x: float) -> float:
    return SumChannel(link).pdf_exact(x)


def pdf_sum_series(link: RrsLink, x: float, n_terms: int) -> float:
    return SumChannel(link).pdf_series(x, n_terms)


def pdf_sum_laplace(link: RrsLink, x: float) -> float:
    return SumChannel(link).pdf_laplace(x)


def sample_sum(link: RrsLink, stream: RandomStream, count: int) -> np.ndarray:
    return SumChannel(link).sample(stream, count)
