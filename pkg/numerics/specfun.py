"""
Special functions used by every fading computation.
Complex log-gamma, modified Bessel I, generalized Laguerre and regularized 0F1.
"""

import logging
import math
from typing import Union

import numpy as np

from utils.error_handler import DomainError, PoleError

logger = logging.getLogger(__name__)

Number = Union[float, complex, np.ndarray]

# Lanczos approximation, g = 7, nine coefficients
LANCZOS_G = 7.0
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
POLE_TOLERANCE = 1e-14

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)
_LOG_2 = math.log(2.0)


def _lanczos_log_gamma(z: np.ndarray) -> np.ndarray:
    """Log-gamma on Re(z) >= 0.5."""
    zm1 = z - 1.0
    a = np.full_like(zm1, LANCZOS_COEFFICIENTS[0])
    for k in range(1, len(LANCZOS_COEFFICIENTS)):
        a = a + LANCZOS_COEFFICIENTS[k] / (zm1 + k)
    t = zm1 + LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (zm1 + 0.5) * np.log(t) - t + np.log(a)


def _pole_mask(z: np.ndarray) -> np.ndarray:
    re = z.real
    nearest = np.round(re)
    return (
        (np.abs(z.imag) < POLE_TOLERANCE)
        & (nearest <= 0.0)
        & (np.abs(re - nearest) < POLE_TOLERANCE)
    )


def log_gamma(z: Number, strict: bool = True) -> Number:
    """
    Principal branch of log Gamma(z) for complex arguments.

    Uses the Lanczos sum on Re(z) >= 0.5 and the reflection formula written
    for the upper half plane elsewhere, so the result is continuous along
    every vertical line and matches the analytic continuation from the
    positive real axis.

    Args:
        z: Scalar or array argument
        strict: Raise PoleError at poles; otherwise return +inf there

    Returns:
        Complex scalar or array of the same shape
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    poles = _pole_mask(zz)
    if poles.any():
        if strict:
            raise PoleError(f"log_gamma evaluated at pole {zz[poles][0]}")
        zz = np.where(poles, 0.5, zz)

    out = np.empty_like(zz)
    right = zz.real >= 0.5
    if right.any():
        out[right] = _lanczos_log_gamma(zz[right])

    left = ~right
    if left.any():
        zl = zz[left]
        lower = zl.imag < 0.0
        w = np.where(lower, np.conj(zl), zl)
        # log sin(pi w) on the closed upper half plane
        log_sin = -1j * math.pi * w + np.log1p(-np.exp(2j * math.pi * w)) + 0.5j * math.pi - _LOG_2
        val = _LOG_PI - log_sin - _lanczos_log_gamma(1.0 - w)
        out[left] = np.where(lower, np.conj(val), val)

    if poles.any():
        out[poles] = np.inf + 0j
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def log_gamma_real(x: Number) -> Number:
    """log|Gamma(x)| for real x away from poles."""
    return np.real(log_gamma(x))


def reciprocal_gamma(x: Number) -> Number:
    """
    1/Gamma(x) for real x, entire: zero at the non-positive integers.

    Args:
        x: Real scalar or array

    Returns:
        Real scalar or array
    """
    return np.real(np.exp(-log_gamma(np.asarray(x, dtype=float), strict=False)))


def _check_order(nu: float) -> None:
    if nu <= -1.0:
        raise DomainError(f"Bessel I order must exceed -1, got {nu}")


def bessel_i_series(nu: float, x: Number) -> Number:
    """
    log I_nu(x) from the ascending power series, summed in log space.

    All terms are positive for nu > -1, so the sum has no cancellation.

    Args:
        nu: Order, nu > -1
        x: Positive argument(s)

    Returns:
        log I_nu(x)
    """
    _check_order(nu)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    n_terms = int(np.ceil(xs.max(initial=0.0))) + 60
    k = np.arange(n_terms, dtype=float)[:, None]
    half = np.log(xs / 2.0)[None, :]
    logs = 2.0 * k * half - log_gamma_real(k + 1.0) - log_gamma_real(nu + k + 1.0)
    peak = logs.max(axis=0)
    out = nu * half[0] + peak + np.log(np.exp(logs - peak).sum(axis=0))
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def bessel_i_asymptotic(nu: float, x: Number, max_terms: int = 64) -> Number:
    """
    log I_nu(x) from the large-argument expansion, including the
    exponentially small companion series so half-integer orders are exact.

    Args:
        nu: Order, nu > -1
        x: Positive argument(s)
        max_terms: Truncation cap; summation stops at the smallest term

    Returns:
        log I_nu(x)
    """
    _check_order(nu)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    four_nu2 = 4.0 * nu * nu
    alternating = np.ones_like(xs)
    plain = np.ones_like(xs)
    term = np.ones_like(xs)
    previous = np.full_like(xs, np.inf)
    active = np.ones_like(xs, dtype=bool)
    for k in range(1, max_terms + 1):
        term = term * (four_nu2 - (2 * k - 1) ** 2) / (8.0 * k * xs)
        size = np.abs(term)
        # stop each column once the terms start growing
        active &= size < previous
        if not active.any():
            break
        contribution = np.where(active, term, 0.0)
        alternating += (-1) ** k * contribution
        plain += contribution
        previous = np.where(active, size, previous)
    companion = math.sin(nu * math.pi) * np.exp(-2.0 * xs) * plain
    out = xs - 0.5 * np.log(2.0 * math.pi * xs) + np.log(alternating - companion)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def log_bessel_i(nu: float, x: Number) -> Number:
    """
    log I_nu(x), overflow-free for any finite x >= 0.

    Args:
        nu: Order, nu > -1
        x: Argument(s) >= 0

    Returns:
        log I_nu(x); -inf where I_nu(0) = 0, +inf where it diverges
    """
    _check_order(nu)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if (xs < 0).any():
        raise DomainError("Bessel I argument must be non-negative")
    out = np.empty_like(xs)

    zero = xs == 0.0
    if zero.any():
        out[zero] = 0.0 if nu == 0 else (-np.inf if nu > 0 else np.inf)

    # Series and expansion agree to 1e-10 past this switch point
    switch = 20.0 + nu * nu
    large = (xs >= switch) & ~zero
    small = ~large & ~zero
    if small.any():
        out[small] = bessel_i_series(nu, xs[small])
    if large.any():
        out[large] = bessel_i_asymptotic(nu, xs[large])
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def bessel_i(nu: float, x: Number) -> Number:
    """
    Modified Bessel function of the first kind I_nu(x).

    Args:
        nu: Order, nu > -1
        x: Argument(s) >= 0

    Returns:
        I_nu(x); use log_bessel_i when x exceeds ~700
    """
    return np.exp(log_bessel_i(nu, x))


def laguerre(n: int, a: float, x: Number) -> Number:
    """
    Generalized Laguerre polynomial L_n^a(x) by the three-term recurrence.

    Args:
        n: Degree >= 0
        a: Parameter > -1
        x: Scalar or array

    Returns:
        L_n^a(x)
    """
    if n < 0:
        raise DomainError(f"Laguerre degree must be non-negative, got {n}")
    xs = np.asarray(x, dtype=float)
    previous = np.ones_like(xs)
    if n == 0:
        return previous if xs.ndim else float(previous)
    current = 1.0 + a - xs
    for k in range(1, n):
        previous, current = current, ((2 * k + 1 + a - xs) * current - (k + a) * previous) / (k + 1)
    return current if xs.ndim else float(current)


def hyp0f1_regularized(b: float, z: float, n_terms: int = None) -> float:
    """
    Regularized confluent limit function sum_k z^k / (k! Gamma(b + k)).

    Entire in b, so non-positive b is accepted (leading terms vanish).

    Args:
        b: Parameter
        z: Argument
        n_terms: Number of terms; chosen from |z| and |b| when omitted

    Returns:
        0F1~(;b;z)
    """
    if z == 0.0:
        return float(reciprocal_gamma(b))
    if n_terms is None:
        n_terms = int(2.0 * math.sqrt(abs(z)) + abs(b)) + 40
    k = np.arange(n_terms, dtype=float)
    log_mag = k * math.log(abs(z)) - log_gamma_real(k + 1.0)
    signs = np.where(k % 2 == 1, -1.0, 1.0) if z < 0 else np.ones_like(k)
    terms = signs * np.exp(log_mag) * reciprocal_gamma(b + k)
    return math.fsum(terms)
