"""
Numerical inverse Laplace transforms on the Bromwich line.
De Hoog, Knight and Stokes quotient-difference acceleration, plus fixed Talbot.
"""

from typing import Callable, Sequence
import logging
import math

import numpy as np

from config import settings
from utils.error_handler import InversionFailure

logger = logging.getLogger(__name__)

Transform = Callable[[np.ndarray], np.ndarray]


def _dehoog_block(transform: Transform, times: np.ndarray, degree: int, tol: float, alpha: float) -> np.ndarray:
    m = degree
    period = 2.0 * float(times.max())
    gamma = alpha - math.log(tol) / (2.0 * period)
    n_points = 2 * m + 1

    s = gamma + 1j * math.pi * np.arange(n_points) / period
    fp = np.asarray(transform(s), dtype=np.complex128)
    if not np.all(np.isfinite(fp)):
        raise InversionFailure("transform returned non-finite values on the Bromwich line")

    # quotient-difference table; rows are superscripts, columns subscripts
    e = np.zeros((n_points, m + 1), dtype=np.complex128)
    q = np.zeros((n_points, m), dtype=np.complex128)
    q[0, 0] = fp[1] / (fp[0] / 2.0)
    q[1:2 * m, 0] = fp[2:2 * m + 1] / fp[1:2 * m]
    for r in range(1, m + 1):
        mr = 2 * (m - r)
        e[0:mr + 1, r] = q[1:mr + 2, r - 1] - q[0:mr + 1, r - 1] + e[1:mr + 2, r - 1]
        if r < m:
            mr = 2 * (m - r) + 1
            q[0:mr, r] = q[1:mr + 1, r - 1] * e[1:mr + 1, r] / e[0:mr, r]

    d = np.zeros(n_points, dtype=np.complex128)
    d[0] = fp[0] / 2.0
    for r in range(1, m + 1):
        d[2 * r - 1] = -q[0, r - 1]
        d[2 * r] = -e[0, r]

    out = np.empty(times.shape)
    for idx, t in enumerate(times):
        z = np.exp(1j * math.pi * t / period)
        a_prev, a_cur = 0.0 + 0j, d[0]
        b_prev, b_cur = 1.0 + 0j, 1.0 + 0j
        for i in range(1, 2 * m):
            a_prev, a_cur = a_cur, a_cur + d[i] * a_prev * z
            b_prev, b_cur = b_cur, b_cur + d[i] * b_prev * z
        # improved remainder of the continued fraction
        brem = (1.0 + (d[2 * m - 1] - d[2 * m]) * z) / 2.0
        rem = -brem * (1.0 - np.sqrt(1.0 + d[2 * m] * z / brem ** 2))
        a_last = a_cur + rem * a_prev
        b_last = b_cur + rem * b_prev
        out[idx] = math.exp(gamma * t) / period * (a_last / b_last).real
    return out


def dehoog(transform: Transform, times: Sequence[float], degree: int = None, tol: float = None, alpha: float = 0.0) -> np.ndarray:
    """
    Invert a Laplace transform with the de Hoog-Knight-Stokes algorithm.

    Times are grouped by decade and each group is inverted with its own
    period, since one period spanning several decades loses accuracy at the
    small times.

    Args:
        transform: Vectorized F(s) accepting a complex array
        times: Positive evaluation points
        degree: Continued-fraction degree M (2M + 1 transform evaluations)
        tol: Target accuracy; sets the Bromwich abscissa
        alpha: Real part of the rightmost singularity of F

    Returns:
        f(t) at the requested times

    Raises:
        InversionFailure: on non-finite intermediate values
    """
    degree = degree or settings.LAPLACE_DEGREE
    tol = tol or settings.LAPLACE_TOL
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    if (ts <= 0).any():
        raise InversionFailure("inverse Laplace times must be positive")

    out = np.empty_like(ts)
    decades = np.floor(np.log10(ts))
    for decade in np.unique(decades):
        mask = decades == decade
        out[mask] = _dehoog_block(transform, ts[mask], degree, tol, alpha)
    if not np.all(np.isfinite(out)):
        raise InversionFailure("de Hoog inversion produced non-finite values")
    return out


def fixed_talbot(transform: Transform, times: Sequence[float], degree: int = None) -> np.ndarray:
    """
    Invert a Laplace transform on the fixed Talbot contour.

    Accurate when F decays in the left half plane; for densities with
    algebraic behaviour at the origin prefer dehoog.

    Args:
        transform: Vectorized F(s)
        times: Positive evaluation points
        degree: Number of contour nodes M

    Returns:
        f(t) at the requested times
    """
    m = degree or settings.LAPLACE_DEGREE
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty_like(ts)
    theta = math.pi * np.arange(1, m) / m
    cot = 1.0 / np.tan(theta)
    sigma = theta + (theta * cot - 1.0) * cot
    for idx, t in enumerate(ts):
        r = 2.0 * m / (5.0 * t)
        nodes = r * theta * (cot + 1j)
        values = np.asarray(transform(np.concatenate(([r + 0j], nodes))), dtype=np.complex128)
        head = 0.5 * values[0].real * math.exp(r * t)
        body = np.real(np.exp(t * nodes) * values[1:] * (1.0 + 1j * sigma)).sum()
        out[idx] = r / m * (head + body)
    if not np.all(np.isfinite(out)):
        raise InversionFailure("fixed Talbot inversion produced non-finite values")
    return out
