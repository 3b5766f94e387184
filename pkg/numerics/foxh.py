"""
Mellin-Barnes evaluator for multivariate Fox-H instances.
Integrands are gamma-factor products evaluated on vertical contours or by
summing the residues of their right pole ladders.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.optimize import linprog

from config import settings
from numerics.specfun import log_gamma
from utils.error_handler import (
    ContourViolation,
    DimensionCap,
    NoConvergence,
    NoValidContour,
)

logger = logging.getLogger(__name__)

VERTICAL = "vertical"
LOOP = "loop"

_EPS = np.finfo(float).eps
_MIN_SEPARATION = 1e-9
# initial residue window per ladder and coordinate-ascent sweeps locating its centre
_WINDOW = 16
_PEAK_SWEEPS = 8


@dataclass(frozen=True)
class GammaFactor:
    """One factor Gamma(offset + sum_j weights[j] s_j) ** power."""

    offset: float
    weights: Tuple[float, ...]
    power: int = 1

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.power not in (1, -1):
            raise ValueError(f"power must be +1 or -1, got {self.power}")

    def argument(self, s: Sequence) -> np.ndarray:
        """Affine argument at the (broadcastable) points s."""
        arg = self.offset
        for w, sj in zip(self.weights, s):
            if w != 0.0:
                arg = arg + w * sj
        return arg

    def describe(self) -> str:
        terms = " ".join(f"{w:+g}*s{j + 1}" for j, w in enumerate(self.weights) if w != 0.0)
        body = f"Gamma({self.offset:g} {terms})"
        return body if self.power == 1 else f"1/{body}"


@dataclass(frozen=True)
class GammaProductIntegrand:
    """
    Integrand prefactor * exp(log_scale) * prod_f Gamma(.)^power * prod_i z_i^{s_i}.

    Every variable needs a ladder factor Gamma(b - s_i) so a right half-plane
    pole ladder exists.
    """

    nvars: int
    factors: Tuple[GammaFactor, ...]
    arguments: Tuple[float, ...]
    prefactor: float = 1.0
    log_scale: float = 0.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "arguments", tuple(float(z) for z in self.arguments))
        if self.nvars < 1:
            raise ValueError("integrand needs at least one variable")
        if len(self.arguments) != self.nvars:
            raise ValueError("one argument per variable is required")
        if any(z <= 0.0 or not math.isfinite(z) for z in self.arguments):
            raise ValueError(f"arguments must be finite and positive: {self.arguments}")
        for f in self.factors:
            if len(f.weights) != self.nvars:
                raise ValueError(f"factor {f.describe()} has wrong weight count")
        for i in range(self.nvars):
            self.ladder(i)

    def ladder(self, i: int) -> GammaFactor:
        """The numerator factor Gamma(b - s_i) of variable i."""
        for f in self.factors:
            if f.power == 1 and f.weights[i] == -1.0 and all(
                w == 0.0 for j, w in enumerate(f.weights) if j != i
            ):
                return f
        raise ValueError(f"variable s{i + 1} has no Gamma(b - s{i + 1}) ladder factor")

    def numerators(self) -> List[GammaFactor]:
        return [f for f in self.factors if f.power == 1]

    def log_kernel(self, s: Sequence, skip: Sequence[GammaFactor] = ()) -> np.ndarray:
        """Sum of power * log Gamma over factors not in skip, plus log_scale."""
        total = self.log_scale
        for f in self.factors:
            if any(f is g for g in skip):
                continue
            total = total + f.power * log_gamma(f.argument(s), strict=False)
        return total


@dataclass(frozen=True)
class ContourPlan:
    """Contour abscissas and trapezoid settings; kind is 'vertical' or 'loop'."""

    abscissas: Tuple[float, ...]
    half_length: float
    nodes_per_unit: int
    kind: str = VERTICAL


@dataclass
class EvaluationTrace:
    """Per-refinement partial sums kept for numerical forensics."""

    entries: List[Tuple[str, str, float]] = field(default_factory=list)

    def record(self, stage: str, setting: str, value: float) -> None:
        self.entries.append((stage, setting, value))
        logger.debug(f"{stage} {setting}: {value!r}")


def growth_slopes(integrand: GammaProductIntegrand) -> dict:
    """
    Stirling exponential-decay rates along vertical directions.

    |Gamma(c + i w.t)| ~ exp(-pi/2 |w.t|), so the integrand decays along a
    direction d at rate (pi/2) * sum_f power_f |w_f . d|.

    Returns:
        Mapping direction tuple -> decay slope (negative means growth)
    """
    slopes = {}
    for d in product((-1, 0, 1), repeat=integrand.nvars):
        if not any(d):
            continue
        rate = sum(f.power * abs(sum(w * dj for w, dj in zip(f.weights, d))) for f in integrand.factors)
        slopes[d] = 0.5 * math.pi * rate
    return slopes


def _left_pole_distance(integrand: GammaProductIntegrand, i: int) -> float:
    distance = math.inf
    for f in integrand.numerators():
        w = f.weights[i]
        if w > 0.0 and f.offset > 0.0:
            distance = min(distance, f.offset / w)
    return distance


def _separations(integrand: GammaProductIntegrand, c: Sequence[float]) -> List[Tuple[float, GammaFactor]]:
    return [(float(f.argument(c)), f) for f in integrand.numerators()]


def _max_margin_point(integrand: GammaProductIntegrand) -> Tuple[float, np.ndarray, GammaFactor]:
    """Point maximising the smallest numerator argument (capped at 1/4)."""
    n = integrand.nvars
    numerators = integrand.numerators()
    # variables (c_1..c_n, t); maximise t
    a_ub = [list(-np.asarray(f.weights)) + [1.0] for f in numerators]
    b_ub = [f.offset for f in numerators]
    bounds = [(-10.0, 10.0)] * n + [(None, 0.25)]
    cost = [0.0] * n + [-1.0]
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not result.success:
        return -math.inf, np.zeros(n), numerators[0]
    c = result.x[:n]
    margin, binding = min(_separations(integrand, c), key=lambda item: item[0])
    return margin, c, binding


def _loop_plan(integrand: GammaProductIntegrand) -> ContourPlan:
    ladders = [integrand.ladder(i) for i in range(integrand.nvars)]
    start = [f.offset for f in ladders]
    smallest = math.inf
    for f in integrand.numerators():
        if any(f is g for g in ladders):
            continue
        if any(w < 0.0 for w in f.weights):
            raise NoValidContour(
                f"{f.describe()} has a right pole ladder that the residue sum cannot enclose"
            )
        arg = float(f.argument(start))
        if arg <= _MIN_SEPARATION:
            raise NoValidContour(f"{f.describe()} collides with the residue ladder at {arg:g}")
        smallest = min(smallest, arg / max(1.0, sum(f.weights)))
    shift = min(0.25, smallest / 3.0)
    return ContourPlan(
        abscissas=tuple(b - shift for b in start),
        half_length=settings.FOXH_HALF_LENGTH,
        nodes_per_unit=settings.FOXH_NODES_PER_UNIT,
        kind=LOOP,
    )


def plan_contour(integrand: GammaProductIntegrand) -> ContourPlan:
    """
    Choose contours separating left and right pole ladders.

    Vertical lines are used when the integrand decays in every direction;
    otherwise each contour is closed around its right ladder and the
    integral becomes a residue sum.

    Args:
        integrand: Integrand to plan for

    Returns:
        ContourPlan

    Raises:
        NoValidContour: when the ladders cannot be separated
    """
    if integrand.nvars > settings.FOXH_MAX_DIM:
        raise DimensionCap(f"{integrand.nvars} variables exceed the cap of {settings.FOXH_MAX_DIM}")

    slopes = growth_slopes(integrand)
    if min(slopes.values()) <= 1e-12:
        plan = _loop_plan(integrand)
        logger.debug(f"{integrand.label or 'integrand'}: loop plan at {plan.abscissas}")
        return plan

    c = []
    for i in range(integrand.nvars):
        c.append(-min(0.25, _left_pole_distance(integrand, i) / 3.0))
    margin, binding = min(_separations(integrand, c), key=lambda item: item[0])
    if margin <= _MIN_SEPARATION:
        margin, c, binding = _max_margin_point(integrand)
        if margin <= _MIN_SEPARATION:
            raise NoValidContour(f"pole ladders of {binding.describe()} cannot be separated")
    plan = ContourPlan(
        abscissas=tuple(float(ci) for ci in c),
        half_length=settings.FOXH_HALF_LENGTH,
        nodes_per_unit=settings.FOXH_NODES_PER_UNIT,
    )
    logger.debug(f"{integrand.label or 'integrand'}: vertical plan at {plan.abscissas}")
    return plan


def validate_contour(integrand: GammaProductIntegrand, plan: ContourPlan) -> None:
    """
    Check the pole-separation rule for a plan.

    Raises:
        ContourViolation: naming the first violating factor
    """
    if len(plan.abscissas) != integrand.nvars:
        raise ContourViolation("plan and integrand dimensions differ")
    for arg, f in _separations(integrand, plan.abscissas):
        if arg <= _MIN_SEPARATION:
            raise ContourViolation(f"{f.describe()} has argument {arg:g} on the contour")
    if plan.kind == LOOP:
        ladders = [integrand.ladder(i) for i in range(integrand.nvars)]
        for f in integrand.numerators():
            if not any(f is g for g in ladders) and any(w < 0.0 for w in f.weights):
                raise ContourViolation(f"{f.describe()} has poles inside the residue loop")


class _Accumulator:
    """Running-max sum of exp(log weights) with marginal absolute masses."""

    def __init__(self, shape: Sequence[int] = ()):
        self.shift = -math.inf
        self.total = 0.0
        self.absolute = 0.0
        self.marginals = [np.zeros(n) for n in shape]

    def _rescale(self, peak: float) -> None:
        if peak > self.shift:
            factor = math.exp(self.shift - peak) if math.isfinite(self.shift) else 0.0
            self.total *= factor
            self.absolute *= factor
            for m in self.marginals:
                m *= factor
            self.shift = peak

    def add(self, logs: np.ndarray, signs: Optional[np.ndarray] = None, offset: int = 0) -> None:
        peak = float(np.max(np.real(logs)))
        if peak == -math.inf:
            return
        self._rescale(peak)
        w = np.exp(logs - self.shift)
        if signs is not None:
            w = signs * w
        magnitude = np.abs(w)
        self.total += w.sum()
        self.absolute += float(magnitude.sum())
        for axis, m in enumerate(self.marginals):
            other = tuple(a for a in range(magnitude.ndim) if a != axis)
            slab = magnitude.sum(axis=other) if other else magnitude
            if axis == 0:
                m[offset:offset + slab.shape[0]] += slab
            else:
                m += slab


def _chunk_rows(shape: Sequence[int]) -> int:
    inner = int(np.prod(shape[1:])) if len(shape) > 1 else 1
    return max(1, 262_144 // max(1, inner))


def _log_terms(integrand, ladders: Sequence[GammaFactor], ks: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Log magnitudes and signs of the residue terms at integer offsets ks."""
    s = [f.offset + k for f, k in zip(ladders, ks)]
    logs = integrand.log_kernel(s, skip=ladders)
    real = np.real(logs)
    parity = 0.0
    # residue of Gamma(b - s) at s = b + k is (-1)^k / k! up to the closing orientation
    for i, k in enumerate(ks):
        real = real + s[i] * math.log(integrand.arguments[i]) - np.real(log_gamma(k + 1.0))
        parity = parity + k
    signs = np.where(np.cos(np.imag(logs) + math.pi * parity) < 0.0, -1.0, 1.0)
    shape = np.broadcast_shapes(np.shape(real), *[np.shape(k) for k in ks])
    return np.broadcast_to(real, shape), np.broadcast_to(signs, shape)


def _peak_indices(integrand, ladders: Sequence[GammaFactor]) -> List[int]:
    """Largest residue term, located by coordinate ascent along each ladder."""
    n = integrand.nvars
    peak = [0] * n
    for _ in range(_PEAK_SWEEPS):
        moved = False
        for i in range(n):
            reach = min(int(2.0 * integrand.arguments[i]) + _WINDOW, settings.FOXH_MAX_TERMS)
            ks = [np.array([float(k)]) for k in peak]
            ks[i] = np.arange(reach, dtype=float)
            real, _ = _log_terms(integrand, ladders, ks)
            best = int(np.nanargmax(real)) if np.isfinite(real).any() else 0
            if best != peak[i]:
                peak[i] = best
                moved = True
        if not moved:
            break
    return peak


def _residue_sum(
    integrand, trace: EvaluationTrace, lows: List[int], counts: List[int]
) -> Tuple[float, float, float, List[np.ndarray]]:
    n = integrand.nvars
    ladders = [integrand.ladder(i) for i in range(n)]
    acc = _Accumulator(counts)
    rows = _chunk_rows(counts)

    axes = []
    for i in range(1, n):
        k = lows[i] + np.arange(counts[i], dtype=float)
        axes.append(k.reshape([1] * i + [counts[i]] + [1] * (n - i - 1)))

    for lo in range(0, counts[0], rows):
        k0 = lows[0] + np.arange(lo, min(lo + rows, counts[0]), dtype=float)
        real, signs = _log_terms(integrand, ladders, [k0.reshape([-1] + [1] * (n - 1))] + axes)
        acc.add(real, signs, offset=lo)

    window = " ".join(f"{a}:{a + c}" for a, c in zip(lows, counts))
    trace.record("residues", window, acc.total * math.exp(acc.shift) if acc.shift < 700 else math.inf)
    return acc.total, acc.absolute, acc.shift, acc.marginals


def _evaluate_loop(integrand, trace: EvaluationTrace, tol: float) -> float:
    """
    Residue sum over a window of ladder indices.

    The window starts around the largest term and each side grows while its
    outer quarter still carries more than tol of the sum.
    """
    n = integrand.nvars
    ladders = [integrand.ladder(i) for i in range(n)]
    peak = _peak_indices(integrand, ladders)
    lows = [max(0, k - _WINDOW // 2) for k in peak]
    counts = [_WINDOW] * n
    budget = settings.FOXH_MAX_TERMS
    while True:
        if int(np.prod(counts)) > budget:
            window = [f"{a}:{a + c}" for a, c in zip(lows, counts)]
            raise NoConvergence(
                f"{integrand.label or 'integrand'}: residue window {window} exceeds the term budget"
            )
        total, absolute, shift, marginals = _residue_sum(integrand, trace, lows, counts)
        scale = max(abs(total), 64.0 * _EPS * absolute)
        if scale == 0.0:
            return 0.0
        grew = False
        for i in range(n):
            edge = max(1, counts[i] // 4)
            step = max(_WINDOW // 2, counts[i] // 2)
            if marginals[i][-edge:].sum() > tol * scale:
                counts[i] += step
                grew = True
            if lows[i] > 0 and marginals[i][:edge].sum() > tol * scale:
                down = min(lows[i], step)
                lows[i] -= down
                counts[i] += down
                grew = True
        if not grew:
            break

    if total == 0.0:
        return 0.0
    if _EPS * absolute > tol * abs(total):
        raise NoConvergence(
            f"{integrand.label or 'integrand'}: residue sum lost accuracy to cancellation"
        )
    log_value = shift + math.log(abs(total)) + math.log(abs(integrand.prefactor))
    if log_value > 709.0:
        raise NoConvergence(f"{integrand.label or 'integrand'}: value overflows double range")
    return math.copysign(math.exp(log_value), total * integrand.prefactor)


def _trapezoid(integrand, c: Sequence[float], half_length: float, nodes_per_unit: int) -> Tuple[complex, float, float]:
    n = integrand.nvars
    h = 1.0 / nodes_per_unit
    m = int(round(2.0 * half_length * nodes_per_unit)) + 1
    if m ** n > settings.FOXH_MAX_TERMS:
        raise NoConvergence(f"{m ** n} contour nodes exceed the budget")
    t = -half_length + h * np.arange(m)
    log_z = np.log(np.asarray(integrand.arguments))

    grids = []
    for i in range(1, n):
        grids.append(t.reshape([1] * i + [m] + [1] * (n - i - 1)))

    total = _Accumulator()
    outer = _Accumulator()
    inner = _Accumulator()
    rows = _chunk_rows([m] * n)
    for lo in range(0, m, rows):
        t0 = t[lo:lo + rows].reshape([-1] + [1] * (n - 1))
        ts = [t0] + grids
        s = [ci + 1j * ti for ci, ti in zip(c, ts)]
        logs = integrand.log_kernel(s)
        for i in range(n):
            logs = logs + s[i] * log_z[i]
        shape = np.broadcast_shapes(*[ti.shape for ti in ts])
        logs = np.broadcast_to(logs, shape)
        radius = np.zeros(shape)
        for ti in ts:
            radius = np.maximum(radius, np.abs(ti))
        total.add(logs)
        outer.add(np.where(radius >= half_length - 1.0, logs, -np.inf))
        inner.add(np.where((radius >= half_length - 2.0) & (radius < half_length - 1.0), logs, -np.inf))

    if total.shift > 700.0:
        raise NoConvergence(f"{integrand.label or 'integrand'}: contour values overflow double range")
    weight = (h / (2.0 * math.pi)) ** n * math.exp(total.shift)
    value = total.total * weight
    outer_tail = outer.absolute * math.exp(outer.shift - total.shift) * weight if outer.absolute else 0.0
    inner_tail = inner.absolute * math.exp(inner.shift - total.shift) * weight if inner.absolute else 0.0
    return value, total.absolute * weight, max(outer_tail, inner_tail)


def _evaluate_vertical(integrand, plan: ContourPlan, trace: EvaluationTrace, tol: float) -> float:
    half_length = plan.half_length
    density = plan.nodes_per_unit
    previous = None
    for _ in range(settings.FOXH_MAX_REFINEMENTS + 1):
        value, absolute, tail = _trapezoid(integrand, plan.abscissas, half_length, density)
        scale = max(abs(value), 64.0 * _EPS * absolute)
        trace.record("vertical", f"T={half_length:g} n/unit={density}", float(np.real(value)))
        if tail > tol * scale:
            # both outermost unit panels must be negligible
            half_length *= 2.0
            previous = None
            continue
        if previous is not None and abs(value - previous) <= tol * scale:
            if abs(np.imag(value)) > tol * scale:
                raise NoConvergence(
                    f"{integrand.label or 'integrand'}: imaginary residual {abs(np.imag(value)):.3g}"
                )
            return integrand.prefactor * float(np.real(value))
        previous = value
        density *= 2
    raise NoConvergence(f"{integrand.label or 'integrand'}: contour refinement budget exhausted")


def evaluate(
    integrand: GammaProductIntegrand,
    plan: Optional[ContourPlan] = None,
    tol: Optional[float] = None,
    trace: Optional[EvaluationTrace] = None,
) -> float:
    """
    (1/(2 pi i))^n times the nested contour integral of the integrand.

    Args:
        integrand: Gamma-product integrand
        plan: Contour plan; planned automatically when omitted
        tol: Relative tolerance (settings.FOXH_TOL by default)
        trace: Optional trace receiving partial sums

    Returns:
        Real value of the integral

    Raises:
        DimensionCap, ContourViolation, NoConvergence
    """
    tol = settings.FOXH_TOL if tol is None else tol
    trace = trace if trace is not None else EvaluationTrace()
    if integrand.nvars > settings.FOXH_MAX_DIM:
        raise DimensionCap(f"{integrand.nvars} variables exceed the cap of {settings.FOXH_MAX_DIM}")
    if plan is None:
        plan = plan_contour(integrand)
    validate_contour(integrand, plan)
    if plan.kind == LOOP:
        return _evaluate_loop(integrand, trace, tol)
    return _evaluate_vertical(integrand, plan, trace, tol)


def dump_integrand(
    integrand: GammaProductIntegrand,
    plan: Optional[ContourPlan] = None,
    trace: Optional[EvaluationTrace] = None,
) -> str:
    """
    Plain-text table of an integrand, its plan and the recorded partial sums.

    Returns:
        Multi-line string
    """
    lines = [f"integrand {integrand.label or '(unnamed)'}: {integrand.nvars} variables"]
    lines.append(f"  prefactor {integrand.prefactor!r}  log_scale {integrand.log_scale!r}")
    for i, z in enumerate(integrand.arguments):
        lines.append(f"  z{i + 1} = {z!r}")
    lines.append("  factors:")
    for f in integrand.factors:
        lines.append(f"    {f.describe()}")
    if plan is not None:
        lines.append(
            f"  plan {plan.kind}: c = {plan.abscissas}  T = {plan.half_length}  n/unit = {plan.nodes_per_unit}"
        )
    if trace is not None:
        lines.append("  refinements:")
        for stage, setting, value in trace.entries:
            lines.append(f"    {stage:<9} {setting:<24} {value!r}")
    return "\n".join(lines)
