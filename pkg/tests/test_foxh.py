"""Tests for the Mellin-Barnes evaluator: known closed forms, planning and failure modes."""

import math

import pytest
from scipy.integrate import quad
from scipy.special import iv, jv

from config import settings
from numerics.foxh import (
    LOOP,
    VERTICAL,
    ContourPlan,
    EvaluationTrace,
    GammaFactor,
    GammaProductIntegrand,
    dump_integrand,
    evaluate,
    plan_contour,
    validate_contour,
)
from utils.error_handler import ContourViolation, DimensionCap, NoValidContour


def exp_integrand(*zs: float) -> GammaProductIntegrand:
    """prod_i Gamma(-s_i) z_i^s_i, integrating to exp(-sum z_i)."""
    n = len(zs)
    factors = tuple(
        GammaFactor(0.0, tuple(-1.0 if j == i else 0.0 for j in range(n))) for i in range(n)
    )
    return GammaProductIntegrand(nvars=n, factors=factors, arguments=zs, label="exp")


def bessel_integrand(nu: float, x: float) -> GammaProductIntegrand:
    return GammaProductIntegrand(
        nvars=1,
        factors=(GammaFactor(nu / 2.0, (-1.0,)), GammaFactor(1.0 + nu / 2.0, (1.0,), power=-1)),
        arguments=(x * x / 4.0,),
        label="bessel J",
    )


def reflected_ladder(z: float, *factors: GammaFactor, log_scale: float = 0.0, label: str = "") -> GammaProductIntegrand:
    """pi Gamma(-s) / (Gamma(1/2 + s) Gamma(1/2 - s)) z^s times extra factors: positive residue terms."""
    return GammaProductIntegrand(
        nvars=1,
        factors=(
            GammaFactor(0.0, (-1.0,)),
            GammaFactor(0.5, (1.0,), power=-1),
            GammaFactor(0.5, (-1.0,), power=-1),
        ) + factors,
        arguments=(z,),
        prefactor=math.pi,
        log_scale=log_scale,
        label=label,
    )


def beta_integrand(a1: float, a2: float, z1: float, z2: float) -> GammaProductIntegrand:
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
        label="beta",
    )


class TestClosedForms:
    """Integrals with known values."""

    @pytest.mark.parametrize("z", [0.1, 1.0, 4.0])
    def test_exponential_identity(self, z):
        assert evaluate(exp_integrand(z), tol=1e-10) == pytest.approx(math.exp(-z), abs=1e-10)

    @pytest.mark.parametrize("nu,x", [(0.0, 1.0), (1.0, 2.0), (1.0, 5.0), (2.5, 3.0)])
    def test_bessel_j_identity(self, nu, x):
        assert evaluate(bessel_integrand(nu, x), tol=1e-10) == pytest.approx(jv(nu, x), abs=1e-8)

    @pytest.mark.parametrize("nu,x", [(-0.5, 2.0), (0.5, 1.0), (1.5, 6.0)])
    def test_bessel_i_identity(self, nu, x):
        integrand = reflected_ladder(x * x / 4.0, GammaFactor(1.0 + nu, (1.0,), power=-1), label="bessel I")
        expected = (x / 2.0) ** (-nu) * iv(nu, x)
        assert evaluate(integrand, tol=1e-10) == pytest.approx(expected, rel=1e-8)

    def test_residue_window_follows_distant_peak(self):
        # e^-z sum z^k / k! = 1 with the largest terms near k = z
        z = 400.0
        trace = EvaluationTrace()
        value = evaluate(reflected_ladder(z, log_scale=-z, label="poisson"), tol=1e-10, trace=trace)
        assert value == pytest.approx(1.0, rel=1e-8)
        windows = [setting for stage, setting, _ in trace.entries if stage == "residues"]
        assert int(windows[0].split(":")[0]) > 350

    def test_two_variable_product(self):
        value = evaluate(exp_integrand(0.5, 1.5), tol=1e-8)
        assert value == pytest.approx(math.exp(-2.0), rel=1e-7)

    def test_prefactor_and_log_scale(self):
        base = exp_integrand(1.0)
        scaled = GammaProductIntegrand(
            nvars=1, factors=base.factors, arguments=base.arguments, prefactor=-3.0, log_scale=math.log(2.0)
        )
        assert evaluate(scaled) == pytest.approx(-6.0 * math.exp(-1.0), rel=1e-8)


class TestPlanning:
    """Contour selection and the separation rule."""

    def test_decaying_integrand_gets_vertical_plan(self):
        plan = plan_contour(exp_integrand(1.0))
        assert plan.kind == VERTICAL
        assert plan.abscissas[0] < 0.0

    def test_balanced_ratio_gets_loop_plan(self):
        plan = plan_contour(bessel_integrand(1.0, 2.0))
        assert plan.kind == LOOP

    @pytest.mark.parametrize("c", [-0.2, -0.5, -0.9])
    def test_value_independent_of_valid_abscissa(self, c):
        plan = ContourPlan(abscissas=(c,), half_length=settings.FOXH_HALF_LENGTH,
                           nodes_per_unit=settings.FOXH_NODES_PER_UNIT)
        assert evaluate(exp_integrand(1.5), plan=plan, tol=1e-10) == pytest.approx(math.exp(-1.5), abs=1e-9)

    @pytest.mark.parametrize("abscissas", [(-0.5, -0.2), (-1.0, -0.3)])
    def test_beta_kernel_on_vertical_contours(self, abscissas):
        a1, a2, z1, z2 = 0.5, -0.5, 0.8, 1.3
        expected, _ = quad(lambda t: math.exp(-z1 * t - z2 * (1.0 - t)), 0.0, 1.0,
                           weight="alg", wvar=(a1, a2), epsabs=1e-13, epsrel=1e-12)
        plan = ContourPlan(abscissas=abscissas, half_length=settings.FOXH_HALF_LENGTH,
                           nodes_per_unit=settings.FOXH_NODES_PER_UNIT)
        value = evaluate(beta_integrand(a1, a2, z1, z2), plan=plan, tol=1e-8)
        assert value == pytest.approx(expected, abs=1e-7)

    def test_contour_right_of_ladder_rejected(self):
        plan = ContourPlan(abscissas=(0.5,), half_length=20.0, nodes_per_unit=20)
        with pytest.raises(ContourViolation):
            validate_contour(exp_integrand(1.0), plan)

    def test_second_right_ladder_cannot_be_enclosed(self):
        integrand = GammaProductIntegrand(
            nvars=1,
            factors=(
                GammaFactor(0.0, (-1.0,)),
                GammaFactor(1.0, (-1.0,)),
                GammaFactor(1.0, (1.0,), power=-1),
                GammaFactor(1.0, (1.0,), power=-1),
            ),
            arguments=(1.0,),
        )
        with pytest.raises(NoValidContour):
            plan_contour(integrand)


class TestConstruction:
    """Integrand validation and diagnostics."""

    def test_missing_ladder_rejected(self):
        with pytest.raises(ValueError):
            GammaProductIntegrand(nvars=1, factors=(GammaFactor(1.0, (1.0,)),), arguments=(1.0,))

    def test_non_positive_argument_rejected(self):
        with pytest.raises(ValueError):
            GammaProductIntegrand(nvars=1, factors=(GammaFactor(0.0, (-1.0,)),), arguments=(0.0,))

    def test_power_must_be_unit(self):
        with pytest.raises(ValueError):
            GammaFactor(0.0, (-1.0,), power=2)

    def test_dimension_cap(self):
        integrand = exp_integrand(*([1.0] * (settings.FOXH_MAX_DIM + 1)))
        with pytest.raises(DimensionCap):
            evaluate(integrand)

    def test_trace_and_dump(self):
        integrand = bessel_integrand(1.0, 2.0)
        trace = EvaluationTrace()
        plan = plan_contour(integrand)
        evaluate(integrand, plan=plan, trace=trace)
        assert trace.entries
        text = dump_integrand(integrand, plan, trace)
        assert "bessel J" in text
        assert "plan loop" in text
        assert "1/Gamma" in text
