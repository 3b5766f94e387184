"""
Parameter models for the alpha-eta-kappa-mu fading channel.
Holds the seven model parameters and the constants derived from them.
"""

from dataclasses import dataclass
import math

from pydantic import BaseModel, ConfigDict, Field


class FadingParams(BaseModel):
    """Seven-parameter alpha-eta-kappa-mu fading model."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(..., gt=0, description="Non-linearity")
    eta: float = Field(..., gt=0, description="Scattered in-phase/quadrature power ratio")
    kappa: float = Field(..., gt=0, description="Dominant-to-scattered power ratio")
    mu: float = Field(..., gt=0, description="Number of clusters")
    p: float = Field(..., gt=0, description="Cluster ratio mu_x / mu_y")
    q: float = Field(..., gt=0, description="Ratio of the dominant-to-scattered power ratios")
    r_hat: float = Field(default=1.0, gt=0, description="alpha-root mean of R^alpha")


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form constants of the density and of the physical sampler."""

    xi: float
    delta: float
    log_psi1: float
    psi2: float
    psi3: float
    A1: float
    A2: float
    A3: float
    A4: float
    A5: float
    sigma_x: float
    sigma_y: float
    lambda_x: float
    lambda_y: float
    mu_x: float
    mu_y: float

    @property
    def psi1(self) -> float:
        return math.exp(self.log_psi1)


def derive_constants(params: FadingParams) -> DerivedConstants:
    """
    Compute the density and sampler constants of a parameter set.

    psi1 is kept as a logarithm since it overflows for large mu.
    The sampler standard deviations make E[R^alpha] = r_hat^alpha, and the
    noncentralities are totals shared evenly by the clusters.

    Args:
        params: Model parameters

    Returns:
        DerivedConstants
    """
    alpha, eta, kappa, mu = params.alpha, params.eta, params.kappa, params.mu
    p, q = params.p, params.q
    scale = params.r_hat ** alpha

    xi = (1.0 + eta) * (1.0 + kappa) / (1.0 + p)
    delta = (1.0 + q * eta) * (1.0 + p) / (1.0 + eta)

    log_psi1 = (
        math.log(p * alpha * mu * mu)
        + (1.0 + mu / 2.0) * math.log(xi)
        + (mu / 2.0 - 1.0) * math.log(delta)
        + (1.0 + p - p * mu) / (2.0 + 2.0 * p) * math.log(q)
        - (1.0 + p + p * mu) / (2.0 + 2.0 * p) * math.log(eta)
        - (mu / 2.0 - 1.0) * math.log(kappa)
        - (1.0 + p * q) * kappa * mu / delta
    )

    return DerivedConstants(
        xi=xi,
        delta=delta,
        log_psi1=log_psi1,
        psi2=alpha - 1.0,
        psi3=p * xi * mu / (eta * scale),
        A1=p * mu / (1.0 + p) - 1.0,
        A2=mu / (1.0 + p) - 1.0,
        A3=(eta - p) * xi * mu / (eta * scale),
        A4=2.0 * p * mu * math.sqrt(q * kappa * xi / (eta * delta * scale)),
        A5=2.0 * mu * math.sqrt(kappa * xi / (delta * scale)),
        sigma_x=math.sqrt(eta * scale / (2.0 * p * xi * mu)),
        sigma_y=math.sqrt(scale / (2.0 * xi * mu)),
        lambda_x=math.sqrt(eta * kappa * q * scale / ((q * eta + 1.0) * (kappa + 1.0))),
        lambda_y=math.sqrt(kappa * scale / ((q * eta + 1.0) * (kappa + 1.0))),
        mu_x=2.0 * p * mu / (1.0 + p),
        mu_y=2.0 * mu / (1.0 + p),
    )
