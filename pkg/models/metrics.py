"""
Metric models: binary modulations, SNR operating points and tagged results.
"""

from dataclasses import dataclass
import math

from pydantic import BaseModel, ConfigDict, Field


class ModulationScheme(BaseModel):
    """Binary modulation with conditional BER Gamma(p_m, q_m g) / (2 Gamma(p_m))."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "custom"
    p_m: float = Field(..., gt=0)
    q_m: float = Field(..., gt=0)

    @classmethod
    def named(cls, name: str) -> "ModulationScheme":
        """
        Look up a named scheme.

        Args:
            name: bpsk, dpsk or bfsk (case-insensitive)

        Returns:
            ModulationScheme

        Raises:
            KeyError: for unknown names
        """
        p_m, q_m = MODULATIONS[name.lower()]
        return cls(name=name.lower(), p_m=p_m, q_m=q_m)


MODULATIONS = {
    "bpsk": (0.5, 1.0),
    "dpsk": (1.0, 1.0),
    "bfsk": (0.5, 0.5),
}


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class SnrPoint:
    """Mean and threshold SNR, both linear."""

    gamma_bar: float
    gamma_th: float = 1.0

    def __post_init__(self):
        if self.gamma_bar <= 0.0 or self.gamma_th <= 0.0:
            raise ValueError("SNR values must be positive")

    @classmethod
    def from_db(cls, gamma_bar_db: float, gamma_th_db: float = 0.0) -> "SnrPoint":
        return cls(db_to_linear(gamma_bar_db), db_to_linear(gamma_th_db))

    def envelope_threshold(self) -> float:
        """Threshold on Z = sum g_i R_i matching gamma_th, since gamma = gamma_bar Z^2."""
        return math.sqrt(self.gamma_th / self.gamma_bar)


@dataclass(frozen=True)
class MetricResult:
    """A metric value tagged with the path that produced it."""

    value: float
    method: str
    stderr: float = 0.0

    def __float__(self) -> float:
        return self.value
