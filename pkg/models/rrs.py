"""
Geometry and link models for refractive-surface transmitters.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from models.channel import FadingParams


class RrsGeometry(BaseModel):
    """Feed placement and element layout of the surface."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    d0: float = Field(..., gt=0, description="Feed-to-surface distance (m)")
    element_centers: Tuple[Tuple[float, float], ...] = Field(..., min_length=1)
    dx: float = Field(..., gt=0, description="Element width (m)")
    dy: float = Field(..., gt=0, description="Element height (m)")
    wavelength: float = Field(..., gt=0, description="Carrier wavelength (m)")
    alpha_f: float = Field(default=1.0, gt=-1, description="Feed gain exponent")

    @field_validator("element_centers", mode="before")
    @classmethod
    def _as_pairs(cls, value):
        return tuple((float(a), float(b)) for a, b in value)

    @classmethod
    def tiled(
        cls,
        rows: int,
        cols: int,
        d0: float,
        dx: float,
        dy: float,
        wavelength: float,
        alpha_f: float = 1.0,
    ) -> "RrsGeometry":
        """
        Rectangular rows x cols tiling centred on the feed axis.

        Args:
            rows: Element rows
            cols: Element columns
            d0: Feed distance
            dx: Element width
            dy: Element height
            wavelength: Carrier wavelength
            alpha_f: Feed gain exponent

        Returns:
            RrsGeometry with abutting elements
        """
        centers = [
            ((c - (cols - 1) / 2.0) * dx, (r - (rows - 1) / 2.0) * dy)
            for r in range(rows)
            for c in range(cols)
        ]
        return cls(
            d0=d0, element_centers=centers, dx=dx, dy=dy, wavelength=wavelength, alpha_f=alpha_f
        )

    @property
    def size(self) -> int:
        return len(self.element_centers)


@dataclass(frozen=True)
class RrsLink:
    """Per-element fading, near-field gains and mean SNR of a coherent link."""

    elements: Tuple[FadingParams, ...]
    gains: Tuple[float, ...]
    gamma_bar: float = 1.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))
        if not self.elements:
            raise ValueError("a link needs at least one element")
        if len(self.elements) != len(self.gains):
            raise ValueError("one gain per element is required")
        if any(not 0.0 < g <= 1.0 for g in self.gains):
            raise ValueError(f"gains must lie in (0, 1]: {self.gains}")
        if self.gamma_bar <= 0.0:
            raise ValueError("mean SNR must be positive")

    @classmethod
    def identical(cls, params: FadingParams, n: int, gain: float = 1.0, gamma_bar: float = 1.0) -> "RrsLink":
        """n i.i.d. elements sharing one gain."""
        return cls(elements=(params,) * n, gains=(gain,) * n, gamma_bar=gamma_bar)

    @property
    def size(self) -> int:
        return len(self.elements)

    def with_gamma_bar(self, gamma_bar: float) -> "RrsLink":
        return RrsLink(self.elements, self.gains, gamma_bar, self.label)
