"""
Configuration management for the fading numerics toolkit.
Uses pydantic-settings to load and validate environment variables.
"""

from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Mellin-Barnes evaluator
    FOXH_TOL: float = Field(
        default=1e-8,
        description="Default relative tolerance of Fox-H evaluations"
    )
    FOXH_NODES_PER_UNIT: int = Field(
        default=20,
        description="Initial trapezoid nodes per unit length on vertical contours"
    )
    FOXH_HALF_LENGTH: float = Field(
        default=20.0,
        description="Initial half length T of vertical contours"
    )
    FOXH_MAX_REFINEMENTS: int = Field(
        default=4,
        description="Maximum number of node-density or contour-length doublings"
    )
    FOXH_MAX_TERMS: int = Field(
        default=4_000_000,
        description="Node or residue-term budget of a single evaluation"
    )
    FOXH_MAX_DIM: int = Field(
        default=4,
        description="Largest number of integration variables accepted"
    )
    CHANNEL_CACHE_SIZE: int = Field(
        default=64,
        description="Parameter sets whose channel constants and failure ceilings are kept"
    )

    # Quadrature oracle and series paths
    QUAD_TOL: float = Field(
        default=1e-10,
        description="Relative tolerance of the convolution oracle"
    )
    QUAD_MAX_ORDER: int = Field(
        default=1024,
        description="Largest Gauss-Jacobi order tried before QuadratureFailure"
    )
    SERIES_SINGULARITY_EPS: float = Field(
        default=1e-9,
        description="Minimum |p - eta| accepted by the Laguerre series path"
    )

    # Monte Carlo engine
    MC_SAMPLES: int = Field(
        default=10_000_000,
        description="Default number of Monte Carlo samples"
    )
    MC_SEED: int = Field(
        default=7,
        description="Default 64-bit seed"
    )
    MC_CHUNK: int = Field(
        default=65_536,
        description="Samples per chunk; fixed so statistics do not depend on workers"
    )
    MC_BINS: int = Field(
        default=100,
        description="Histogram bins spanning [0, 99.9th percentile]"
    )
    WORKERS: int = Field(
        default=1,
        description="Process workers used by Monte Carlo runs and sweeps"
    )

    # Inverse Laplace path
    LAPLACE_DEGREE: int = Field(
        default=24,
        description="Degree of the de Hoog continued fraction"
    )
    LAPLACE_TOL: float = Field(
        default=1e-10,
        description="Target tolerance used to place the Bromwich abscissa"
    )

    # Modelling switches
    NEAR_FIELD_EXPONENT: str = Field(
        default="physical",
        description="Near-field pattern exponent: 'physical' -(a+3)/2 or 'printed' (-a+3)/2"
    )
    ASYMPTOTIC_FORM: str = Field(
        default="limit",
        description="Small-argument coefficient: 'limit', 'printed' or 'shifted'"
    )
    GAMMA_TH_DB: float = Field(
        default=0.0,
        description="Outage threshold used by figure recipes (dB)"
    )

    # Application Settings
    OUTPUT_DIR: str = Field(
        default="out",
        description="Directory receiving CSV and SVG artifacts"
    )
    LOG_LEVEL: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)"
    )

    class Config:
        """Pydantic configuration."""
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True


# Global settings instance
settings = Settings()
