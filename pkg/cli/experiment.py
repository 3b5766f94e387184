"""
Experiment configuration for the command-line front end.
Merges a key=value file with flag overrides and validates the result.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import settings
from models.channel import FadingParams
from models.metrics import ModulationScheme, MODULATIONS, db_to_linear
from models.rrs import RrsGeometry, RrsLink
from services.rrs_service import near_field_gains
from utils.csv_writer import write_csv
from utils.error_handler import ConfigError
from utils.plotting import plot_table
from utils.validators import check_unknown_keys, parse_grid, parse_key_value_text, validate_positive_int

logger = logging.getLogger(__name__)

MODES = ("pdf", "cdf", "outage", "ber", "sweep-n", "validate", "reproduce")
CLI_METHODS = ("auto", "exact", "laplace", "mc", "series")
_FADING_KEYS = ("alpha", "eta", "kappa", "mu", "p", "q")
_GEOMETRY_KEYS = ("rows", "cols", "d0", "dx", "dy", "wavelength")
# keys that never change a table, left out of the provenance line
_RUNTIME_KEYS = {"out", "plot", "workers", "debug_dump"}


class ExperimentConfig(BaseModel):
    """
    One command-line run.

    Fading parameters are shared by every element; gains come either from
    `gain` or from a tiled geometry (rows, cols, d0, dx, dy, wavelength).
    """

    model_config = ConfigDict(extra="forbid")

    mode: str
    figure: Optional[str] = None

    alpha: Optional[float] = Field(default=None, gt=0)
    eta: Optional[float] = Field(default=None, gt=0)
    kappa: Optional[float] = Field(default=None, gt=0)
    mu: Optional[float] = Field(default=None, gt=0)
    p: Optional[float] = Field(default=None, gt=0)
    q: Optional[float] = Field(default=None, gt=0)
    r_hat: float = Field(default=1.0, gt=0)

    elements: int = Field(default=1, ge=1)
    gain: float = Field(default=1.0, gt=0, le=1.0)
    rows: Optional[int] = Field(default=None, ge=1)
    cols: Optional[int] = Field(default=None, ge=1)
    d0: Optional[float] = Field(default=None, gt=0)
    dx: Optional[float] = Field(default=None, gt=0)
    dy: Optional[float] = Field(default=None, gt=0)
    wavelength: Optional[float] = Field(default=None, gt=0)
    alpha_f: float = Field(default=1.0, gt=-1)

    grid: Optional[str] = None
    snr_db: Optional[str] = None
    n_values: Optional[str] = None
    gamma_th_db: float = settings.GAMMA_TH_DB
    modulation: str = "bpsk"
    n_terms: int = Field(default=20, ge=1)

    method: str = "auto"
    samples: int = Field(default=settings.MC_SAMPLES, ge=1)
    seed: int = Field(default=settings.MC_SEED, ge=0)
    workers: int = Field(default=settings.WORKERS, ge=1)

    out: str = settings.OUTPUT_DIR
    plot: bool = False
    debug_dump: Optional[str] = None

    @field_validator("samples", mode="before")
    @classmethod
    def _whole_samples(cls, value):
        if isinstance(value, str):
            ok, parsed, error = validate_positive_int(value, "samples")
            if not ok:
                raise ValueError(error.split(": ", 1)[-1])
            return parsed
        return value

    @model_validator(mode="after")
    def _check_mode(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise ValueError(f"mode: must be one of {', '.join(MODES)}")
        if self.method not in CLI_METHODS:
            raise ValueError(f"method: must be one of {', '.join(CLI_METHODS)}")
        if self.modulation.lower() not in MODULATIONS:
            raise ValueError(f"modulation: must be one of {', '.join(MODULATIONS)}")
        if self.mode in ("pdf", "cdf", "outage", "ber", "sweep-n"):
            missing = [k for k in _FADING_KEYS if getattr(self, k) is None]
            if missing:
                raise ValueError(f"{missing[0]}: required for mode {self.mode}")
        geometry_given = [k for k in _GEOMETRY_KEYS if getattr(self, k) is not None]
        if geometry_given and len(geometry_given) != len(_GEOMETRY_KEYS):
            absent = [k for k in _GEOMETRY_KEYS if getattr(self, k) is None]
            raise ValueError(f"{absent[0]}: geometry needs {', '.join(_GEOMETRY_KEYS)}")
        required = {"pdf": ["grid"], "cdf": ["grid"], "outage": ["snr_db"], "ber": ["snr_db"],
                    "sweep-n": ["snr_db", "n_values"], "reproduce": ["figure"]}
        for key in required.get(self.mode, []):
            if getattr(self, key) is None:
                raise ValueError(f"{key}: required for mode {self.mode}")
        for key in ("grid", "snr_db", "n_values"):
            text = getattr(self, key)
            if text is not None:
                ok, values, error = parse_grid(text, key)
                if not ok:
                    raise ValueError(error)
        if self.grid is not None and np.any(self.x_grid() < 0.0):
            raise ValueError("grid: envelope values must be non-negative")
        if self.n_values is not None:
            n = parse_grid(self.n_values, "n_values")[1]
            if np.any(n < 1) or np.any(n != np.round(n)):
                raise ValueError("n_values: element counts must be positive integers")
        return self

    # Derived views

    def fading_params(self) -> FadingParams:
        return FadingParams(
            alpha=self.alpha, eta=self.eta, kappa=self.kappa,
            mu=self.mu, p=self.p, q=self.q, r_hat=self.r_hat,
        )

    def x_grid(self) -> np.ndarray:
        return parse_grid(self.grid, "grid")[1]

    def snr_grid_db(self) -> np.ndarray:
        return parse_grid(self.snr_db, "snr_db")[1]

    def n_grid(self) -> List[int]:
        return [int(n) for n in parse_grid(self.n_values, "n_values")[1]]

    def gamma_th(self) -> float:
        return db_to_linear(self.gamma_th_db)

    def modulation_scheme(self) -> ModulationScheme:
        return ModulationScheme.named(self.modulation)

    def geometry(self) -> Optional[RrsGeometry]:
        if self.rows is None:
            return None
        return RrsGeometry.tiled(
            self.rows, self.cols, self.d0, self.dx, self.dy, self.wavelength, self.alpha_f,
        )

    def link(self, n: Optional[int] = None, gamma_bar: float = 1.0) -> RrsLink:
        """
        Link with n elements (config `elements` by default).

        With a geometry, the n elements of largest near-field gain are used.
        """
        n = n or self.elements
        params = self.fading_params()
        geometry = self.geometry()
        if geometry is None:
            return RrsLink.identical(params, n, self.gain, gamma_bar)
        if n > geometry.size:
            raise ConfigError(f"elements: {n} exceeds the {geometry.size} elements of the geometry")
        gains = sorted(near_field_gains(geometry), reverse=True)[:n]
        return RrsLink((params,) * n, tuple(gains), gamma_bar)

    def provenance(self) -> Dict[str, Any]:
        return self.model_dump(exclude=_RUNTIME_KEYS)

    def output_dir(self) -> Path:
        return Path(self.out)


def build_config(values: Dict[str, Any]) -> ExperimentConfig:
    """
    Validate merged values into an ExperimentConfig.

    Raises:
        ConfigError: naming the first offending key
    """
    ok, unknown, error = check_unknown_keys(values.keys(), ExperimentConfig.model_fields.keys())
    if not ok:
        raise ConfigError(error)
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        message = first["msg"].removeprefix("Value error, ")
        raise ConfigError(f"{location}: {message}" if location else message) from e


def load_config(path: Optional[str], overrides: Dict[str, Any]) -> ExperimentConfig:
    """
    Read a key=value file (optional) and apply flag overrides on top.

    Args:
        path: Config file path or None
        overrides: Values from flags; None entries are ignored

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: for unreadable files, syntax errors or invalid values
    """
    values: Dict[str, Any] = {}
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"config: cannot read {path}: {e}") from e
        ok, parsed, error = parse_key_value_text(text)
        if not ok:
            raise ConfigError(f"config {path}: {error}")
        values.update(parsed)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(values)


def emit_table(
    config: ExperimentConfig,
    name: str,
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    plot: Optional[Dict[str, Any]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write `<out>/<name>.csv` and, with --plot, `<out>/<name>.svg`.

    Args:
        config: Run configuration (provenance and output directory)
        name: Table name
        columns: Column names; the first is the abscissa of the plot
        rows: Table rows
        plot: Options for plot_table (series columns, labels, log axes)
        extra: Additional provenance entries

    Returns:
        Path of the CSV
    """
    provenance = config.provenance()
    provenance["table"] = name
    if extra:
        provenance.update(extra)
    path = write_csv(config.output_dir() / f"{name}.csv", columns, rows, provenance)
    if config.plot and plot is not None and rows:
        table = {c: [row[i] for row in rows] for i, c in enumerate(columns)}
        x_column = plot.get("x", columns[0])
        series = {c: table[c] for c in plot.get("series", columns[1:]) if c in table}
        plot_table(
            config.output_dir() / f"{name}.svg",
            table[x_column],
            series,
            x_label=plot.get("x_label", x_column),
            y_label=plot.get("y_label", ""),
            title=plot.get("title", name),
            log_x=plot.get("log_x", False),
            log_y=plot.get("log_y", False),
        )
    return path
