"""
Static SVG line charts of output tables.
"""

from pathlib import Path
from typing import Optional, Sequence
import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

# stable SVG element ids
plt.rcParams["svg.hashsalt"] = "rrs-fading"


def plot_table(
    path: Path,
    x: Sequence[float],
    series: dict,
    x_label: str,
    y_label: str,
    title: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> Optional[Path]:
    """
    Draw one line per series against x and save as SVG.

    Args:
        path: Destination .svg file
        x: Abscissa values
        series: Mapping of legend label to y values
        x_label: Axis label
        y_label: Axis label
        title: Chart title
        log_x: Logarithmic x axis
        log_y: Logarithmic y axis; non-positive values are masked

    Returns:
        The written path, or None when nothing is drawable
    """
    x = np.asarray(x, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    drawn = 0
    for label, values in series.items():
        y = np.asarray(values, dtype=float)
        if log_y:
            y = np.where(y > 0.0, y, np.nan)
        if not np.any(np.isfinite(y)):
            continue
        style = "o" if label.endswith("mc") else "-"
        ax.plot(x, y, style, markersize=3, label=label)
        drawn += 1
    if drawn == 0:
        plt.close(fig)
        logger.warning(f"No drawable series for {path}")
        return None

    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    fig.savefig(tmp, format="svg", metadata={"Date": None})
    plt.close(fig)
    os.replace(tmp, path)
    logger.info(f"Wrote {path}")
    return path
