"""
Pass/fail checks shared by the validate and reproduce commands.
"""

from dataclasses import dataclass
from typing import List, Sequence
import logging

import numpy as np

from cli.experiment import ExperimentConfig, emit_table
from utils.error_handler import AcceptanceFailure

logger = logging.getLogger(__name__)


@dataclass
class Check:
    name: str
    passed: bool
    measured: str = ""
    expected: str = ""

    @classmethod
    def within(cls, name: str, measured: float, lower: float, upper: float) -> "Check":
        return cls(name, bool(lower <= measured <= upper), f"{measured:.6g}", f"[{lower:.6g}, {upper:.6g}]")

    @classmethod
    def at_most(cls, name: str, measured: float, limit: float) -> "Check":
        return cls(name, bool(measured <= limit), f"{measured:.6g}", f"<= {limit:.6g}")


def histogram_agreement(name: str, density, stderr, expected, total: int, widths) -> Check:
    """
    Per-bin agreement of a histogram with expected bin averages.

    Passes when at least 98% of bins lie within 3 standard errors and none
    beyond 5; empty bins use the one-count error 1 / (total width).
    """
    density = np.asarray(density, dtype=float)
    floor = 1.0 / (total * np.asarray(widths, dtype=float))
    se = np.maximum(np.asarray(stderr, dtype=float), floor)
    z = np.abs(density - np.asarray(expected, dtype=float)) / se
    inside = float(np.mean(z <= 3.0))
    worst = float(np.max(z))
    return Check(
        name,
        bool(inside >= 0.98 and worst <= 5.0),
        f"{100 * inside:.1f}% within 3 SE, worst {worst:.2f} SE",
        ">= 98% within 3 SE, none beyond 5 SE",
    )


def report(config: ExperimentConfig, table_name: str, checks: Sequence[Check]) -> int:
    """
    Print the pass/fail table, write it as CSV and fail on any miss.

    Raises:
        AcceptanceFailure: when any check failed
    """
    rows: List[list] = [[c.name, "pass" if c.passed else "FAIL", c.measured, c.expected] for c in checks]
    width = max(len(c.name) for c in checks)
    print(f"{'check':<{width}}  result  measured / expected")
    for c in checks:
        print(f"{c.name:<{width}}  {'pass' if c.passed else 'FAIL':<6}  {c.measured} / {c.expected}")
    emit_table(config, table_name, ["check", "result", "measured", "expected"], rows)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise AcceptanceFailure(f"{len(failed)} of {len(checks)} checks failed: {', '.join(failed)}")
    logger.info(f"All {len(checks)} checks passed")
    return 0
