"""
pdf command: envelope or sum-channel density on a grid.
"""

from pathlib import Path
import logging

import numpy as np

from cli.experiment import ExperimentConfig, emit_table
from numerics.foxh import EvaluationTrace, dump_integrand, plan_contour
from services.channel_service import FadingChannel
from services.metrics_service import monte_carlo_engine
from services.rrs_service import EXACT_MAX_ELEMENTS, SumChannel
from utils.error_handler import ConfigError, handle_command_errors

logger = logging.getLogger(__name__)


def _write_debug_dump(config: ExperimentConfig, channel: FadingChannel, x: float) -> None:
    integrand = channel.kernel_integrand(x ** channel.params.alpha)
    plan = plan_contour(integrand)
    trace = EvaluationTrace()
    channel.pdf_exact(x, trace=trace)
    Path(config.debug_dump).write_text(dump_integrand(integrand, plan, trace) + "\n", encoding="utf-8")
    logger.info(f"Wrote integrand dump for x={x:g} to {config.debug_dump}")


def _single_element(config: ExperimentConfig, xs: np.ndarray) -> None:
    channel = FadingChannel.for_params(config.fading_params())
    g = config.gain
    columns = ["x"]
    values = {}
    if config.method in ("auto", "exact"):
        values["pdf_exact"] = [channel.pdf_exact(v / g) / g if v > 0 else 0.0 for v in xs]
    if config.method == "auto":
        values["pdf_oracle"] = channel.pdf_oracle(xs / g) / g
    if config.method in ("auto", "series"):
        values[f"pdf_series_n{config.n_terms}"] = [
            channel.pdf_series(v / g, config.n_terms) / g for v in xs
        ]
    if config.method == "auto":
        values["pdf_asymptotic"] = [channel.pdf_asymptotic(v / g) / g if v > 0 else 0.0 for v in xs]
    if config.method == "laplace":
        values["pdf_laplace"] = SumChannel(config.link(1)).pdf_laplace(xs)
    columns += list(values)
    rows = [[x] + [values[c][i] for c in columns[1:]] for i, x in enumerate(xs)]
    emit_table(config, "pdf", columns, rows, plot={"y_label": "density"})
    if config.debug_dump:
        positive = xs[xs > 0]
        if positive.size:
            _write_debug_dump(config, channel, float(positive[0] / g))


def _sum_channel(config: ExperimentConfig, xs: np.ndarray) -> None:
    link = config.link()
    sum_channel = SumChannel(link)
    method = config.method
    if method == "auto":
        method = "exact" if link.size <= EXACT_MAX_ELEMENTS else "laplace"
    if method == "exact":
        values = sum_channel.pdf_exact(xs)
    elif method == "series":
        values = sum_channel.pdf_series(xs, config.n_terms)
    else:
        values = sum_channel.pdf_laplace(xs)
    column = "pdf_series" if method == "series" else f"pdf_{method}"
    emit_table(
        config, "pdf", ["x", column], [[x, v] for x, v in zip(xs, values)],
        plot={"y_label": "density"}, extra={"elements": link.size},
    )


def _histogram(config: ExperimentConfig) -> None:
    link = config.link()
    engine = monte_carlo_engine(link, config.seed, config.workers)
    hist = engine.histogram(config.samples)
    rows = [
        [a, b, d, s]
        for a, b, d, s in zip(hist.edges[:-1], hist.edges[1:], hist.density, hist.stderr)
    ]
    emit_table(
        config, "pdf_mc", ["bin_left", "bin_right", "density", "stderr"], rows,
        plot={"series": ["density"], "y_label": "density"},
        extra={"total": hist.total, "below": hist.below, "above": hist.above, "stream": engine.stream_id},
    )


@handle_command_errors
def run(config: ExperimentConfig) -> int:
    """
    Write pdf.csv (analytic paths) or pdf_mc.csv (histogram with --method mc).

    Args:
        config: Run configuration

    Returns:
        Exit status
    """
    xs = config.x_grid()
    single = config.elements == 1 and config.geometry() is None
    logger.info(f"pdf: {len(xs)} points, method {config.method}, {'single element' if single else 'sum channel'}")
    if config.method == "mc":
        _histogram(config)
    elif single:
        _single_element(config, xs)
    else:
        if config.method == "series" and config.link().size > 2:
            raise ConfigError("method: series supports at most two elements")
        _sum_channel(config, xs)
    return 0
