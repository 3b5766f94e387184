"""
cdf command: envelope or sum-channel distribution function on a grid.
"""

import logging

from cli.experiment import ExperimentConfig, emit_table
from services.channel_service import FadingChannel
from services.metrics_service import monte_carlo_engine
from services.montecarlo_service import OutageReducer
from services.rrs_service import EXACT_MAX_ELEMENTS, SumChannel
from utils.error_handler import ConfigError, handle_command_errors

logger = logging.getLogger(__name__)


@handle_command_errors
def run(config: ExperimentConfig) -> int:
    """
    Write cdf.csv.

    A single element gets the Fox-H CDF next to the oracle integral; a sum
    channel gets the exact or inverse-Laplace CDF; --method mc gives the
    empirical CDF with standard errors.
    """
    if config.method == "series":
        raise ConfigError("method: series is not available for the cdf command")
    xs = config.x_grid()
    link = config.link()

    if config.method == "mc":
        engine = monte_carlo_engine(link, config.seed, config.workers)
        estimates = engine.run(config.samples, OutageReducer(xs))
        rows = [[x, p, se] for x, (p, se) in zip(xs, estimates)]
        emit_table(config, "cdf", ["x", "cdf_mc", "stderr"], rows,
                   plot={"series": ["cdf_mc"], "y_label": "CDF"})
        return 0

    if link.size == 1 and config.method in ("auto", "exact"):
        channel = FadingChannel.for_params(link.elements[0])
        g = link.gains[0]
        rows = [[x, channel.cdf(x / g), channel.cdf_oracle(x / g)] for x in xs]
        emit_table(config, "cdf", ["x", "cdf", "cdf_oracle"], rows, plot={"y_label": "CDF"})
        return 0

    sum_channel = SumChannel(link)
    method = config.method
    if method == "auto":
        method = "exact" if link.size <= EXACT_MAX_ELEMENTS else "laplace"
    values = sum_channel.cdf_exact(xs) if method == "exact" else sum_channel.cdf_laplace(xs)
    emit_table(
        config, "cdf", ["x", f"cdf_{method}"], [[x, v] for x, v in zip(xs, values)],
        plot={"y_label": "CDF"}, extra={"elements": link.size},
    )
    return 0
