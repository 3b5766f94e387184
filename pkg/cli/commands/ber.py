"""
ber command: average bit-error rate against mean SNR.
"""

import logging

from cli.experiment import ExperimentConfig, emit_table
from models.metrics import db_to_linear
from services.metrics_service import ber_multi, monte_carlo_engine
from services.montecarlo_service import BerReducer
from utils.error_handler import ConfigError, handle_command_errors

logger = logging.getLogger(__name__)


@handle_command_errors
def run(config: ExperimentConfig) -> int:
    """Write ber.csv with columns snr_db, ber, method, stderr."""
    if config.method == "series":
        raise ConfigError("method: series is not available for the ber command")
    link = config.link()
    mod = config.modulation_scheme()
    snr_db = config.snr_grid_db()
    gamma_bars = [db_to_linear(v) for v in snr_db]
    logger.info(f"ber: {link.size} element(s), {mod.name}, {len(gamma_bars)} SNR points")

    if config.method == "mc":
        engine = monte_carlo_engine(link, config.seed, config.workers)
        results = [(p, "mc", se) for p, se in engine.run(config.samples, BerReducer(gamma_bars, mod))]
    else:
        results = []
        for gamma_bar in gamma_bars:
            r = ber_multi(link, gamma_bar, mod, method=config.method)
            results.append((r.value, r.method, r.stderr))

    rows = [[v, value, method, se] for v, (value, method, se) in zip(snr_db, results)]
    emit_table(
        config, "ber", ["snr_db", "ber", "method", "stderr"], rows,
        plot={"series": ["ber"], "x_label": "mean SNR (dB)", "y_label": "average BER", "log_y": True},
        extra={"elements": link.size, "modulation": mod.name},
    )
    return 0
