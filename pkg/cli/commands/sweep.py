"""
sweep-n command: outage and bit-error rate against the element count.
"""

import logging

from cli.experiment import ExperimentConfig, emit_table
from models.metrics import SnrPoint, db_to_linear
from services.metrics_service import ber_multi, monte_carlo_engine, outage_multi
from services.montecarlo_service import BerReducer, CompositeReducer, OutageReducer
from utils.error_handler import ConfigError, handle_command_errors

logger = logging.getLogger(__name__)

COLUMNS = ["n", "snr_db", "outage", "outage_method", "outage_stderr", "ber", "ber_method", "ber_stderr"]


def sweep_rows(config: ExperimentConfig, n_values, snr_db, method: str):
    """
    Rows of the element-count sweep.

    Monte Carlo runs draw one sample set per element count and evaluate every
    SNR point on it.
    """
    mod = config.modulation_scheme()
    points = [SnrPoint(db_to_linear(v), config.gamma_th()) for v in snr_db]
    rows = []
    for n in n_values:
        link = config.link(n)
        logger.info(f"sweep-n: N={n}, method {method}")
        if method == "mc":
            engine = monte_carlo_engine(link, config.seed, config.workers)
            reducer = CompositeReducer(
                OutageReducer([pt.envelope_threshold() for pt in points]),
                BerReducer([pt.gamma_bar for pt in points], mod),
            )
            outages, bers = engine.run(config.samples, reducer)
            for v, (po, so), (pb, sb) in zip(snr_db, outages, bers):
                rows.append([n, v, po, "mc", so, pb, "mc", sb])
            continue
        for v, pt in zip(snr_db, points):
            out = outage_multi(link, pt, method=method)
            ber = ber_multi(link, pt.gamma_bar, mod, method=method)
            rows.append([n, v, out.value, out.method, out.stderr, ber.value, ber.method, ber.stderr])
    return rows


@handle_command_errors
def run(config: ExperimentConfig) -> int:
    """Write sweep_n.csv."""
    if config.method == "series":
        raise ConfigError("method: series is not available for the sweep-n command")
    rows = sweep_rows(config, config.n_grid(), config.snr_grid_db(), config.method)
    emit_table(config, "sweep_n", COLUMNS, rows)
    return 0
