"""
outage command: outage probability against mean SNR.
"""

import logging

from cli.experiment import ExperimentConfig, emit_table
from models.metrics import SnrPoint, db_to_linear
from services.metrics_service import monte_carlo_engine, outage_multi, outage_multi_asymptotic
from services.montecarlo_service import OutageReducer
from utils.error_handler import ConfigError, handle_command_errors

logger = logging.getLogger(__name__)


@handle_command_errors
def run(config: ExperimentConfig) -> int:
    """
    Write outage.csv with columns snr_db, outage, method, stderr, asymptotic.

    With --method mc every SNR point is read from one sample pass.
    """
    if config.method == "series":
        raise ConfigError("method: series is not available for the outage command")
    link = config.link()
    snr_db = config.snr_grid_db()
    points = [SnrPoint(db_to_linear(v), config.gamma_th()) for v in snr_db]
    logger.info(f"outage: {link.size} element(s), {len(points)} SNR points, method {config.method}")

    if config.method == "mc":
        engine = monte_carlo_engine(link, config.seed, config.workers)
        estimates = engine.run(config.samples, OutageReducer([pt.envelope_threshold() for pt in points]))
        results = [(p, "mc", se) for p, se in estimates]
    else:
        results = []
        for pt in points:
            r = outage_multi(link, pt, method=config.method)
            results.append((r.value, r.method, r.stderr))

    rows = []
    for v, pt, (value, method, se) in zip(snr_db, points, results):
        rows.append([v, value, method, se, outage_multi_asymptotic(link, pt)])
    emit_table(
        config, "outage", ["snr_db", "outage", "method", "stderr", "asymptotic"], rows,
        plot={"series": ["outage", "asymptotic"], "x_label": "mean SNR (dB)",
              "y_label": "outage probability", "log_y": True},
        extra={"elements": link.size},
    )
    return 0
