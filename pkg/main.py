"""
Main entry point for the fading-channel numerics command line.
Parses flags, resolves the experiment configuration and dispatches a mode.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from config import settings
from cli.commands import ber, cdf, outage, pdf, reproduce, sweep, validate
from cli.experiment import CLI_METHODS, MODES, load_config
from utils.error_handler import ConfigError, exit_code_for

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=getattr(logging, settings.LOG_LEVEL)
)
logger = logging.getLogger(__name__)

COMMANDS = {
    "pdf": pdf.run,
    "cdf": cdf.run,
    "outage": outage.run,
    "ber": ber.run,
    "sweep-n": sweep.run,
    "validate": validate.run,
    "reproduce": reproduce.run,
}

# flag dest -> config key
_FLAG_KEYS = {
    "alpha": "alpha", "eta": "eta", "kappa": "kappa", "mu": "mu", "p": "p", "q": "q",
    "rhat": "r_hat", "elements": "elements", "gain": "gain", "grid": "grid",
    "snr_db": "snr_db", "n_values": "n_values", "gamma_th_db": "gamma_th_db",
    "modulation": "modulation", "n_terms": "n_terms", "method": "method",
    "samples": "samples", "seed": "seed", "workers": "workers", "out": "out",
    "debug_dump": "debug_dump",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrs-fading",
        description="Envelope statistics, outage and bit-error rate of reflecting-surface links "
                    "over alpha-eta-kappa-mu fading",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("figure", nargs="?", help="recipe name for reproduce (fig2 ... fig6)")
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--plot", action="store_true", default=None, help="also write an SVG per table")

    fading = parser.add_argument_group("fading")
    for name in ("alpha", "eta", "kappa", "mu", "p", "q", "rhat"):
        fading.add_argument(f"--{name}", type=float)

    link = parser.add_argument_group("link")
    link.add_argument("--elements", type=int)
    link.add_argument("--gain", type=float)

    grids = parser.add_argument_group("grids")
    grids.add_argument("--grid", help="envelope grid, start:stop:step or comma list")
    grids.add_argument("--snr-db", help="mean SNR grid in dB")
    grids.add_argument("--n-values", help="element counts for sweep-n")
    grids.add_argument("--gamma-th-db", type=float)
    grids.add_argument("--modulation")
    grids.add_argument("--n-terms", type=int)

    runtime = parser.add_argument_group("runtime")
    runtime.add_argument("--method", choices=CLI_METHODS)
    runtime.add_argument("--samples", help="Monte Carlo sample count (1e7 accepted)")
    runtime.add_argument("--seed", type=int)
    runtime.add_argument("--workers", type=int)
    runtime.add_argument("--out")
    runtime.add_argument("--debug-dump", help="write the Fox-H integrand dump of the first grid point here")
    return parser


def overrides_from(args: argparse.Namespace) -> Dict[str, Any]:
    values: Dict[str, Any] = {"mode": args.mode, "figure": args.figure, "plot": args.plot}
    for dest, key in _FLAG_KEYS.items():
        values[key] = getattr(args, dest)
    return values


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command.

    Args:
        argv: Arguments without the program name (sys.argv by default)

    Returns:
        Exit status: 0 success, 2 config error, 3 numerical failure,
        4 acceptance failure
    """
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, overrides_from(args))
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    logger.info(f"Running {config.mode} (seed={config.seed}, method={config.method}, out={config.out})")
    return COMMANDS[config.mode](config)


if __name__ == "__main__":
    sys.exit(main())
