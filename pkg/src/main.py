import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src to Python path for imports
sys.path.append(str(Path(__file__).parent))

from api import cli_api
from config import load_settings

logger = logging.getLogger(__name__)


def configure_logging(level: str, log_file: Optional[str]) -> None:
    # Standard output carries results, so log records go to standard error
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _add_query_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dist", required=True,
                        help='letter probabilities as exact rationals, e.g. "1/2,1/3,1/6"')
    parser.add_argument("--runs", required=True,
                        help='run length: "3" for every letter or "3,2,4" per letter')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="runwait",
        description="Exact waiting-time moments for runs of equal letters in random words",
    )
    parser.add_argument("--log-level", default=None, help="logging level (default WARNING)")
    parser.add_argument("--log-file", default=None, help="also write log records to this file")
    parser.add_argument("--threads", type=int, default=1, help="worker threads where supported")
    parser.add_argument("--allow-large", action="store_true",
                        help="lift the alphabet size guards")
    commands = parser.add_subparsers(dest="command", required=True)

    moments = commands.add_parser("moments", help="expectation/variance of B_j on one route")
    _add_query_flags(moments)
    moments.add_argument("--j", type=int, default=1, help="number of distinct letters (default 1)")
    moments.add_argument("--route", choices=sorted(cli_api.ROUTE_NAMES), default="chain")
    moments.add_argument("--tol", default="1/1000", help="tail route enclosure width")
    moments.add_argument("--n-cap", type=int, default=10 ** 9, help="tail route step cap")
    moments.add_argument("--trials", type=int, default=100_000, help="simulation trials")
    moments.add_argument("--seed", type=int, default=0, help="simulation seed (64-bit)")
    moments.add_argument("--format", choices=["json", "csv", "table"], default="json")
    moments.set_defaults(handler=cli_api.cmd_moments)

    crosscheck = commands.add_parser("crosscheck", help="compare all routes exactly")
    _add_query_flags(crosscheck)
    crosscheck.add_argument("--jmax", type=int, default=None, help="largest j to check (default r)")
    crosscheck.add_argument("--nmax", type=int, default=15, help="largest word length for CDF checks")
    crosscheck.add_argument("--format", choices=["json", "table"], default="table")
    crosscheck.add_argument("--inject-fault", default=None,
                            choices=["closed", "operator", "chain"], help=argparse.SUPPRESS)
    crosscheck.set_defaults(handler=cli_api.cmd_crosscheck)

    paradox = commands.add_parser("paradox-search", help="search dice reversing the 2-run/3-run order")
    paradox.add_argument("--r", type=int, default=6, help="number of faces")
    paradox.add_argument("--grid-denominator", type=int, required=True,
                         help="probabilities are multiples of 1/D")
    paradox.add_argument("--limit", type=int, default=1, help="maximum pairs to report")
    paradox.add_argument("--format", choices=["json", "csv", "table"], default="table")
    paradox.set_defaults(handler=cli_api.cmd_paradox_search)

    dump = commands.add_parser("chain-dump", help="list the run-detecting chain")
    _add_query_flags(dump)
    dump.add_argument("--j", type=int, default=1)
    dump.set_defaults(handler=cli_api.cmd_chain_dump)

    series = commands.add_parser("series", help="P{Y_n = 0} for n = 0..nmax")
    _add_query_flags(series)
    series.add_argument("--nmax", type=int, default=30)
    series.add_argument("--format", choices=["json", "csv"], default="csv")
    series.set_defaults(handler=cli_api.cmd_series)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = load_settings(
        log_level=args.log_level,
        log_file=args.log_file,
        allow_large=True if args.allow_large else None,
    )
    configure_logging(settings.log_level, settings.log_file)
    cli_api.configure(settings)
    logger.info(f"Running command {args.command}")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
