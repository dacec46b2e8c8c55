#!/usr/bin/env python3
"""
Resilient Clustering - Command Line Launcher
Exact clustering of perturbation-resilient instances, with oracle checks and probes.

JSON results go to stdout (or --output); logs go to stderr.
"""

import argparse
import logging
import sys

from pydantic import ValidationError

from src.cli.runner import COMMANDS, EXIT_ERROR, RunConfig, run
from src.config import get_settings

logger = logging.getLogger("launcher")


class LauncherArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with 1; exit code 2 is reserved for failed metric validation."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"❌ {self.prog}: {message}\n")
        sys.exit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = LauncherArgumentParser(
        description="Resilient Clustering - exact k-clustering via spanning-tree dynamic programming",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python launcher.py cluster --input data/line4.csv --input-kind matrix --objective kmedian --k 2
  python launcher.py oracle --input data/line4_points.csv --input-kind points --k 2
  python launcher.py probe --input data/line4.csv --k 2 --alpha 2 --trials 100 --seed 1
  python launcher.py generate --n 12 --k 3 --margin 4 --seed 42 --matrix-out planted.csv
  python launcher.py validate --input data/line4.csv
  python launcher.py baseline --input data/line4.csv --k 2
        """
    )

    parser.add_argument('command', choices=COMMANDS, help='What to run')
    parser.add_argument('--input', type=str, metavar='PATH',
                        help='Points CSV (header x1..xd) or distance-matrix CSV')
    parser.add_argument('--input-kind', choices=['points', 'matrix'], default='matrix',
                        help='How to read --input (default: matrix)')
    parser.add_argument('--norm', choices=['euclidean', 'manhattan'], default='euclidean',
                        help='Norm for points input (default: euclidean)')
    parser.add_argument('--objective', default='kmedian',
                        help='kmedian, kmeans, kcenter or facility_location')
    parser.add_argument('--facility-costs', type=str, metavar='PATH',
                        help='Opening costs, one per line (facility_location)')
    parser.add_argument('--k', type=int, help='Number of clusters')
    parser.add_argument('--alpha', type=float, default=2.0, help='Perturbation / proximity factor (default: 2)')
    parser.add_argument('--seed', type=int, default=0, help='Seed for probe and generate (default: 0)')
    parser.add_argument('--trials', type=int, default=100, help='Probe trials (default: 100)')
    parser.add_argument('--eps', type=float, help='Triangle-inequality tolerance (default: RC_EPS)')
    parser.add_argument('--output', type=str, metavar='PATH', help='Write JSON here instead of stdout')
    parser.add_argument('--root', type=int, default=0, help='Root of the spanning tree for the DP (default: 0)')
    parser.add_argument('--n', type=int, help='Number of points to generate')
    parser.add_argument('--margin', type=float, default=4.0, help='Generator separation margin, > 2 (default: 4)')
    parser.add_argument('--spread', type=float, default=1.0, help='Generator cluster radius (default: 1)')
    parser.add_argument('--dim', type=int, default=1, help='Generator dimension (default: 1)')
    parser.add_argument('--shrink-fraction', type=float, default=0.5,
                        help='Share of pairs shrunk per probe trial (default: 0.5)')
    parser.add_argument('--matrix-out', type=str, metavar='PATH', help='Where generate writes the matrix CSV')
    parser.add_argument('--edges-out', type=str, metavar='PATH',
                        help='Where cluster dumps the spanning tree edges (i,j,weight)')
    parser.add_argument('--log-level', help='Logging level (default: RC_LOG_LEVEL or WARNING)')
    parser.add_argument('--progress', action='store_true', help='Show a progress bar while probing')
    return parser


def main(argv=None) -> int:
    """Main launcher function."""
    args = build_parser().parse_args(argv)
    settings = get_settings()

    logging.basicConfig(
        stream=sys.stderr,
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    options = {key: value for key, value in vars(args).items() if key != 'log_level' and value is not None}
    options.setdefault('eps', settings.eps)
    try:
        config = RunConfig(**options)
    except ValidationError as e:
        logger.error("❌ Invalid arguments: %s", e)
        return EXIT_ERROR

    try:
        status = run(config)
    except OSError as e:
        logger.error("❌ Could not write output: %s", e)
        return EXIT_ERROR

    if status == 0:
        logger.info("✅ %s finished", config.command)
    elif status == 2:
        logger.warning("⚠️  %s: input failed validation", config.command)
    else:
        logger.error("❌ %s failed", config.command)
    return status


if __name__ == "__main__":
    sys.exit(main())
