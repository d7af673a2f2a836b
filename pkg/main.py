#!/usr/bin/env python3
"""
Sparse modularity community detection

Command-line entry point: configures logging, then dispatches to the subcommands in
the ``cli`` package. Logs go to standard error; reports go to standard output or
the path given by ``--output``.
"""

import logging
import sys

from cli import build_parser, run

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def configure_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def main(argv=None):
    """Parse ``argv`` and run the chosen subcommand.

    Returns:
        int: Exit code, 0 on success, 2 on input errors, 3 on solver failures
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    logger.debug(f"Running '{args.command}'")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
