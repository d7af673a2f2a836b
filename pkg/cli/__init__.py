"""
Command-line surface: detect, eval, generate and benchmark.

Every subcommand registers a ``handler``; :func:`run` maps errors to exit codes
(0 success, 2 input or file error, 3 solver failure or a report that fails
its schema).
"""

import argparse
import logging
import sys

import jsonschema

from cli import benchmark, detect, evaluate, generate
from exceptions import InputError, SolverError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_SOLVER_ERROR = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stiefel-communities",
        description="Community detection by sparse modularity maximization on the Stiefel manifold",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log solver detail (DEBUG)")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in (detect, evaluate, generate, benchmark):
        module.add_parser(subparsers)
    return parser


def run(args):
    """Run the selected subcommand and return its exit code."""
    try:
        args.handler(args)
        return EXIT_OK
    except InputError as e:
        logger.error(f"Input error: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as e:
        logger.error(f"I/O error: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except SolverError as e:
        logger.error(f"Solver failure: {str(e)}", exc_info=True)
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    except jsonschema.ValidationError as e:
        logger.error(f"Report failed validation: {e.message}")
        print(f"invalid report: {e.message}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
