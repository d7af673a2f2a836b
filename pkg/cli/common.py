"""
Argument helpers shared by the subcommands.
"""

import argparse

from exceptions import LabelFileError
from models import SolverConfig

ID_BASES = {"auto": None, "0": False, "1": True}


def int_list(text):
    try:
        values = [int(token) for token in text.split(",") if token.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def float_list(text):
    try:
        values = [float(token) for token in text.split(",") if token.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def add_input_arguments(parser):
    parser.add_argument(
        "--id-base",
        choices=sorted(ID_BASES),
        default="auto",
        help="Node ids: 'auto' remaps labels densely, '0'/'1' reads them as positional ids",
    )


def add_solver_arguments(parser):
    group = parser.add_argument_group("solver")
    group.add_argument("--lambda0", type=float, default=0.05, help="Initial sparsity weight")
    group.add_argument("--lambda-growth", type=float, default=1.5, help="Factor applied to lambda each round")
    group.add_argument("--mu-scale", type=float, default=1.0, help="Step size as a fraction of 1/L")
    group.add_argument("--sigma", type=float, default=1e-4, help="Safeguard sufficient-decrease constant")
    group.add_argument("--beta", type=float, default=0.5, help="Safeguard backtracking factor")
    group.add_argument("--safeguard-n", type=int, default=5, help="Iterations between safeguard checks")
    group.add_argument("--max-iter", type=int, default=2000, help="Outer iterations per lambda round")
    group.add_argument("--max-rounds", type=int, default=20, help="Maximum lambda rounds")
    group.add_argument("--tol", type=float, default=None, help="Stationarity tolerance (default 1e-6*sqrt(nq))")
    group.add_argument("--seed", type=int, default=0, help="Random seed")
    group.add_argument("--restarts", type=int, default=1, help="Independent starts; the best objective wins")
    group.add_argument("--workers", type=int, default=1, help="Threads used for restarts")
    group.add_argument("--check-feasibility", action="store_true", help="Verify feasibility every iteration")


def config_from_args(args, q):
    """Build a SolverConfig from parsed solver flags; raises ConfigError on bad values."""
    return SolverConfig(
        q=q,
        lambda0=args.lambda0,
        lambda_growth=args.lambda_growth,
        mu_scale=args.mu_scale,
        sigma=args.sigma,
        beta=args.beta,
        safeguard_period=args.safeguard_n,
        max_outer_iter=args.max_iter,
        max_continuation_rounds=args.max_rounds,
        grad_tol=args.tol,
        seed=args.seed,
        restarts=args.restarts,
        workers=args.workers,
        check_feasibility=args.check_feasibility,
    )


def require_same_size(first, second, what):
    if first.n != second.n:
        raise LabelFileError(f"{what}: {first.n} labels against {second.n}")
