"""
``benchmark``: mixing sweep over planted partitions, or a q sweep on one graph.
"""

import logging

from bench import mixing_sweep, q_sweep
from cli.common import (
    ID_BASES,
    add_input_arguments,
    add_solver_arguments,
    config_from_args,
    float_list,
    int_list,
    require_same_size,
)
from graph import read_edge_list
from utils.export_utils import export_rows, report_to_json, write_text
from utils.label_utils import read_labels

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("benchmark", help="Benchmark ARPPG against Louvain")
    parser.add_argument("--input", help="Edge list for a q sweep; omit for the planted mixing sweep")
    parser.add_argument("--truth", help="Ground-truth labels for the q sweep")
    parser.add_argument("--qs", type=int_list, default=[2, 3, 4], help="Values of q for the q sweep")
    parser.add_argument("--sizes", type=int_list, default=[250, 250, 250, 250], help="Planted community sizes")
    parser.add_argument("--avg-degree", type=float, default=20.0, help="Planted mean degree")
    parser.add_argument("--mixings", type=float_list, default=[0.1, 0.2, 0.3], help="Mixing values to sweep")
    parser.add_argument("--seeds", type=int_list, default=[0, 1, 2, 3, 4], help="Generator seeds")
    parser.add_argument("--louvain-seeds", type=int, default=1, help="Louvain runs per instance (best kept)")
    parser.add_argument("--output", help="Table path, .csv or .xlsx (default: JSON on standard output)")
    add_input_arguments(parser)
    add_solver_arguments(parser)
    parser.set_defaults(handler=cmd_benchmark)
    return parser


def cmd_benchmark(args):
    if args.input:
        graph = read_edge_list(args.input, one_based=ID_BASES[args.id_base])
        truth = None
        if args.truth:
            truth = read_labels(args.truth)
            require_same_size(truth, graph, f"truth file {args.truth} against graph")
        config = config_from_args(args, min(args.qs))
        rows = q_sweep(graph, args.qs, config, truth, louvain_seeds=range(args.seed, args.seed + args.louvain_seeds))
        sheet_name = "QSweep"
    else:
        config = config_from_args(args, len(args.sizes))
        rows = mixing_sweep(args.sizes, args.avg_degree, args.mixings, args.seeds, config, args.louvain_seeds)
        sheet_name = "MixingSweep"

    if args.output:
        export_rows(args.output, rows, sheet_name=sheet_name)
    else:
        write_text(None, report_to_json(rows))
    return rows
