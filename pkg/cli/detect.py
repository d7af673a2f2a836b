"""
``detect``: run the detection pipeline on an edge list and emit a run report.
"""

import logging

from cli.common import ID_BASES, add_input_arguments, add_solver_arguments, config_from_args, require_same_size
from graph import ModularityOperator, read_edge_list
from metrics import ami, nmi
from models import RunReport
from solver import continuation
from utils.export_utils import report_to_json, report_to_tsv, validate_report, write_text
from utils.label_utils import read_labels, write_labels, write_remap_table

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("detect", help="Detect communities in an edge list")
    parser.add_argument("--input", required=True, help="Edge-list file")
    parser.add_argument("--q", type=int, required=True, help="Number of communities")
    parser.add_argument("--truth", help="Ground-truth label file for NMI/AMI")
    parser.add_argument("--output", help="Report path (default: standard output)")
    parser.add_argument("--format", choices=["json", "tsv"], default="json", help="Report format")
    parser.add_argument("--remap-out", help="Write the original-label to internal-id table here")
    parser.add_argument("--labels-out", help="Write the detected labels here, one per line in internal-id order")
    add_input_arguments(parser)
    add_solver_arguments(parser)
    parser.set_defaults(handler=cmd_detect)
    return parser


def build_report(args, graph, config, result, truth=None):
    """Assemble the RunReport of one detect run."""
    labels = result.partition.labels.tolist()
    report = RunReport(
        config=config.to_dict(),
        graph={
            "input": str(args.input),
            "n": graph.n,
            "m": graph.m,
            "self_loops_dropped": graph.self_loops_dropped,
            "duplicates_dropped": graph.duplicates_dropped,
        },
        partition={label: int(community) for label, community in zip(graph.labels, labels)},
        n_communities=result.n_communities,
        modularity=float(result.modularity),
        lambda_path=[float(value) for value in result.lambda_path],
        objective_trace=[float(value) for value in result.objective_trace],
        iterations=int(result.iterations),
        wall_time=float(result.wall_time),
        events={
            "safeguard_activations": int(result.safeguard_activations),
            "momentum_resets": int(result.momentum_resets),
            "restart_index": int(result.restart_index),
        },
        row_dominance=float(result.row_dominance),
    )
    if truth is not None:
        report.nmi = nmi(result.partition, truth)
        report.ami = ami(result.partition, truth)
    return report


def cmd_detect(args):
    """Run detection; returns the RunReport and writes it to --output or standard output."""
    graph = read_edge_list(args.input, one_based=ID_BASES[args.id_base])
    config = config_from_args(args, args.q)
    truth = None
    if args.truth:
        truth = read_labels(args.truth)
        require_same_size(truth, graph, f"truth file {args.truth} against graph")

    if args.remap_out:
        write_remap_table(args.remap_out, graph)

    result = continuation(ModularityOperator.from_graph(graph), config)
    report = build_report(args, graph, config, result, truth)
    if truth is not None:
        logger.info(f"NMI={report.nmi:.4f}, AMI={report.ami:.4f}")

    # Write outputs
    data = report.to_dict()
    validate_report(data)
    text = report_to_json(data) if args.format == "json" else report_to_tsv(data["partition"])
    write_text(args.output, text)
    if args.labels_out:
        write_labels(args.labels_out, result.partition)
    return report
