"""
``generate``: write a synthetic graph and its ground truth.
"""

import logging
from pathlib import Path

from bench import IdealGraphSpec, PlantedPartitionSpec, ideal_graph, planted_partition, realized_mixing
from cli.common import int_list
from exceptions import InfeasibleSpecError
from graph import format_edge_list
from utils.export_utils import write_text
from utils.label_utils import format_labels

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("generate", help="Generate an ideal or planted-partition graph")
    parser.add_argument("--kind", choices=["ideal", "planted"], required=True, help="Generator")
    parser.add_argument("--sizes", type=int_list, required=True, help="Community sizes, e.g. 5,6,7")
    parser.add_argument("--avg-degree", type=float, default=20.0, help="Target mean degree (planted)")
    parser.add_argument("--mixing", type=float, default=0.1, help="Target mixing parameter (planted)")
    parser.add_argument("--seed", type=int, default=0, help="Random seed (planted)")
    parser.add_argument("--out-prefix", required=True, help="Writes <prefix>.edges and <prefix>.truth")
    parser.set_defaults(handler=cmd_generate)
    return parser


def cmd_generate(args):
    """Write ``<prefix>.edges`` (0-based ids) and ``<prefix>.truth``."""
    if args.kind == "ideal":
        graph, truth = ideal_graph(IdealGraphSpec(tuple(args.sizes)))
    else:
        spec = PlantedPartitionSpec(tuple(args.sizes), args.avg_degree, args.mixing, args.seed)
        graph, truth = planted_partition(spec)
        logger.info(f"Realized mixing {realized_mixing(graph, truth):.4f}")
    if graph.m == 0:
        raise InfeasibleSpecError("generated graph has no edges; raise --avg-degree")

    isolated = int((graph.degree == 0).sum())
    if isolated:
        logger.warning(f"{isolated} isolated nodes are absent from the edge list; read it with --id-base 0")

    prefix = Path(args.out_prefix)
    edges_path = prefix.with_name(prefix.name + ".edges")
    truth_path = prefix.with_name(prefix.name + ".truth")
    write_text(edges_path, format_edge_list(graph))
    write_text(truth_path, format_labels(truth))
    logger.info(f"Generated n={graph.n}, m={graph.m} into {edges_path} and {truth_path}")
    return edges_path, truth_path
