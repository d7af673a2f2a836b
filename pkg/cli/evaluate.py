"""
``eval``: compare a predicted labeling with the ground truth.
"""

import logging

from cli.common import ID_BASES, add_input_arguments, require_same_size
from graph import modularity_score, read_edge_list
from metrics import ami, nmi
from utils.export_utils import report_to_json, write_text
from utils.label_utils import read_labels

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("eval", help="Score predicted labels against ground truth")
    parser.add_argument("--pred", required=True, help="Predicted label file")
    parser.add_argument("--truth", required=True, help="Ground-truth label file")
    parser.add_argument("--graph", help="Edge list; adds the modularity of the prediction")
    parser.add_argument("--output", help="Output path (default: standard output)")
    add_input_arguments(parser)
    parser.set_defaults(handler=cmd_eval)
    return parser


def cmd_eval(args):
    pred = read_labels(args.pred)
    truth = read_labels(args.truth)
    require_same_size(pred, truth, f"{args.pred} against {args.truth}")

    scores = {
        "n": pred.n,
        "n_communities_pred": pred.n_communities,
        "n_communities_truth": truth.n_communities,
        "nmi": nmi(pred, truth),
        "ami": ami(pred, truth),
    }
    if args.graph:
        graph = read_edge_list(args.graph, one_based=ID_BASES[args.id_base])
        require_same_size(pred, graph, f"{args.pred} against graph {args.graph}")
        scores["modularity"] = modularity_score(graph, pred)

    logger.info(f"NMI={scores['nmi']:.4f}, AMI={scores['ami']:.4f}")
    write_text(args.output, report_to_json(scores))
    return scores
