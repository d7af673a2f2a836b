"""
Real networks with ground-truth communities.

Karate comes with networkx. Other networks are read from ``data/<name>.gml`` (the
GML files with a per-node ``value`` attribute, e.g. football and polbooks), or from
``data/<name>.edges`` plus ``data/<name>.truth`` when no GML file exists.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Union

import networkx as nx
import numpy as np

from exceptions import InputError
from graph import from_networkx, read_edge_list
from models import Graph, Partition
from utils.label_utils import read_labels

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent / "data"
# members who sided with the officer after the split, 0-based; networkx files node 8 under Mr. Hi
KARATE_OFFICER = frozenset({8, 9, 14, 15, 18, 20, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33})
TRUTH_ATTRIBUTE = "value"


def karate_club() -> tuple[Graph, Partition]:
    """Zachary's karate club: 34 nodes, 78 edges, split into the two factions."""
    nx_graph = nx.karate_club_graph()
    graph = from_networkx(nx_graph)
    truth = Partition(np.array([int(node in KARATE_OFFICER) for node in nx_graph.nodes()]))
    return graph, truth


def data_files(name: str, data_dir: Union[str, Path] = DATA_DIR) -> tuple[Path, Path]:
    data_dir = Path(data_dir)
    return data_dir / f"{name}.edges", data_dir / f"{name}.truth"


def gml_file(name: str, data_dir: Union[str, Path] = DATA_DIR) -> Path:
    return Path(data_dir) / f"{name}.gml"


def has_network(name: str, data_dir: Union[str, Path] = DATA_DIR) -> bool:
    if name == "karate":
        return True
    return gml_file(name, data_dir).exists() or all(path.exists() for path in data_files(name, data_dir))


def _parse_gml(text: str) -> nx.Graph:
    try:
        return nx.parse_gml(text, label="id")
    except nx.NetworkXError as e:
        if "duplicated" not in str(e):
            raise
    # some published files repeat edges without declaring a multigraph
    logger.warning("GML file repeats edges; collapsing duplicates")
    multigraph = nx.parse_gml(re.sub(r"graph\s*\[", "graph [\n  multigraph 1", text, count=1), label="id")
    return nx.Graph(multigraph)


def read_gml_network(path: Union[str, Path]) -> tuple[Graph, Partition]:
    """Read a GML network whose nodes carry their community in ``value``.

    Integer values are kept in numeric order; text values (``l``/``n``/``c``) are
    numbered by first appearance.
    """
    path = Path(path)
    try:
        nx_graph = _parse_gml(path.read_text(encoding="utf-8"))
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise
    except nx.NetworkXError as e:
        raise InputError(f"{path}: {e}") from e

    values = []
    for node, attributes in nx_graph.nodes(data=True):
        if TRUTH_ATTRIBUTE not in attributes:
            raise InputError(f"{path}: node {node} has no '{TRUTH_ATTRIBUTE}' attribute")
        values.append(attributes[TRUTH_ATTRIBUTE])
    if all(isinstance(value, (int, np.integer)) for value in values):
        _, labels = np.unique(np.asarray(values), return_inverse=True)
    else:
        mapping: dict[str, int] = {}
        labels = np.array([mapping.setdefault(str(value), len(mapping)) for value in values])
    return from_networkx(nx_graph), Partition(labels)


def load_network(name: str, data_dir: Union[str, Path] = DATA_DIR) -> tuple[Graph, Partition]:
    """Load a named network and its ground truth.

    The truth file follows the internal node order of the parsed edge list.
    """
    if name == "karate":
        return karate_club()
    gml_path = gml_file(name, data_dir)
    if gml_path.exists():
        graph, truth = read_gml_network(gml_path)
    else:
        edges_path, truth_path = data_files(name, data_dir)
        if not edges_path.exists() or not truth_path.exists():
            raise InputError(f"Network '{name}' needs {gml_path}, or {edges_path} and {truth_path}")
        graph = read_edge_list(edges_path)
        truth = read_labels(truth_path, expected_n=graph.n)
    logger.info(f"Loaded {name}: n={graph.n}, m={graph.m}, {truth.n_communities} ground-truth communities")
    return graph, truth
