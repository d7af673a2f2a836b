"""
Graph ingestion and the implicit modularity operator.

M = A - d d^T / 2m is never materialized on the solver path: every product is one
sparse matvec plus a rank-one correction.
"""

from __future__ import annotations

import io
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, TextIO, Union

import networkx as nx
import numpy as np
import scipy.sparse as sp

from exceptions import GraphParseError, InputError
from models import Graph, Partition

logger = logging.getLogger(__name__)

COMMENT_PATTERN = re.compile(r"[#%].*$")


def parse_edge_list(text: Union[str, TextIO], one_based: Optional[bool] = None) -> Graph:
    """Parse a whitespace-separated edge list.

    Args:
        text: Edge-list content or an open text stream. ``#`` and ``%`` start comments.
        one_based: None remaps labels densely (numeric order when every label is an
            integer, order of first appearance otherwise). True/False take integer
            labels as positional ids offset by 1/0; ids missing from the list become
            isolated nodes.

    Returns:
        Graph with duplicates collapsed and self-loops dropped (both counted).

    Raises:
        GraphParseError: a line does not hold exactly two tokens, a label is not an
            integer when ``one_based`` is given, or no edge survives.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text

    raw_edges = []
    for line_number, line in enumerate(stream, 1):
        content = COMMENT_PATTERN.sub("", line).strip()
        if not content:
            continue
        tokens = content.split()
        if len(tokens) != 2:
            raise GraphParseError(f"expected two node tokens, got {len(tokens)}: '{content}'", line_number)
        raw_edges.append((tokens[0], tokens[1], line_number))

    if not raw_edges:
        raise GraphParseError("edge list holds no edges")

    if one_based is None:
        labels = _dense_label_order(raw_edges)
        index = {label: i for i, label in enumerate(labels)}
        edges = [(index[u], index[v]) for u, v, _ in raw_edges]
    else:
        offset = 1 if one_based else 0
        edges = []
        for u, v, line_number in raw_edges:
            try:
                iu, iv = int(u) - offset, int(v) - offset
            except ValueError:
                raise GraphParseError(f"non-integer node label in '{u} {v}'", line_number) from None
            if iu < 0 or iv < 0:
                raise GraphParseError(f"node label below {offset} in '{u} {v}'", line_number)
            edges.append((iu, iv))
        n = max(max(pair) for pair in edges) + 1
        labels = [str(i + offset) for i in range(n)]

    graph = Graph.from_edges(len(labels), edges, labels)
    if graph.m == 0:
        raise GraphParseError("edge list holds only self-loops")
    if graph.self_loops_dropped or graph.duplicates_dropped:
        logger.info(
            f"Dropped {graph.self_loops_dropped} self-loops and "
            f"{graph.duplicates_dropped} duplicate edges"
        )
    logger.info(f"Parsed graph with n={graph.n}, m={graph.m}")
    return graph


def _dense_label_order(raw_edges):
    tokens = []
    seen = set()
    for u, v, _ in raw_edges:
        for token in (u, v):
            if token not in seen:
                seen.add(token)
                tokens.append(token)
    try:
        return sorted(tokens, key=int)
    except ValueError:
        return tokens


def read_edge_list(path: Union[str, Path], one_based: Optional[bool] = None) -> Graph:
    """Read an edge-list file; see :func:`parse_edge_list`."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as handle:
            return parse_edge_list(handle, one_based=one_based)
    except OSError as e:
        raise InputError(f"Cannot read edge list {path}: {e}") from e


def format_edge_list(graph: Graph) -> str:
    """Edge list text using the graph's original labels, one edge per line."""
    lines = [f"{graph.labels[u]} {graph.labels[v]}" for u, v in graph.edges]
    return "\n".join(lines) + "\n"


def to_networkx(graph: Graph) -> nx.Graph:
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(range(graph.n))
    nx_graph.add_edges_from(graph.edges)
    return nx_graph


def from_networkx(nx_graph: nx.Graph) -> Graph:
    """Convert a networkx graph, keeping node order and using ``str(node)`` as label."""
    nodes = list(nx_graph.nodes())
    index = {node: i for i, node in enumerate(nodes)}
    edges = [(index[u], index[v]) for u, v in nx_graph.edges()]
    return Graph.from_edges(len(nodes), edges, [str(node) for node in nodes])


@dataclass(frozen=True, eq=False)
class ModularityOperator:
    """Implicit modularity matrix M = A - d d^T / 2m with d = A 1.

    Immutable; safe to share between threads.
    """

    adjacency: sp.csr_matrix
    d: np.ndarray
    two_m: float

    @classmethod
    def from_graph(cls, graph: Graph) -> "ModularityOperator":
        return cls.from_adjacency(graph.adjacency)

    @classmethod
    def from_adjacency(cls, adjacency) -> "ModularityOperator":
        """Build from any symmetric non-negative matrix, diagonal allowed.

        The diagonal form is what the ideal-graph algebra A = Z Z^T uses.
        """
        adjacency = sp.csr_matrix(adjacency, dtype=np.float64)
        d = np.asarray(adjacency.sum(axis=1)).ravel()
        two_m = float(d.sum())
        if two_m <= 0:
            raise InputError("Modularity is undefined for a graph without edges")
        d.setflags(write=False)
        return cls(adjacency, d, two_m)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def apply(self, V: np.ndarray) -> np.ndarray:
        return modularity_apply(self, V)

    def quadratic(self, X: np.ndarray) -> float:
        return modularity_quadratic(self, X)


def modularity_apply(op: ModularityOperator, V: np.ndarray) -> np.ndarray:
    """Return M V = A V - d (d^T V) / 2m for a vector or an n-by-k matrix."""
    V = np.asarray(V, dtype=np.float64)
    if V.shape[0] != op.n:
        raise InputError(f"Operand has {V.shape[0]} rows, operator has {op.n}")
    if V.ndim == 1:
        return op.adjacency @ V - op.d * (op.d @ V) / op.two_m
    return op.adjacency @ V - np.outer(op.d, op.d @ V) / op.two_m


def modularity_quadratic(op: ModularityOperator, X: np.ndarray) -> float:
    """f(X) = tr(X^T M X), accumulated as a sum of column-wise inner products."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    MX = modularity_apply(op, X)
    column_terms = np.sum(X * MX, axis=0)
    return float(np.sum(column_terms))


def modularity_score(graph: Graph, p: Partition) -> float:
    """Newman modularity Q = tr(X^T M X) / 2m of a partition."""
    if p.n != graph.n:
        raise InputError(f"Partition labels {p.n} nodes, graph has {graph.n}")
    op = ModularityOperator.from_graph(graph)
    return modularity_quadratic(op, p.assignment_matrix()) / op.two_m
