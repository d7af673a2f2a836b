"""
Synthetic generators, the Louvain baseline, brute-force oracles and the sweeps
built on them.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Union

import networkx as nx
import numpy as np
import scipy.sparse as sp

from exceptions import InfeasibleSpecError, InputError
from graph import ModularityOperator, from_networkx, modularity_score, to_networkx
from metrics import ami, nesting_fraction, nmi
from models import Graph, Partition, SolverConfig
from solver import continuation

logger = logging.getLogger(__name__)

MAX_ENUMERATION = 10**7
IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True)
class IdealGraphSpec:
    """Disjoint cliques with the given community sizes."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(size) for size in self.sizes)
        if len(sizes) < 2:
            raise InfeasibleSpecError(f"An ideal graph needs at least 2 communities, got {len(sizes)}")
        if min(sizes) < 2:
            raise InfeasibleSpecError(f"Community sizes must be at least 2, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)


@dataclass(frozen=True)
class PlantedPartitionSpec:
    """Planted partition with target mean degree ``avg_degree`` and mixing ``mixing``."""

    sizes: tuple[int, ...]
    avg_degree: float
    mixing: float
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(size) for size in self.sizes)
        if len(sizes) < 2 or min(sizes) < 2:
            raise InfeasibleSpecError(f"Need at least 2 communities of size >= 2, got {sizes}")
        object.__setattr__(self, "sizes", sizes)
        if not self.avg_degree > 0:
            raise InfeasibleSpecError(f"avg_degree must be positive, got {self.avg_degree}")
        limit = self.mixing_limit
        if not 0 <= self.mixing < limit:
            raise InfeasibleSpecError(f"mixing must lie in [0, {limit:.6g}) for sizes {sizes}, got {self.mixing}")
        p_in, p_out = self.probabilities()
        if p_in > 1 or p_out > 1:
            raise InfeasibleSpecError(
                f"avg_degree={self.avg_degree} with mixing={self.mixing} needs "
                f"p_in={p_in:.4g}, p_out={p_out:.4g}; probabilities must not exceed 1"
            )

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def mixing_limit(self) -> float:
        """Upper bound (N - max n_c) / N on the mixing parameter."""
        return (self.n - max(self.sizes)) / self.n

    def probabilities(self) -> tuple[float, float]:
        """(p_in, p_out) giving expected degree avg_degree and external fraction mixing."""
        N = self.n
        sizes = np.asarray(self.sizes, dtype=np.float64)
        internal_pairs = float(np.sum(sizes * (sizes - 1)))
        external_pairs = float(np.sum(sizes * (N - sizes)))
        p_in = (1.0 - self.mixing) * self.avg_degree * N / internal_pairs
        p_out = self.mixing * self.avg_degree * N / external_pairs
        return p_in, p_out


def _block_partition(sizes: Sequence[int]) -> Partition:
    return Partition(np.repeat(np.arange(len(sizes)), sizes))


def ideal_graph(spec: IdealGraphSpec) -> tuple[Graph, Partition]:
    """Disjoint cliques without self-loops, nodes numbered block by block."""
    edges = []
    start = 0
    for size in spec.sizes:
        members = range(start, start + size)
        edges.extend((u, v) for u in members for v in members if u < v)
        start += size
    graph = Graph.from_edges(spec.n, edges)
    logger.debug(f"Ideal graph {spec.sizes}: n={graph.n}, m={graph.m}")
    return graph, _block_partition(spec.sizes)


def ideal_adjacency(spec: IdealGraphSpec, with_diagonal: bool = True) -> sp.csr_matrix:
    """A = Z Z^T for the block assignment Z; ``with_diagonal=False`` gives the simple graph."""
    Z = sp.csr_matrix(_block_partition(spec.sizes).assignment_matrix())
    adjacency = (Z @ Z.T).tocsr()
    if not with_diagonal:
        adjacency.setdiag(0)
        adjacency.eliminate_zeros()
    return adjacency


def ideal_optimum(sizes: Sequence[int]) -> float:
    """tr(Z^T M Z) = sum n_i^2 - sum n_i^4 / sum n_i^2 for A = Z Z^T (diagonal included)."""
    sizes = np.asarray(sizes, dtype=np.float64)
    squares = float(np.sum(sizes**2))
    return squares - float(np.sum(sizes**4)) / squares


def planted_partition(spec: PlantedPartitionSpec) -> tuple[Graph, Partition]:
    """Sample the planted partition graph; logs the realized mixing."""
    p_in, p_out = spec.probabilities()
    q = len(spec.sizes)
    probabilities = [[p_in if i == j else p_out for j in range(q)] for i in range(q)]
    nx_graph = nx.stochastic_block_model(list(spec.sizes), probabilities, seed=spec.seed)
    graph = from_networkx(nx_graph)
    truth = _block_partition(spec.sizes)
    logger.info(
        f"Planted partition {spec.sizes}: m={graph.m}, p_in={p_in:.4g}, p_out={p_out:.4g}, "
        f"realized mixing {realized_mixing(graph, truth):.4f} (target {spec.mixing})"
    )
    return graph, truth


def realized_mixing(graph: Graph, truth: Partition) -> float:
    """Mean of k_out / k over non-isolated nodes."""
    if truth.n != graph.n:
        raise InputError(f"Partition labels {truth.n} nodes, graph has {graph.n}")
    coo = graph.adjacency.tocoo()
    labels = truth.labels
    external = np.bincount(coo.row, weights=(labels[coo.row] != labels[coo.col]).astype(np.float64), minlength=graph.n)
    degree = graph.degree
    active = degree > 0
    if not active.any():
        return 0.0
    return float(np.mean(external[active] / degree[active]))


def louvain(graph: Graph, seed: int = 0) -> Partition:
    """Louvain modularity optimization at resolution 1; node order shuffled by ``seed``."""
    if graph.m == 0:
        raise InputError("Louvain needs a graph with at least one edge")
    communities = nx.community.louvain_communities(to_networkx(graph), resolution=1, seed=seed)
    ordered = sorted((sorted(members) for members in communities), key=lambda members: members[0])
    return Partition.from_communities(ordered, graph.n)


def louvain_best(graph: Graph, seeds: Iterable[int] = range(20)) -> tuple[Partition, float, int]:
    """Best Louvain partition by modularity over ``seeds``; ties keep the earliest seed."""
    best = None
    for seed in seeds:
        partition = louvain(graph, seed)
        score = modularity_score(graph, partition)
        if best is None or score > best[1] + IMPROVEMENT_TOL:
            best = (partition, score, seed)
    if best is None:
        raise InputError("louvain_best needs at least one seed")
    logger.info(f"Louvain best of seeds: Q={best[1]:.4f} with {best[0].n_communities} communities (seed {best[2]})")
    return best


def _restricted_growth_strings(n: int, q: int):
    labels = [0] * n

    def extend(position, used):
        if position == n:
            if used == q:
                yield tuple(labels)
            return
        if q - used > n - position:
            return
        for label in range(min(used + 1, q)):
            labels[position] = label
            yield from extend(position + 1, max(used, label + 1))

    yield from extend(1, 1)


def brute_force_best_assignment(graph: Union[Graph, ModularityOperator], q: int) -> tuple[Partition, float]:
    """Exhaustive maximizer of tr(X^T M X) over labelings with exactly q communities.

    Labelings are enumerated once per label permutation, as restricted growth strings
    in lexicographic order; the first maximizer found wins.

    Raises:
        InputError: q^n exceeds the enumeration bound or q > n.
    """
    op = graph if isinstance(graph, ModularityOperator) else ModularityOperator.from_graph(graph)
    n = op.n
    if q < 1 or q > n:
        raise InputError(f"q must lie in [1, n={n}], got {q}")
    if float(q) ** n > MAX_ENUMERATION:
        raise InputError(f"Enumeration of q^n = {q}^{n} labelings exceeds the bound {MAX_ENUMERATION}")

    M = op.apply(np.eye(n))
    best_labels, best_value = None, -np.inf
    identity = np.eye(q)
    for labels in _restricted_growth_strings(n, q):
        Z = identity[list(labels)]
        value = float(np.sum(Z * (M @ Z)))
        if value > best_value + IMPROVEMENT_TOL:
            best_labels, best_value = labels, value
    return Partition(np.asarray(best_labels)), best_value


def q_sweep(
    graph: Graph,
    qs: Sequence[int],
    config: SolverConfig,
    truth: Optional[Partition] = None,
    louvain_seeds: Iterable[int] = (),
) -> list[dict]:
    """Run detection for each q; the nesting score compares with the smallest-q run.

    With ``louvain_seeds`` a final ``louvain`` row holds the best Louvain partition,
    its ``q`` left empty.
    """
    op = ModularityOperator.from_graph(graph)
    rows = []
    coarse = None
    for q in sorted(qs):
        result = continuation(op, replace(config, q=q))
        if coarse is None:
            coarse = result.partition
        rows.append(_q_row("arppg", q, result.partition, result.modularity, coarse, truth, result.wall_time))
        logger.info(f"q={q}: Q={result.modularity:.4f}, nesting={rows[-1]['nesting']:.3f}")

    louvain_seeds = list(louvain_seeds)
    if louvain_seeds:
        started = time.perf_counter()
        partition, score, _ = louvain_best(graph, louvain_seeds)
        wall_time = time.perf_counter() - started
        rows.append(_q_row("louvain", None, partition, score, coarse if coarse is not None else partition, truth, wall_time))
    return rows


def _q_row(method, q, partition, modularity, coarse, truth, wall_time) -> dict:
    row = {
        "method": method,
        "q": q,
        "n_communities": partition.n_communities,
        "modularity": modularity,
        "nesting": nesting_fraction(coarse, partition),
        "wall_time": wall_time,
    }
    if truth is not None:
        row["nmi"] = nmi(partition, truth)
        row["ami"] = ami(partition, truth)
    return row


def mixing_sweep(
    sizes: Sequence[int],
    avg_degree: float,
    mixings: Sequence[float],
    seeds: Sequence[int],
    config: Optional[SolverConfig] = None,
    louvain_seeds: int = 1,
) -> list[dict]:
    """Planted partitions over a grid of mixing values and seeds, scored for ARPPG and Louvain."""
    config = config or SolverConfig(q=len(sizes))
    config = replace(config, q=len(sizes))
    rows = []
    for mixing in mixings:
        for seed in seeds:
            graph, truth = planted_partition(PlantedPartitionSpec(tuple(sizes), avg_degree, mixing, seed))
            measured = realized_mixing(graph, truth)

            result = continuation(ModularityOperator.from_graph(graph), replace(config, seed=seed))
            rows.append(_sweep_row("arppg", mixing, seed, measured, result.partition, truth, graph, result.wall_time))

            # Louvain reference
            started = time.perf_counter()
            partition, _, _ = louvain_best(graph, range(seed, seed + louvain_seeds))
            elapsed = time.perf_counter() - started
            rows.append(_sweep_row("louvain", mixing, seed, measured, partition, truth, graph, elapsed))
    return rows


def _sweep_row(method, mixing, seed, measured, partition, truth, graph, wall_time) -> dict:
    return {
        "method": method,
        "mixing": mixing,
        "seed": seed,
        "realized_mixing": measured,
        "n_communities": partition.n_communities,
        "nmi": nmi(partition, truth),
        "ami": ami(partition, truth),
        "modularity": modularity_score(graph, partition),
        "wall_time": wall_time,
    }
