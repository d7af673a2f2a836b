"""Real-network and planted-partition reproduction runs (``pytest -m slow``)."""

import numpy as np
import pytest

from bench import PlantedPartitionSpec, planted_partition
from graph import ModularityOperator
from metrics import ami, nmi
from models import Partition, SolverConfig
from networks import has_network, load_network
from solver import continuation

pytestmark = pytest.mark.slow

PLANTED_SIZES = (250, 250, 250, 250)


def detect(graph, q, **options):
    return continuation(ModularityOperator.from_graph(graph), SolverConfig(q=q, **options))


def planted(mixing, seed):
    return planted_partition(PlantedPartitionSpec(PLANTED_SIZES, avg_degree=20, mixing=mixing, seed=seed))


def neighbour_counts(graph, truth):
    """Entry (i, c): neighbours of node i whose true community is c."""
    return np.asarray(graph.adjacency @ truth.assignment_matrix())


def neighbour_vote(graph, truth):
    """Label every node by the true community most of its neighbours belong to.

    Given every other label this vote is the best any detector can do for a node of
    an equal-size planted partition, so it bounds what a detector can recover.
    """
    return Partition(np.argmax(neighbour_counts(graph, truth), axis=1))


def undecidable_nodes(graph, truth):
    """Nodes with at least as many neighbours in some other community as in their own."""
    counts = neighbour_counts(graph, truth)
    own = counts[np.arange(graph.n), truth.labels]
    counts[np.arange(graph.n), truth.labels] = -1
    return int(np.sum(counts.max(axis=1) >= own))


def test_karate_two_communities(karate):
    graph, truth = karate
    result = detect(graph, 2)
    assert nmi(result.partition, truth) == pytest.approx(1.0, abs=1e-9)
    assert ami(result.partition, truth) == pytest.approx(1.0, abs=1e-9)
    assert result.modularity == pytest.approx(0.372, abs=0.002)
    assert result.wall_time < 5.0


def test_karate_three_communities(karate):
    graph, truth = karate
    result = detect(graph, 3, restarts=8)
    assert nmi(result.partition, truth) == pytest.approx(0.811, abs=0.05)


def test_karate_four_communities(karate):
    graph, truth = karate
    result = detect(graph, 4, restarts=8)
    assert result.n_communities <= 4
    assert nmi(result.partition, truth) == pytest.approx(0.687, abs=0.05)
    assert result.modularity == pytest.approx(0.420, abs=0.005)


def test_karate_run_is_reproducible(karate):
    graph, _ = karate
    first, second = detect(graph, 3, seed=1), detect(graph, 3, seed=1)
    assert np.array_equal(first.partition.labels, second.partition.labels)
    assert first.objective_trace == second.objective_trace


@pytest.mark.skipif(not has_network("football"), reason="data/football.gml not present")
def test_football():
    graph, truth = load_network("football")
    results = {q: detect(graph, q) for q in (12, 13, 14)}
    assert nmi(results[12].partition, truth) >= 0.90
    assert results[12].modularity == pytest.approx(0.601, abs=0.005)
    for q in (13, 14):
        assert nmi(results[q].partition, truth) >= 0.88
    assert results[12].modularity >= results[13].modularity >= results[14].modularity


@pytest.mark.skipif(not has_network("polbooks"), reason="data/polbooks.gml not present")
def test_polbooks():
    graph, truth = load_network("polbooks")
    result = detect(graph, 3)
    assert nmi(result.partition, truth) == pytest.approx(0.565, abs=0.04)
    assert result.modularity == pytest.approx(0.508, abs=0.01)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("mixing", [0.1, 0.2])
def test_planted_partition_recovery(mixing, seed):
    graph, truth = planted(mixing, seed)
    result = detect(graph, 4)
    assert nmi(result.partition, truth) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_planted_partition_moderate_mixing(seed):
    graph, truth = planted(0.3, seed)
    result = detect(graph, 4)
    assert nmi(result.partition, truth) >= 0.97
    assert nmi(result.partition, truth) <= nmi(neighbour_vote(graph, truth), truth) + 0.02


def test_planted_partition_moderate_mixing_has_undecidable_nodes():
    # a node that loses the neighbour vote cannot be recovered, so NMI 1 is out of reach
    assert sum(undecidable_nodes(*planted(0.3, seed)) for seed in range(5)) >= 1


def test_planted_partition_strong_mixing():
    graph, truth = planted(0.5, 0)
    ceiling = nmi(neighbour_vote(graph, truth), truth)
    assert ceiling < 0.95
    result = detect(graph, 4)
    assert nmi(result.partition, truth) >= 0.45
