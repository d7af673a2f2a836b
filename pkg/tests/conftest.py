import numpy as np
import pytest

from graph import ModularityOperator
from models import Graph
from networks import karate_club


def dense_modularity(adjacency):
    """Dense M = A - d d^T / 2m, built independently of ModularityOperator."""
    A = adjacency.toarray() if hasattr(adjacency, "toarray") else np.asarray(adjacency, dtype=float)
    d = A.sum(axis=1)
    return A - np.outer(d, d) / d.sum()


def top_restricted_eigenvalues(M, k):
    """Top-k eigenvalues of M on the complement of the all-ones vector."""
    n = M.shape[0]
    ones = np.full(n, 1.0 / np.sqrt(n))
    basis = np.linalg.svd(np.eye(n) - np.outer(ones, ones))[0][:, : n - 1]
    values = np.linalg.eigvalsh(basis.T @ M @ basis)
    return np.sort(values)[::-1][:k]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def karate():
    return karate_club()


@pytest.fixture(scope="session")
def karate_op(karate):
    return ModularityOperator.from_graph(karate[0])


@pytest.fixture
def path_graph():
    return Graph.from_edges(3, [(0, 1), (1, 2)])
