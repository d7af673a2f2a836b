"""
Domain models for the community detection toolkit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from exceptions import ConfigError, InputError


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph stored as a symmetric 0/1 CSR adjacency.

    Node ids are 0..n-1; ``labels[i]`` is the original label of node ``i``.
    """

    adjacency: sp.csr_matrix
    labels: tuple[str, ...]
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0

    def __post_init__(self):
        adjacency = sp.csr_matrix(self.adjacency, dtype=np.float64)
        adjacency.sort_indices()
        n_rows, n_cols = adjacency.shape
        if n_rows != n_cols:
            raise InputError(f"Adjacency must be square, got {adjacency.shape}")
        if len(self.labels) != n_rows:
            raise InputError(f"Expected {n_rows} node labels, got {len(self.labels)}")
        if adjacency.diagonal().any():
            raise InputError("Adjacency has self-loops on the diagonal")
        if adjacency.nnz and not np.all(adjacency.data == 1.0):
            raise InputError("Adjacency entries must be 0/1")
        if (adjacency != adjacency.T).nnz:
            raise InputError("Adjacency must be symmetric")
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "labels", tuple(str(label) for label in self.labels))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels: Optional[Sequence[str]] = None):
        """Build a graph from unordered pairs of internal ids.

        Duplicates and self-loops are dropped and counted.
        """
        seen = set()
        self_loops = 0
        duplicates = 0
        for u, v in edges:
            if u == v:
                self_loops += 1
                continue
            key = (u, v) if u < v else (v, u)
            if key in seen:
                duplicates += 1
                continue
            seen.add(key)

        pairs = np.array(sorted(seen), dtype=np.int64).reshape(-1, 2)
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        data = np.ones(rows.size, dtype=np.float64)
        adjacency = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        if labels is None:
            labels = [str(i) for i in range(n)]
        return cls(adjacency, tuple(labels), self_loops_dropped=self_loops, duplicates_dropped=duplicates)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def m(self) -> int:
        return self.adjacency.nnz // 2

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr).astype(np.int64)

    @property
    def edges(self) -> list[tuple[int, int]]:
        upper = sp.triu(self.adjacency, k=1).tocoo()
        return sorted(zip(upper.row.tolist(), upper.col.tolist()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True, eq=False)
class Partition:
    """Node-to-community labeling; ``labels[i]`` is the community of node ``i``."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise InputError("Partition labels must be one-dimensional")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise InputError("Partition labels must be integers")
        labels = labels.astype(np.int64)
        if labels.size and labels.min() < 0:
            raise InputError("Partition labels must be non-negative")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_communities(cls, communities: Iterable[Iterable[int]], n: int) -> "Partition":
        labels = np.full(n, -1, dtype=np.int64)
        for index, members in enumerate(communities):
            labels[list(members)] = index
        if (labels < 0).any():
            raise InputError("Communities do not cover every node")
        return cls(labels)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def n_communities(self) -> int:
        return int(np.unique(self.labels).size)

    def dense_labels(self) -> np.ndarray:
        """Labels remapped to 0..k-1 preserving the order of the original label values."""
        _, inverse = np.unique(self.labels, return_inverse=True)
        return inverse.astype(np.int64)

    def canonical(self) -> "Partition":
        """Relabel communities by order of first appearance."""
        mapping = {}
        out = np.empty_like(self.labels)
        for i, label in enumerate(self.labels.tolist()):
            out[i] = mapping.setdefault(label, len(mapping))
        return Partition(out)

    def communities(self) -> list[np.ndarray]:
        dense = self.dense_labels()
        return [np.flatnonzero(dense == c) for c in range(self.n_communities)]

    def assignment_matrix(self) -> np.ndarray:
        """0/1 matrix with exactly one 1 per row, one column per non-empty community."""
        dense = self.dense_labels()
        matrix = np.zeros((self.n, self.n_communities), dtype=np.float64)
        matrix[np.arange(self.n), dense] = 1.0
        return matrix

    def same_as(self, other: "Partition") -> bool:
        """True when both partitions are identical up to relabeling."""
        if self.n != other.n:
            return False
        return bool(np.array_equal(self.canonical().labels, other.canonical().labels))

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Partition(n={self.n}, communities={self.n_communities})"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the three-step detection pipeline.

    ``mu`` is the proximal step; when None it is ``mu_scale / L`` with L estimated
    from the modularity operator. ``grad_tol`` defaults to 1e-6*sqrt(n*q).
    """

    q: int
    lambda0: float = 0.05
    lambda_growth: float = 1.5
    mu: Optional[float] = None
    mu_scale: float = 1.0
    sigma: float = 1e-4
    beta: float = 0.5
    safeguard_period: int = 5
    max_outer_iter: int = 2000
    grad_tol: Optional[float] = None
    seed: int = 0
    restarts: int = 1
    workers: int = 1
    prox_tol: Optional[float] = None
    prox_max_iter: int = 100
    max_continuation_rounds: int = 20
    check_feasibility: bool = False

    def __post_init__(self):
        if self.q < 2:
            raise ConfigError(f"q must be at least 2, got {self.q}")
        if not self.lambda0 >= 0:
            raise ConfigError(f"lambda0 must be non-negative, got {self.lambda0}")
        if not self.lambda_growth > 1:
            raise ConfigError(f"lambda_growth must be greater than 1, got {self.lambda_growth}")
        if self.mu is not None and not self.mu > 0:
            raise ConfigError(f"mu must be positive, got {self.mu}")
        if not 0 < self.mu_scale <= 1:
            raise ConfigError(f"mu_scale must lie in (0, 1], got {self.mu_scale}")
        if not 0 < self.sigma < 1:
            raise ConfigError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not 0 < self.beta < 1:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")
        if self.safeguard_period < 1:
            raise ConfigError(f"safeguard_period must be a positive integer, got {self.safeguard_period}")
        if self.max_outer_iter < 1:
            raise ConfigError(f"max_outer_iter must be positive, got {self.max_outer_iter}")
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise ConfigError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.prox_tol is not None and not self.prox_tol > 0:
            raise ConfigError(f"prox_tol must be positive, got {self.prox_tol}")
        if self.prox_max_iter < 1:
            raise ConfigError(f"prox_max_iter must be positive, got {self.prox_max_iter}")
        if self.restarts < 1 or self.workers < 1:
            raise ConfigError("restarts and workers must be positive")
        if self.max_continuation_rounds < 1:
            raise ConfigError("max_continuation_rounds must be positive")

    def step_size(self, lipschitz: float) -> float:
        """Proximal step mu in (0, 1/L]."""
        if self.mu is None:
            return self.mu_scale / lipschitz
        if self.mu * lipschitz > 1 + 1e-12:
            raise ConfigError(f"mu={self.mu} exceeds 1/L={1 / lipschitz:.6g}")
        return self.mu

    def resolved_grad_tol(self, n: int) -> float:
        if self.grad_tol is not None:
            return self.grad_tol
        return 1e-6 * math.sqrt(n * self.q)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class DetectionResult:
    """Outcome of one detection run (best restart)."""

    partition: Partition
    x_star: Any
    objective_trace: list[float]
    lambda_path: list[float]
    modularity: float
    penalized_objective: float
    iterations: int
    wall_time: float
    row_dominance: float
    safeguard_activations: int = 0
    momentum_resets: int = 0
    restart_index: int = 0

    @property
    def n_communities(self) -> int:
        return self.partition.n_communities


@dataclass
class RunReport:
    """Machine-readable record of a ``detect`` run."""

    config: dict[str, Any]
    graph: dict[str, Any]
    partition: dict[str, int]
    n_communities: int
    modularity: float
    lambda_path: list[float]
    objective_trace: list[float]
    iterations: int
    wall_time: float
    events: dict[str, int]
    row_dominance: float
    nmi: Optional[float] = None
    ami: Optional[float] = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_wall_time: bool = True) -> dict[str, Any]:
        data = asdict(self)
        data.pop("extra")
        data.update(self.extra)
        if data["nmi"] is None:
            data.pop("nmi")
        if data["ami"] is None:
            data.pop("ami")
        if not include_wall_time:
            data.pop("wall_time")
        return data
