"""
Partition-quality measures: normalized and adjusted mutual information.

Entropies and mutual information use the natural log with 0*log(0) = 0. The
expected mutual information of AMI is the exact sum under the hypergeometric
(fixed-marginals permutation) model, accumulated in log space from a cached
ln Gamma table.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from exceptions import InputError
from models import Partition

logger = logging.getLogger(__name__)

MAX_AMI_NODES = 10**6
DEGENERATE_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Joint counts ``n_uv`` of two partitions over the same N nodes.

    Rows index the non-empty communities of the first partition, columns those of
    the second; ``a`` and ``b`` are the row and column sums.
    """

    n_uv: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.n_uv, dtype=np.int64)
        if counts.ndim != 2:
            raise InputError("Contingency table must be two-dimensional")
        if (counts < 0).any():
            raise InputError("Contingency counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "n_uv", counts)

    @property
    def a(self) -> np.ndarray:
        return self.n_uv.sum(axis=1)

    @property
    def b(self) -> np.ndarray:
        return self.n_uv.sum(axis=0)

    @property
    def N(self) -> int:
        return int(self.n_uv.sum())


def contingency_table(X: Partition, Y: Partition) -> ContingencyTable:
    if X.n != Y.n:
        raise InputError(f"Partitions cover different node counts: {X.n} and {Y.n}")
    if X.n == 0:
        raise InputError("Partitions must cover at least one node")
    rows, cols = X.dense_labels(), Y.dense_labels()
    counts = np.zeros((X.n_communities, Y.n_communities), dtype=np.int64)
    np.add.at(counts, (rows, cols), 1)
    return ContingencyTable(counts)


def entropy(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    p = counts / counts.sum()
    return float(-np.sum(p * np.log(p)))


def mutual_info(table: ContingencyTable) -> float:
    N = table.N
    nonzero = table.n_uv > 0
    n_uv = table.n_uv[nonzero].astype(np.float64)
    outer = np.outer(table.a, table.b)[nonzero].astype(np.float64)
    value = float(np.sum(n_uv / N * np.log(N * n_uv / outer)))
    return max(value, 0.0)


def nmi(X: Partition, Y: Partition) -> float:
    """NMI = 2 I(X, Y) / (H(X) + H(Y)); 1 when both partitions are a single community."""
    table = contingency_table(X, Y)
    h_x, h_y = entropy(table.a), entropy(table.b)
    if h_x + h_y <= DEGENERATE_TOL:
        return 1.0
    value = 2.0 * mutual_info(table) / (h_x + h_y)
    return float(min(max(value, 0.0), 1.0))


@lru_cache(maxsize=8)
def _log_factorials(N: int) -> np.ndarray:
    # entry k holds ln(k!)
    table = gammaln(np.arange(N + 1, dtype=np.float64) + 1.0)
    table.setflags(write=False)
    return table


def expected_mutual_info(table: ContingencyTable) -> float:
    """E{I} under the hypergeometric model.

    The inner sum runs over n_uv from max(1, a_u + b_v - N) to min(a_u, b_v). The
    n_uv = 0 cell contributes 0 * log(0) = 0 to I, so this lower limit gives the same
    value as starting from max(0, a_u + b_v - N). The weights are the probabilities of
    the full hypergeometric distribution, not renormalized over the truncated range.
    """
    N = table.N
    if N > MAX_AMI_NODES:
        raise InputError(f"AMI expectation limited to N <= {MAX_AMI_NODES}, got N={N}")
    log_fact = _log_factorials(N)
    a, b = table.a, table.b
    total = 0.0
    for a_u in a.tolist():
        for b_v in b.tolist():
            start = max(1, a_u + b_v - N)
            stop = min(a_u, b_v)
            if start > stop:
                continue
            k = np.arange(start, stop + 1)
            log_prob = (
                log_fact[a_u] + log_fact[b_v] + log_fact[N - a_u] + log_fact[N - b_v]
                - log_fact[N] - log_fact[k] - log_fact[a_u - k] - log_fact[b_v - k]
                - log_fact[N - a_u - b_v + k]
            )
            term = k / N * np.log(N * k / (a_u * b_v))
            total += float(np.sum(term * np.exp(log_prob)))
    return total


def ami(X: Partition, Y: Partition) -> float:
    """AMI = (I - E{I}) / (max{H(X), H(Y)} - E{I})."""
    table = contingency_table(X, Y)
    if table.N > MAX_AMI_NODES:
        raise InputError(f"AMI expectation limited to N <= {MAX_AMI_NODES}, got N={table.N}")
    h_x, h_y = entropy(table.a), entropy(table.b)
    if max(h_x, h_y) <= DEGENERATE_TOL:
        return 1.0
    information = mutual_info(table)
    expected = expected_mutual_info(table)
    denominator = max(h_x, h_y) - expected
    if abs(denominator) <= DEGENERATE_TOL:
        # E{I} = max H forces the table, so the partitions coincide
        return 1.0
    return float(min((information - expected) / denominator, 1.0))


def nesting_fraction(coarse: Partition, fine: Partition) -> float:
    """Fraction of nodes whose ``fine`` community lies inside a single ``coarse`` one."""
    if coarse.n != fine.n:
        raise InputError(f"Partitions cover different node counts: {coarse.n} and {fine.n}")
    table = contingency_table(fine, coarse)
    nested = (table.n_uv > 0).sum(axis=1) == 1
    return float(table.a[nested].sum() / table.N)
