"""
Stiefel manifold primitives.

Points are n-by-q matrices with orthonormal columns. The retraction is the
QR+SVD one, R_X(eta) = Q (U V^T) with [Q, R] = qr(X + eta) and [U, S, V] = svd(R);
its inverse solves the Lyapunov equation (X^T Y) S + S (Y^T X) = 2 I.
The feasible set F holds the points whose column span contains the all-ones vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from exceptions import InputError, ManifoldError, RetractionDomainError

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-10
REPAIR_LIMIT = 1e-6
FEASIBLE_TOL = 1e-8
RANK_TOL = 1e-12
DEGENERATE_TOL = 1e-12


def stiefel_drift(X: np.ndarray) -> float:
    """Frobenius distance ||X^T X - I||."""
    return float(np.linalg.norm(X.T @ X - np.eye(X.shape[1])))


def orthonormalize(X: np.ndarray) -> np.ndarray:
    """Thin QR with the R diagonal made non-negative, so Q stays close to X."""
    Q, R = np.linalg.qr(X)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def _fix_singular_vector_signs(U: np.ndarray, Vt: np.ndarray):
    # largest-magnitude entry of each left singular vector made positive
    pivots = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivots, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, Vt * signs[:, None]


@dataclass(frozen=True, eq=False)
class StiefelPoint:
    """Point of St(q, n).

    Inputs with drift above 1e-10 but at most 1e-6 are re-orthonormalized on
    construction; anything further off is rejected.
    """

    X: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise InputError(f"Stiefel point must be a matrix, got shape {X.shape}")
        n, q = X.shape
        if q >= n:
            raise InputError(f"Stiefel point needs q < n, got n={n}, q={q}")
        drift = stiefel_drift(X)
        if drift > ORTHONORMAL_TOL:
            if drift > REPAIR_LIMIT:
                raise ManifoldError(f"matrix is {drift:.3e} away from orthonormal")
            logger.debug(f"Re-orthonormalizing point with drift {drift:.3e}")
            X = orthonormalize(X)
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def q(self) -> int:
        return self.X.shape[1]

    @property
    def shape(self):
        return self.X.shape


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Element eta of the tangent space at ``base``: X^T eta + eta^T X = 0."""

    base: StiefelPoint
    eta: np.ndarray

    def __post_init__(self):
        eta = np.array(self.eta, dtype=np.float64)
        if eta.ndim == 1:
            eta = eta[:, None]
        if eta.shape != self.base.shape:
            raise InputError(f"Tangent vector shape {eta.shape} does not match base {self.base.shape}")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.eta))

    def tangency_residual(self) -> float:
        XtE = self.base.X.T @ self.eta
        return float(np.linalg.norm(XtE + XtE.T))

    def scaled(self, factor: float) -> "TangentVector":
        return TangentVector(self.base, factor * self.eta)


@dataclass(frozen=True, eq=False)
class FeasiblePoint(StiefelPoint):
    """Stiefel point whose column span contains 1_n.

    ``certificate`` is ||(I - X X^T) 1_n / sqrt(n)||.
    """

    certificate: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        certificate = feasibility_certificate(self.X)
        if certificate > FEASIBLE_TOL:
            raise ManifoldError(f"all-ones vector is {certificate:.3e} away from the column span")
        object.__setattr__(self, "certificate", certificate)


def unit_ones(n: int) -> np.ndarray:
    return np.full(n, 1.0 / np.sqrt(n))


def feasibility_certificate(X: np.ndarray) -> float:
    ones = unit_ones(X.shape[0])
    return float(np.linalg.norm(ones - X @ (X.T @ ones)))


def inner(U: np.ndarray, V: np.ndarray) -> float:
    """Frobenius (embedded) inner product."""
    return float(np.sum(U * V))


def tangent_project(X: StiefelPoint, V: np.ndarray) -> TangentVector:
    """Orthogonal projection onto T_X St: V - X sym(X^T V)."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape != X.shape:
        raise InputError(f"Cannot project shape {V.shape} onto tangent space at {X.shape}")
    XtV = X.X.T @ V
    return TangentVector(X, V - X.X @ ((XtV + XtV.T) / 2.0))


def retract(X: StiefelPoint, eta: TangentVector) -> StiefelPoint:
    """QR+SVD retraction; retract(X, 0) returns X itself."""
    if eta.base.shape != X.shape:
        raise InputError("Tangent vector is attached to a point of a different shape")
    if not np.any(eta.eta):
        return X
    Q, R = np.linalg.qr(X.X + eta.eta)
    U, S, Vt = np.linalg.svd(R)
    if S[-1] < RANK_TOL:
        raise RetractionDomainError(f"X + eta is rank deficient (smallest singular value {S[-1]:.3e})")
    U, Vt = _fix_singular_vector_signs(U, Vt)
    return StiefelPoint(Q @ (U @ Vt))


def inverse_retract(X: StiefelPoint, Y: StiefelPoint) -> TangentVector:
    """R_X^{-1}(Y) = Y S - X with (X^T Y) S + S (Y^T X) = 2 I."""
    if X.shape != Y.shape:
        raise InputError(f"Points have different shapes {X.shape} and {Y.shape}")
    B = X.X.T @ Y.X
    eigenvalues = np.linalg.eigvals(B)
    # the diagonal of pair_sums is 2|lambda_i|, so this also rejects singular X^T Y
    pair_sums = np.abs(eigenvalues[:, None] + eigenvalues[None, :])
    if np.min(pair_sums) < RANK_TOL * max(1.0, float(np.max(np.abs(eigenvalues)))):
        raise RetractionDomainError("points not in retraction domain")
    S = scipy.linalg.solve_sylvester(B, B.T, 2.0 * np.eye(X.q))
    if not np.all(np.isfinite(S)):
        raise RetractionDomainError("points not in retraction domain")
    S = (S + S.T) / 2.0
    return TangentVector(X, Y.X @ S - X.X)


def feasible_project(X: StiefelPoint) -> FeasiblePoint:
    """Closest point of F to X: Y = 1~ q*^T + X (I - q* q*^T), q* = X^T 1~ / ||X^T 1~||.

    When X^T 1~ vanishes q* falls back to the last canonical basis vector, i.e. the
    last column is replaced by 1~.
    """
    ones = unit_ones(X.n)
    v = X.X.T @ ones
    length = float(np.linalg.norm(v))
    if length <= DEGENERATE_TOL:
        logger.warning("Projection input is orthogonal to the all-ones vector; replacing the last column")
        q_star = np.zeros(X.q)
        q_star[-1] = 1.0
    else:
        q_star = v / length
    Y = np.outer(ones, q_star) + X.X - np.outer(X.X @ q_star, q_star)
    return FeasiblePoint(Y)


def random_stiefel(n: int, q: int, rng: Optional[np.random.Generator] = None) -> StiefelPoint:
    rng = np.random.default_rng() if rng is None else rng
    return StiefelPoint(orthonormalize(rng.standard_normal((n, q))))


def random_rotation(q: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed q-by-q orthogonal matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((q, q)))
    return Q * np.sign(np.diag(R))
