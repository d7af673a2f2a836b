"""
Tangent-space proximal subproblem.

    min_eta  <grad, eta> + ||eta||^2 / (2 mu) + lam ||Y + eta||_1
    s.t.     Y^T eta + eta^T Y = 0

The symmetric constraint is dualized with a q-by-q multiplier Lam. For fixed Lam the
minimizer is eta(Lam) = soft(Y - mu (grad + Y Lam), mu lam) - Y, and Lam maximizes the
concave dual theta(Lam), whose gradient is E(Lam) / 2 with
E(Lam) = Y^T eta(Lam) + eta(Lam)^T Y. The dual is climbed with regularized semismooth
Newton steps under an Armijo line search on theta; a plain gradient step of length
1/mu (the Lipschitz constant of the dual gradient) covers rejected Newton steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from exceptions import InputError, ProxConvergenceError
from manifold import StiefelPoint, TangentVector, inner, tangent_project

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 100
NEWTON_REGULARIZATION = 1e-2
REGULARIZATION_FLOOR = 1e-12
MIN_NEWTON_STEP = 1e-4
SUFFICIENT_INCREASE = 1e-4
ROUNDOFF_SLACK = 1e-14


@dataclass(frozen=True, eq=False)
class ProxProblem:
    """One instance of the subproblem at base point ``base``.

    ``G`` is the Euclidean gradient of the smooth part; ``multiplier`` is an optional
    warm start for Lam; ``tol`` defaults to 1e-8 * (1 + ||grad||).
    """

    base: StiefelPoint
    G: np.ndarray
    mu: float
    lam: float
    tol: Optional[float] = None
    max_iter: int = DEFAULT_MAX_ITER
    multiplier: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.mu > 0:
            raise InputError(f"mu must be positive, got {self.mu}")
        if not self.lam >= 0:
            raise InputError(f"lam must be non-negative, got {self.lam}")
        if self.tol is not None and not self.tol > 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        G = np.asarray(self.G, dtype=np.float64)
        if G.ndim == 1:
            G = G[:, None]
        if G.shape != self.base.shape:
            raise InputError(f"Gradient shape {G.shape} does not match base point {self.base.shape}")
        object.__setattr__(self, "G", G)


@dataclass(frozen=True, eq=False)
class ProxSolution:
    direction: TangentVector
    multiplier: np.ndarray
    residual: float
    iterations: int
    objective: float

    @property
    def eta(self) -> np.ndarray:
        return self.direction.eta


@dataclass(frozen=True, eq=False)
class _DualPoint:
    multiplier: np.ndarray
    B: np.ndarray
    Z: np.ndarray
    E: np.ndarray
    residual: float
    value: float


def soft_threshold(B: np.ndarray, tau: float) -> np.ndarray:
    return np.sign(B) * np.maximum(np.abs(B) - tau, 0.0)


def prox_objective(grad: np.ndarray, eta: np.ndarray, base: np.ndarray, mu: float, lam: float) -> float:
    """Subproblem objective <grad, eta> + ||eta||^2/(2mu) + lam ||base + eta||_1."""
    return inner(grad, eta) + inner(eta, eta) / (2.0 * mu) + lam * float(np.abs(base + eta).sum())


def _symmetric_basis(q: int):
    # orthonormal basis of symmetric q-by-q matrices: e_a e_a^T and (e_a e_b^T + e_b e_a^T) / sqrt(2)
    rows, cols = np.triu_indices(q)
    scale = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return rows, cols, scale


def _svec(S: np.ndarray, basis) -> np.ndarray:
    rows, cols, scale = basis
    return S[rows, cols] * scale


def _smat(values: np.ndarray, q: int, basis) -> np.ndarray:
    rows, cols, scale = basis
    S = np.zeros((q, q))
    S[rows, cols] = values / scale
    return S + np.triu(S, 1).T


def _newton_matrix(Y: np.ndarray, mask: np.ndarray, basis) -> np.ndarray:
    """Matrix of D -> L(D) + L(D)^T in the basis, L(D)[:, k] = T[k] D[:, k].

    T[k] = Y^T diag(mask[:, k]) Y, so the operator is positive semidefinite with norm
    at most 2; -mu times it is the generalized Jacobian of E.
    """
    q = Y.shape[1]
    T = np.einsum("ik,ia,ib->kab", mask, Y, Y, optimize=True)
    rows, cols, scale = basis
    H = np.empty((rows.size, rows.size))
    for index, (a, b, s) in enumerate(zip(rows, cols, scale)):
        L = np.zeros((q, q))
        L[:, b] = T[b][:, a] / s
        if a != b:
            L[:, a] = T[a][:, b] / s
        H[:, index] = _svec(L + L.T, basis)
    return (H + H.T) / 2.0


def solve_tangent_prox(p: ProxProblem) -> ProxSolution:
    """Solve the subproblem to ``||Y^T eta + eta^T Y||_F <= tol``.

    Raises:
        ProxConvergenceError: the iteration cap was hit first; carries the best residual.
    """
    Y = p.base.X
    q = Y.shape[1]
    grad = tangent_project(p.base, p.G).eta
    tol = p.tol if p.tol is not None else 1e-8 * (1.0 + float(np.linalg.norm(grad)))
    tau = p.mu * p.lam
    basis = _symmetric_basis(q)
    identity = np.eye(q)

    def evaluate(multiplier) -> _DualPoint:
        c = grad + Y @ multiplier
        B = Y - p.mu * c
        Z = soft_threshold(B, tau)
        eta = Z - Y
        E = Y.T @ Z + Z.T @ Y - 2.0 * identity
        value = inner(c, eta) + inner(eta, eta) / (2.0 * p.mu) + p.lam * float(np.abs(Z).sum())
        return _DualPoint(multiplier, B, Z, E, float(np.linalg.norm(E)), value)

    if p.multiplier is None:
        start = np.zeros((q, q))
    else:
        start = np.asarray(p.multiplier, dtype=np.float64)
        start = (start + start.T) / 2.0

    point = evaluate(start)
    best_residual = point.residual
    iterations = 0
    while point.residual > tol:
        if iterations >= p.max_iter:
            raise ProxConvergenceError("tangent prox did not converge", best_residual, iterations)
        iterations += 1

        # kink entries (|B| == tau) count as differentiable with slope 1
        mask = (np.abs(point.B) >= tau).astype(np.float64)
        regularization = p.mu * max(min(NEWTON_REGULARIZATION, point.residual), REGULARIZATION_FLOOR)
        system = p.mu * _newton_matrix(Y, mask, basis) + regularization * np.eye(basis[0].size)
        rhs = _svec(point.E, basis)
        direction = np.linalg.solve(system, rhs)
        step = _smat(direction, q, basis)
        slope = 0.5 * float(rhs @ direction)
        slack = ROUNDOFF_SLACK * (1.0 + abs(point.value))

        accepted = None
        scale = 1.0
        while scale >= MIN_NEWTON_STEP:
            trial = evaluate(point.multiplier + scale * step)
            climbs = trial.value >= point.value + SUFFICIENT_INCREASE * scale * slope - slack
            shrinks = trial.residual <= (1.0 - SUFFICIENT_INCREASE * scale) * point.residual
            if climbs or shrinks:
                accepted = trial
                break
            scale *= 0.5
        if accepted is None:
            logger.debug(f"Newton step rejected at inner iteration {iterations}; using dual gradient step")
            accepted = evaluate(point.multiplier + point.E / (2.0 * p.mu))
        point = accepted
        best_residual = min(best_residual, point.residual)

    eta = point.Z - Y
    return ProxSolution(
        direction=TangentVector(p.base, eta),
        multiplier=point.multiplier,
        residual=point.residual,
        iterations=iterations,
        objective=prox_objective(grad, eta, Y, p.mu, p.lam),
    )
