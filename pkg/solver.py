"""
Three-step detection pipeline: spectral initialization, accelerated Riemannian
projected proximal gradient (ARPPG) with a periodic safeguard, lambda-continuation,
and rounding to an assignment.

Internally the problem is a minimization, F(X) = f(X) + g(X) with
f(X) = -tr(X^T M X) and g(X) = lam ||X||_1. Traces and reported objectives use the
maximization form tr(X^T M X) - lam ||X||_1 = -F(X).
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, eigsh

from exceptions import InputError, ProxConvergenceError, RetractionDomainError, SolverError
from graph import ModularityOperator, modularity_quadratic
from manifold import (
    FeasiblePoint,
    StiefelPoint,
    feasible_project,
    inverse_retract,
    random_rotation,
    retract,
    stiefel_drift,
    tangent_project,
    unit_ones,
)
from models import DetectionResult, Partition, SolverConfig
from prox import ProxProblem, ProxSolution, solve_tangent_prox

logger = logging.getLogger(__name__)

LIPSCHITZ_FLOOR = 1e-12
LIPSCHITZ_SAFETY = 1.01
MAX_STEP = 1e6
DENSE_EIGEN_LIMIT = 3000
POSITIVE_EIGEN_TOL = 1e-10
ALPHA_FLOOR = 1e-16
PROX_RELAXATION = 1e3
CONTINUATION_RTOL = 1e-6
STALL_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class SolverState:
    """Iterates of one ARPPG run; x, y and z are always feasible."""

    x: FeasiblePoint
    y: FeasiblePoint
    z: FeasiblePoint
    t: float
    k: int
    F_x: float
    multiplier: Optional[np.ndarray] = None
    safeguard_activations: int = 0
    momentum_resets: int = 0
    safeguard_values: tuple[float, ...] = ()
    last_alpha: Optional[float] = None
    stalled: bool = False

    def __post_init__(self):
        if self.t < 1:
            raise InputError(f"momentum t must be at least 1, got {self.t}")


@dataclass
class ArppgResult:
    x: FeasiblePoint
    trace: list[float]
    iterations: int
    converged: bool
    safeguard_activations: int = 0
    momentum_resets: int = 0
    safeguard_values: list[float] = field(default_factory=list)
    multiplier: Optional[np.ndarray] = None


def penalized_objective(op: ModularityOperator, X: StiefelPoint, lam: float) -> float:
    """Minimization-form objective F(X) = -tr(X^T M X) + lam ||X||_1."""
    return -modularity_quadratic(op, X.X) + lam * float(np.abs(X.X).sum())


def estimate_lipschitz(op: ModularityOperator, max_iter: int = 100, rtol: float = 1e-6, seed: int = 0) -> float:
    """L = 2 ||M||_2 * 1.01, with ||M||_2 from power iteration on ||M v||.

    A zero operator returns the floor value 1e-12.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for iteration in range(max_iter):
        w = op.apply(v)
        norm_w = float(np.linalg.norm(w))
        if norm_w <= LIPSCHITZ_FLOOR:
            logger.warning("Modularity operator is numerically zero; using the Lipschitz floor")
            return LIPSCHITZ_FLOOR
        previous, estimate = estimate, norm_w
        v = w / norm_w
        if abs(estimate - previous) <= rtol * estimate:
            break
    lipschitz = 2.0 * estimate * LIPSCHITZ_SAFETY
    logger.debug(f"Estimated Lipschitz constant {lipschitz:.6g} after {iteration + 1} power iterations")
    return max(lipschitz, LIPSCHITZ_FLOOR)


def _sign_fixed(vectors: np.ndarray) -> np.ndarray:
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def spectral_embedding(op: ModularityOperator, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k algebraic eigenpairs of M restricted to the complement of 1_n.

    1_n/sqrt(n) is deflated explicitly: it is moved to a strongly negative eigenvalue
    so it can never be selected, even when M has fewer than k positive eigenvalues.
    Returns eigenvalues in descending order and matching orthonormal eigenvectors.
    """
    n = op.n
    ones = unit_ones(n)
    if n <= DENSE_EIGEN_LIMIT:
        M = op.apply(np.eye(n))
        M = (M + M.T) / 2.0
        P = np.eye(n) - np.outer(ones, ones)
        shift = float(np.linalg.norm(M)) + 1.0
        deflated = P @ M @ P - shift * np.outer(ones, ones)
        values, vectors = scipy.linalg.eigh(deflated, subset_by_index=[n - k, n - 1])
    else:
        shift = 2.0 * float(op.d.max()) + 1.0

        def matvec(v):
            v = np.ravel(v)
            w = v - ones * (ones @ v)
            Mw = op.apply(w)
            return Mw - ones * (ones @ Mw) - shift * ones * (ones @ v)

        operator = LinearOperator((n, n), matvec=matvec, dtype=np.float64)
        v0 = np.random.default_rng(0).standard_normal(n)
        values, vectors = eigsh(operator, k=k, which="LA", v0=v0)
        order = np.argsort(values)
        values, vectors = values[order], vectors[:, order]
    return values[::-1].copy(), _sign_fixed(vectors[:, ::-1])


def init_spectral(op: ModularityOperator, q: int) -> FeasiblePoint:
    """X0 = [Y*, 1_n/sqrt(n)] with Y* the top q-1 eigenvectors of M."""
    if q < 2 or q >= op.n:
        raise InputError(f"q must satisfy 2 <= q < n={op.n}, got {q}")
    values, vectors = spectral_embedding(op, q - 1)
    scale = max(1.0, float(np.abs(values).max()))
    positive = int(np.sum(values > POSITIVE_EIGEN_TOL * scale))
    if positive < q - 1:
        logger.warning(f"M has only {positive} positive eigenvalues for q-1={q - 1} requested directions")
    return FeasiblePoint(np.column_stack([vectors, unit_ones(op.n)]))


def momentum_next(t: float) -> float:
    """t' = (sqrt(4 t^2 + 1) + 1) / 2, the root of t'(t' - 1) = t^2."""
    return (math.sqrt(4.0 * t * t + 1.0) + 1.0) / 2.0


def _step_size(config: SolverConfig, lipschitz: float) -> float:
    return min(config.step_size(lipschitz), MAX_STEP)


def _solve_prox(op, point, lam, mu, config, multiplier, iteration) -> ProxSolution:
    G = -2.0 * op.apply(point.X)
    problem = ProxProblem(point, G, mu, lam, tol=config.prox_tol, max_iter=config.prox_max_iter, multiplier=multiplier)
    try:
        return solve_tangent_prox(problem)
    except ProxConvergenceError as e:
        base_tol = problem.tol
        if base_tol is None:
            base_tol = 1e-8 * (1.0 + tangent_project(point, G).norm)
        logger.warning(f"{e}; retrying with tolerance {base_tol * PROX_RELAXATION:.3e}")
        relaxed = replace(problem, tol=base_tol * PROX_RELAXATION, max_iter=2 * problem.max_iter)
        try:
            return solve_tangent_prox(relaxed)
        except ProxConvergenceError as again:
            raise SolverError(str(again), iteration=iteration, lam=lam) from again


def _check_feasible(state: SolverState):
    for name in ("x", "y"):
        point = getattr(state, name)
        drift = stiefel_drift(point.X)
        if drift > 1e-10 or point.certificate > 1e-8:
            raise SolverError(f"{name} left the feasible set (drift {drift:.3e})", iteration=state.k)


def safeguard(
    state: SolverState,
    op: ModularityOperator,
    config: SolverConfig,
    lam: float,
    lipschitz: Optional[float] = None,
) -> SolverState:
    """Monotone check with backtracking from the compared iterate z.

    Backtracks alpha <- beta*alpha until
    F(proj(R_z(alpha eta))) <= F(z) - sigma alpha ||eta||^2. When the accepted point
    beats F(x), x and y are replaced by it and t is reset to 1. Afterwards z = x.

    ``stalled`` is set when neither x nor the backtracked point improves on F(z) by
    more than 1e-10 * (1 + |F(z)|) over the whole window since the previous check.
    """
    lipschitz = lipschitz if lipschitz is not None else estimate_lipschitz(op, seed=config.seed)
    mu = _step_size(config, lipschitz)
    solution = _solve_prox(op, state.z, lam, mu, config, state.multiplier, state.k)
    eta = solution.direction
    eta_sq = eta.norm ** 2
    F_z = penalized_objective(op, state.z, lam)

    alpha = 1.0
    candidate, F_candidate = state.z, F_z
    if eta.norm / mu > config.resolved_grad_tol(op.n):
        while True:
            try:
                trial = feasible_project(retract(state.z, eta.scaled(alpha)))
                F_trial = penalized_objective(op, trial, lam)
            except RetractionDomainError:
                F_trial = math.inf
            if F_trial <= F_z - config.sigma * alpha * eta_sq:
                candidate, F_candidate = trial, F_trial
                break
            alpha *= config.beta
            if alpha < ALPHA_FLOOR:
                logger.info(f"Safeguard step underflow at iteration {state.k}; keeping z")
                break

    window_gain = F_z - min(state.F_x, F_candidate)
    stalled = window_gain <= STALL_RTOL * (1.0 + abs(F_z))
    if F_candidate < state.F_x:
        logger.debug(f"Safeguard takes effect at iteration {state.k}: F {state.F_x:.10g} -> {F_candidate:.10g}")
        state = replace(
            state,
            x=candidate,
            y=candidate,
            t=1.0,
            F_x=F_candidate,
            safeguard_activations=state.safeguard_activations + 1,
        )
    return replace(
        state,
        z=state.x,
        multiplier=solution.multiplier,
        safeguard_values=state.safeguard_values + (state.F_x,),
        last_alpha=alpha,
        stalled=stalled,
    )


def arppg(
    op: ModularityOperator,
    config: SolverConfig,
    x0: FeasiblePoint,
    lam: float,
    lipschitz: Optional[float] = None,
) -> ArppgResult:
    """Accelerated Riemannian projected proximal gradient for one value of lam.

    Stops when ||eta||/mu <= grad_tol, or when the projected step ||x_{k+1} - y_k||/mu
    is that small, or when a safeguard window made no progress, or after
    max_outer_iter iterations.
    """
    lipschitz = lipschitz if lipschitz is not None else estimate_lipschitz(op, seed=config.seed)
    mu = _step_size(config, lipschitz)
    grad_tol = config.resolved_grad_tol(op.n)

    F0 = penalized_objective(op, x0, lam)
    state = SolverState(x=x0, y=x0, z=x0, t=1.0, k=0, F_x=F0)
    trace = [-F0]
    converged = False

    for k in range(config.max_outer_iter):
        state = replace(state, k=k)
        # Safeguard every N iterations
        if k % config.safeguard_period == 0:
            state = safeguard(state, op, config, lam, lipschitz=lipschitz)
            trace[-1] = -state.F_x
            if state.stalled:
                logger.debug(f"No progress over the safeguard window at iteration {k}; stopping")
                converged = True
                break

        solution = _solve_prox(op, state.y, lam, mu, config, state.multiplier, k)
        eta = solution.direction
        try:
            x_next = feasible_project(retract(state.y, eta))
        except RetractionDomainError as e:
            raise SolverError(str(e), iteration=k, lam=lam) from e
        F_next = penalized_objective(op, x_next, lam)
        trace.append(-F_next)

        stationarity = min(eta.norm, float(np.linalg.norm(x_next.X - state.y.X))) / mu
        if stationarity <= grad_tol:
            state = replace(state, x=x_next, y=x_next, F_x=F_next, multiplier=solution.multiplier, k=k + 1)
            converged = True
            break

        # Momentum combination
        t_next = momentum_next(state.t)
        resets = state.momentum_resets
        try:
            backward = inverse_retract(x_next, state.x)
            y_next = feasible_project(retract(x_next, backward.scaled((1.0 - state.t) / t_next)))
        except RetractionDomainError:
            logger.warning(f"Momentum combination failed at iteration {k}; restarting momentum")
            t_next, y_next, resets = 1.0, x_next, resets + 1

        state = replace(
            state,
            x=x_next,
            y=y_next,
            t=t_next,
            F_x=F_next,
            multiplier=solution.multiplier,
            momentum_resets=resets,
            k=k + 1,
        )
        if config.check_feasibility:
            _check_feasible(state)

    logger.debug(
        f"ARPPG lam={lam:.6g}: {state.k} iterations, converged={converged}, "
        f"{state.safeguard_activations} safeguard activations"
    )
    return ArppgResult(
        x=state.x,
        trace=trace,
        iterations=state.k,
        converged=converged,
        safeguard_activations=state.safeguard_activations,
        momentum_resets=state.momentum_resets,
        safeguard_values=list(state.safeguard_values),
        multiplier=state.multiplier,
    )


def round_to_assignment(X: Union[StiefelPoint, np.ndarray]) -> Partition:
    """label(i) = argmax_j |X_ij|, lowest column on ties, empty columns dropped."""
    matrix = X.X if isinstance(X, StiefelPoint) else np.asarray(X)
    winners = np.argmax(np.abs(matrix), axis=1)
    _, dense = np.unique(winners, return_inverse=True)
    return Partition(dense)


def row_dominance(X: StiefelPoint) -> float:
    """Mean over rows of max|row| / ||row||_2; 1 means one nonzero per row."""
    magnitudes = np.abs(X.X)
    norms = np.linalg.norm(X.X, axis=1)
    nonzero = norms > 0
    if not nonzero.any():
        return 0.0
    return float(np.mean(magnitudes.max(axis=1)[nonzero] / norms[nonzero]))


@dataclass
class _ContinuationRun:
    x: FeasiblePoint
    value: float
    trace: list[float]
    lambda_path: list[float]
    iterations: int
    safeguard_activations: int
    momentum_resets: int


def _maximization_value(op: ModularityOperator, X: StiefelPoint, lam: float) -> float:
    return -penalized_objective(op, X, lam)


def _continue_from(op, config, start, lipschitz) -> _ContinuationRun:
    lam = config.lambda0
    X = start
    trace, path = [], []
    iterations = activations = resets = 0
    value = _maximization_value(op, X, lam)

    for round_index in range(config.max_continuation_rounds):
        # both sides of the comparison are evaluated at this round's lambda
        before = _maximization_value(op, X, lam)
        result = arppg(op, config, X, lam, lipschitz=lipschitz)
        after = _maximization_value(op, result.x, lam)
        trace.extend(result.trace)
        path.append(lam)
        iterations += result.iterations
        activations += result.safeguard_activations
        resets += result.momentum_resets
        logger.info(f"Continuation round {round_index}: lambda={lam:.6g}, objective {before:.10g} -> {after:.10g}")

        if after >= before:
            X, value = result.x, after
        else:
            value = before
        if round_index > 0 and after - before < CONTINUATION_RTOL * (1.0 + abs(before)):
            break
        lam *= config.lambda_growth

    return _ContinuationRun(X, value, trace, path, iterations, activations, resets)


def continuation(op: ModularityOperator, config: SolverConfig) -> DetectionResult:
    """Full pipeline: spectral start, ARPPG over an increasing lambda path, rounding.

    The path stops once a round improves the penalized objective of its warm start,
    both evaluated at that round's lambda, by less than 1e-6 relative; the better of
    the two is rounded. With ``restarts`` > 1 the spectral start's first q-1 columns
    are also randomly rotated and the best final objective wins, ties going to the
    lowest restart index.
    """
    started = time.perf_counter()
    lipschitz = estimate_lipschitz(op, seed=config.seed)
    x0 = init_spectral(op, config.q)
    rng = np.random.default_rng(config.seed)
    starts = [x0]
    for _ in range(config.restarts - 1):
        rotated = x0.X.copy()
        rotated[:, :-1] = rotated[:, :-1] @ random_rotation(config.q - 1, rng)
        starts.append(FeasiblePoint(rotated))

    if config.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            runs = list(pool.map(lambda start: _continue_from(op, config, start, lipschitz), starts))
    else:
        runs = [_continue_from(op, config, start, lipschitz) for start in starts]

    best_index = max(range(len(runs)), key=lambda i: (runs[i].value, -i))
    best = runs[best_index]
    partition = round_to_assignment(best.x)
    modularity = modularity_quadratic(op, partition.assignment_matrix()) / op.two_m
    wall_time = time.perf_counter() - started
    logger.info(
        f"Detected {partition.n_communities} communities, Q={modularity:.6f}, "
        f"restart {best_index}, {wall_time:.2f}s"
    )
    return DetectionResult(
        partition=partition,
        x_star=best.x,
        objective_trace=best.trace,
        lambda_path=best.lambda_path,
        modularity=modularity,
        penalized_objective=best.value,
        iterations=best.iterations,
        wall_time=wall_time,
        row_dominance=row_dominance(best.x),
        safeguard_activations=best.safeguard_activations,
        momentum_resets=best.momentum_resets,
        restart_index=best_index,
    )
