import logging
from types import SimpleNamespace

import numpy as np
import pytest

import solver
from bench import IdealGraphSpec, ideal_graph
from conftest import dense_modularity, top_restricted_eigenvalues
from exceptions import InputError
from graph import ModularityOperator, modularity_quadratic, modularity_score
from manifold import stiefel_drift
from metrics import nmi
from models import Graph, SolverConfig
from solver import (
    LIPSCHITZ_FLOOR,
    MAX_STEP,
    SolverState,
    arppg,
    continuation,
    estimate_lipschitz,
    init_spectral,
    momentum_next,
    round_to_assignment,
    row_dominance,
    safeguard,
)


@pytest.fixture(scope="module")
def ideal():
    graph, truth = ideal_graph(IdealGraphSpec((5, 6, 7)))
    return graph, truth, ModularityOperator.from_graph(graph)


def test_lipschitz_estimate_within_two_percent(karate, karate_op):
    M = dense_modularity(karate[0].adjacency)
    spectral_norm = np.max(np.abs(np.linalg.eigvalsh(M)))
    assert estimate_lipschitz(karate_op) == pytest.approx(2 * spectral_norm, rel=0.02)


def test_lipschitz_floor_for_zero_operator():
    zero = SimpleNamespace(n=5, apply=lambda v: np.zeros_like(v))
    assert estimate_lipschitz(zero) == LIPSCHITZ_FLOOR
    assert solver._step_size(SolverConfig(q=2), LIPSCHITZ_FLOOR) == MAX_STEP


def test_momentum_recurrence():
    t = 1.0
    for _ in range(200):
        t_next = momentum_next(t)
        assert abs(t_next**2 - t_next - t**2) <= 1e-12 * max(1.0, t**2)
        assert t_next > t
        t = t_next


def test_spectral_start_reaches_top_eigenvalues(karate, karate_op):
    M = dense_modularity(karate[0].adjacency)
    for q in (2, 3, 4):
        x0 = init_spectral(karate_op, q)
        assert x0.certificate <= 1e-8
        assert stiefel_drift(x0.X) <= 1e-10
        expected = top_restricted_eigenvalues(M, q - 1).sum()
        assert modularity_quadratic(karate_op, x0.X) == pytest.approx(expected, abs=1e-8)


def test_spectral_start_warns_without_positive_eigenvalues(caplog):
    clique = Graph.from_edges(5, [(u, v) for u in range(5) for v in range(u + 1, 5)])
    x0 = init_spectral(ModularityOperator.from_graph(clique), 2)
    assert x0.certificate <= 1e-8
    assert "positive eigenvalues" in caplog.text


def test_spectral_start_rejects_q_not_below_n(karate_op):
    with pytest.raises(InputError):
        init_spectral(karate_op, karate_op.n)


def test_round_breaks_ties_toward_lowest_column():
    X = np.array([[0.5, -0.5, 0.1], [0.1, 0.9, 0.0], [-0.2, 0.7, 0.1]])
    assert round_to_assignment(X).labels.tolist() == [0, 1, 1]


def test_round_drops_empty_columns():
    X = np.array([[0.1, 0.0, 0.9], [0.0, 0.2, 0.8], [0.95, 0.1, 0.0]])
    partition = round_to_assignment(X)
    assert partition.labels.tolist() == [1, 1, 0]
    assert partition.n_communities == 2


def test_row_dominance_of_assignment_like_matrix():
    X = np.eye(6)[:, :3]
    assert row_dominance(SimpleNamespace(X=X)) == pytest.approx(1.0)


def test_safeguard_backtracks_and_resets_momentum(karate_op, monkeypatch):
    x0 = init_spectral(karate_op, 2)
    config = SolverConfig(q=2, beta=0.5)
    values = iter([0.0, 1.0, 1.0, -1.0])
    monkeypatch.setattr(solver, "penalized_objective", lambda op, X, lam: next(values))

    state = SolverState(x=x0, y=x0, z=x0, t=3.0, k=5, F_x=10.0)
    updated = safeguard(state, karate_op, config, lam=0.05)

    assert updated.last_alpha == pytest.approx(0.25)
    assert updated.t == 1.0
    assert updated.F_x == -1.0
    assert updated.safeguard_activations == 1
    assert updated.x is updated.y is updated.z
    assert updated.x is not x0
    assert updated.safeguard_values == (-1.0,)
    assert not updated.stalled


def test_safeguard_keeps_state_without_improvement(karate_op):
    x0 = init_spectral(karate_op, 2)
    state = SolverState(x=x0, y=x0, z=x0, t=3.0, k=5, F_x=-1e9)
    updated = safeguard(state, karate_op, SolverConfig(q=2), lam=0.05)
    assert updated.t == 3.0
    assert updated.x is x0
    assert updated.safeguard_activations == 0
    assert updated.safeguard_values == (-1e9,)
    assert not updated.stalled


def test_safeguard_flags_window_without_progress(karate_op, monkeypatch, caplog):
    x0 = init_spectral(karate_op, 2)
    monkeypatch.setattr(solver, "penalized_objective", lambda op, X, lam: 0.0)
    state = SolverState(x=x0, y=x0, z=x0, t=2.0, k=10, F_x=0.0)
    with caplog.at_level(logging.INFO, logger="solver"):
        updated = safeguard(state, karate_op, SolverConfig(q=2), lam=0.05)
    assert updated.stalled
    assert updated.x is x0
    assert updated.last_alpha < 1e-16
    assert "underflow" in caplog.text


def test_state_rejects_momentum_below_one(karate_op):
    x0 = init_spectral(karate_op, 2)
    with pytest.raises(InputError):
        SolverState(x=x0, y=x0, z=x0, t=0.5, k=0, F_x=0.0)


def test_arppg_stops_at_stationary_start(ideal):
    _, _, op = ideal
    x0 = init_spectral(op, 3)
    result = arppg(op, SolverConfig(q=3), x0, lam=0.0)
    assert result.converged
    assert result.iterations <= 1
    assert len(result.trace) == result.iterations + 1
    np.testing.assert_allclose(result.x.X, x0.X, atol=1e-10)


def test_arppg_iterates_stay_feasible(karate_op):
    x0 = init_spectral(karate_op, 3)
    config = SolverConfig(q=3, max_outer_iter=60, check_feasibility=True)
    result = arppg(karate_op, config, x0, lam=0.05)
    assert result.x.certificate <= 1e-8
    assert stiefel_drift(result.x.X) <= 1e-10
    assert len(result.trace) == result.iterations + 1


def test_continuation_recovers_ideal_communities(ideal):
    graph, truth, op = ideal
    result = continuation(op, SolverConfig(q=3))
    assert result.partition.same_as(truth)
    assert nmi(result.partition, truth) == pytest.approx(1.0, abs=1e-12)
    assert result.lambda_path[0] == 0.05
    assert all(b > a for a, b in zip(result.lambda_path, result.lambda_path[1:]))


def test_unpenalized_run_keeps_spectral_value(ideal):
    graph, _, op = ideal
    result = continuation(op, SolverConfig(q=3, lambda0=0.0))
    expected = top_restricted_eigenvalues(dense_modularity(graph.adjacency), 2).sum()
    assert result.lambda_path == [0.0, 0.0]
    assert result.penalized_objective == pytest.approx(expected, abs=1e-6)


def test_continuation_is_deterministic(karate_op):
    config = SolverConfig(q=2, restarts=3, seed=4)
    first = continuation(karate_op, config)
    second = continuation(karate_op, SolverConfig(q=2, restarts=3, seed=4, workers=3))
    assert np.array_equal(first.partition.labels, second.partition.labels)
    assert first.objective_trace == second.objective_trace
    assert first.restart_index == second.restart_index


def test_momentum_closed_form_values():
    assert momentum_next(1.0) == pytest.approx(1.6180339887, abs=1e-10)
    # t'(t' - 1) = t^2 = 2.618034 gives 2.19353
    assert momentum_next(1.618034) == pytest.approx(2.19353, abs=1e-4)


def test_lipschitz_estimate_on_two_disjoint_edges():
    op = ModularityOperator.from_graph(Graph.from_edges(4, [(0, 1), (2, 3)]))
    assert estimate_lipschitz(op) / 2 == pytest.approx(1.0, rel=0.02)


def test_rounding_is_invariant_to_column_permutation(karate, rng):
    graph, _ = karate
    X = rng.standard_normal((graph.n, 4))
    permuted = X[:, rng.permutation(4)]
    assert round_to_assignment(permuted).same_as(round_to_assignment(X))
    assert modularity_score(graph, round_to_assignment(permuted)) == pytest.approx(
        modularity_score(graph, round_to_assignment(X))
    )


def test_arppg_terminates_on_karate_two_way_split(karate_op):
    config = SolverConfig(q=2)
    result = arppg(karate_op, config, init_spectral(karate_op, 2), lam=0.05)
    assert result.converged
    assert result.iterations < config.max_outer_iter
    assert len(result.trace) == result.iterations + 1


@pytest.mark.parametrize("q, lam", [(2, 0.05), (3, 0.1), (4, 0.3)])
def test_safeguard_values_never_increase(karate_op, q, lam):
    result = arppg(karate_op, SolverConfig(q=q, max_outer_iter=300), init_spectral(karate_op, q), lam=lam)
    values = result.safeguard_values
    assert len(values) >= 1
    assert all(later <= earlier for earlier, later in zip(values, values[1:]))


def test_continuation_grows_lambda_while_rounds_improve(karate_op):
    result = continuation(karate_op, SolverConfig(q=2))
    assert len(result.lambda_path) > 2
    assert result.lambda_path[1] == pytest.approx(0.075)


def test_continuation_compares_rounds_at_the_same_lambda(karate_op, monkeypatch):
    # each round returns its warm start unchanged, so the first comparison stops the path
    def idle(op, config, x0, lam, lipschitz=None):
        return solver.ArppgResult(x=x0, trace=[0.0], iterations=1, converged=True)

    monkeypatch.setattr(solver, "arppg", idle)
    result = continuation(karate_op, SolverConfig(q=3))
    assert result.lambda_path == [0.05, 0.075]
    x0 = init_spectral(karate_op, 3)
    np.testing.assert_allclose(result.x_star.X, x0.X)
    expected = modularity_quadratic(karate_op, x0.X) - 0.075 * np.abs(x0.X).sum()
    assert result.penalized_objective == pytest.approx(expected)
