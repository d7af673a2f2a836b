import io

import numpy as np
import pytest

from bench import IdealGraphSpec, ideal_adjacency, ideal_optimum
from conftest import dense_modularity
from exceptions import GraphParseError, InputError
from graph import (
    ModularityOperator,
    format_edge_list,
    modularity_apply,
    modularity_quadratic,
    modularity_score,
    parse_edge_list,
    read_edge_list,
)
from models import Graph, Partition


def test_parse_drops_duplicates_and_self_loops():
    text = "# comment line\n1 2\n2 1\n2 3 % trailing comment\n3 3\n\n"
    graph = parse_edge_list(text)
    assert graph.n == 3
    assert graph.m == 2
    assert graph.duplicates_dropped == 1
    assert graph.self_loops_dropped == 1
    assert graph.edges == [(0, 1), (1, 2)]


def test_parse_remaps_integer_labels_in_numeric_order():
    graph = parse_edge_list("10 2\n2 3\n")
    assert graph.labels == ("2", "3", "10")
    assert graph.edges == [(0, 1), (0, 2)]


def test_parse_keeps_first_appearance_for_text_labels():
    graph = parse_edge_list("b a\na c\n")
    assert graph.labels == ("b", "a", "c")
    assert graph.m == 2


def test_parse_one_based_keeps_missing_ids_as_isolated_nodes():
    graph = parse_edge_list("1 2\n2 4\n", one_based=True)
    assert graph.n == 4
    assert graph.labels == ("1", "2", "3", "4")
    assert graph.degree.tolist() == [1, 2, 0, 1]


def test_parse_reports_line_number_of_bad_line():
    with pytest.raises(GraphParseError) as excinfo:
        parse_edge_list("1 2\n2 3 4\n")
    assert excinfo.value.line_number == 2
    assert "line 2" in str(excinfo.value)


@pytest.mark.parametrize("text", ["", "# nothing\n", "1 1\n2 2\n"])
def test_parse_rejects_graphs_without_edges(text):
    with pytest.raises(GraphParseError):
        parse_edge_list(text)


def test_parse_rejects_text_labels_in_positional_mode():
    with pytest.raises(GraphParseError):
        parse_edge_list("a b\n", one_based=False)


def test_parse_accepts_streams():
    graph = parse_edge_list(io.StringIO("0 1\n1 2\n"))
    assert graph.m == 2


def test_read_edge_list_missing_file(tmp_path):
    with pytest.raises(InputError):
        read_edge_list(tmp_path / "absent.edges")


def test_format_edge_list_reparses_to_same_graph(karate):
    graph, _ = karate
    again = parse_edge_list(format_edge_list(graph))
    assert again.labels == graph.labels
    assert again.edges == graph.edges


def test_graph_rejects_asymmetric_adjacency():
    import scipy.sparse as sp

    with pytest.raises(InputError):
        Graph(sp.csr_matrix(np.array([[0, 1], [0, 0]])), ("a", "b"))


def test_apply_matches_dense_matrix(karate, karate_op, rng):
    graph, _ = karate
    M = dense_modularity(graph.adjacency)
    v = rng.standard_normal(graph.n)
    V = rng.standard_normal((graph.n, 3))
    np.testing.assert_allclose(modularity_apply(karate_op, v), M @ v, atol=1e-12)
    np.testing.assert_allclose(karate_op.apply(V), M @ V, atol=1e-12)


def test_quadratic_matches_dense_trace(karate, karate_op, rng):
    graph, _ = karate
    M = dense_modularity(graph.adjacency)
    X = rng.standard_normal((graph.n, 4))
    assert modularity_quadratic(karate_op, X) == pytest.approx(np.trace(X.T @ M @ X), abs=1e-10)


def test_modularity_annihilates_ones(karate_op):
    np.testing.assert_allclose(karate_op.apply(np.ones(karate_op.n)), 0.0, atol=1e-12)


def test_apply_rejects_wrong_dimension(karate_op):
    with pytest.raises(InputError):
        karate_op.apply(np.ones(karate_op.n + 1))


def test_operator_needs_edges():
    with pytest.raises(InputError):
        ModularityOperator.from_adjacency(np.zeros((3, 3)))


def test_modularity_of_two_disjoint_edges():
    graph = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert modularity_score(graph, Partition([0, 0, 1, 1])) == pytest.approx(0.5)


def test_modularity_of_karate_club_split(karate):
    graph, truth = karate
    assert modularity_score(graph, truth) == pytest.approx(0.372, abs=0.001)


def test_modularity_score_checks_sizes(karate):
    graph, _ = karate
    with pytest.raises(InputError):
        modularity_score(graph, Partition([0, 1]))


def test_quadratic_ignores_column_order(karate_op, rng):
    X = rng.standard_normal((34, 4))
    permuted = X[:, rng.permutation(4)]
    assert modularity_quadratic(karate_op, permuted) == pytest.approx(modularity_quadratic(karate_op, X), rel=1e-12)


def test_quadratic_of_ideal_assignment():
    # A = Z Z^T with two blocks of two: sum n_i^2 - sum n_i^4 / sum n_i^2 = 8 - 32 / 8
    spec = IdealGraphSpec((2, 2))
    op = ModularityOperator.from_adjacency(ideal_adjacency(spec))
    Z = Partition([0, 0, 1, 1]).assignment_matrix()
    assert modularity_quadratic(op, Z) == pytest.approx(4.0, abs=1e-12)
    assert modularity_quadratic(op, Z) == pytest.approx(ideal_optimum(spec.sizes), abs=1e-12)
