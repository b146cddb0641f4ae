import numpy as np
import pytest

import mpdag as M
from helpers import load_fixture, random_dag


def test_parse_directed_and_undirected():
    g = M.parse_graph("A -> B\nB -- C\n")
    assert g.directed == {("A", "B")}
    assert g.undirected == {("B", "C")}


def test_comments_blanks_and_isolated_nodes():
    g = M.parse_graph("# header\n\nA -> B  # trailing\nlonely\n")
    assert g.nodes == ("A", "B", "lonely")


def test_duplicate_pair_reports_line_number():
    with pytest.raises(M.GraphParseError) as err:
        M.parse_graph("A -> B\nB -- A\n")
    assert err.value.line_no == 2
    assert "line 2" in str(err.value)


def test_malformed_line_reports_line_number():
    with pytest.raises(M.GraphParseError) as err:
        M.parse_graph("A -> B\nA => B\n")
    assert err.value.line_no == 2


def test_self_loop_rejected():
    with pytest.raises(M.GraphParseError):
        M.parse_graph("A -> A\n")


def test_canonical_render_order(four_mpdag):
    text = M.render_edge_list(four_mpdag.graph)
    assert text.splitlines() == [
        "A -> Y",
        "A -- V1",
        "A -- V2",
        "V1 -- V2",
        "V1 -- Y",
    ]


def test_round_trip_is_exact_on_random_graphs():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p = int(rng.integers(1, 7))
        dag = random_dag(rng, p, 0.5)
        # demote a random subset of edges to undirected
        directed, undirected = [], []
        for e in sorted(dag.directed):
            (undirected if rng.random() < 0.5 else directed).append(e)
        g = M.PartiallyDirectedGraph(dag.nodes, directed, undirected)
        assert M.parse_graph(M.render_edge_list(g)) == g


def test_render_is_input_order_independent():
    a = M.parse_graph("A -> B\nC -- B\n")
    b = M.parse_graph("B -- C\nA -> B\n")
    assert a == b
    assert M.render_edge_list(a) == M.render_edge_list(b)


def test_dot_uses_both_edge_ops(four_mpdag):
    dot = M.render_dot(four_mpdag.graph)
    assert '"A" -> "Y";' in dot
    assert '"A" -- "V1";' in dot
    assert dot.startswith("digraph")


def test_orientation_file_rules():
    assert M.parse_orientations("A -> B\n# c\nB -> C\n") == [("A", "B"), ("B", "C")]
    with pytest.raises(M.GraphParseError):
        M.parse_orientations("A -- B\n")
    with pytest.raises(M.GraphParseError):
        M.parse_orientations("A -> B\nA -> B\n")


def test_fixture_files_parse(four_dag):
    assert len(four_dag.directed) == 5
    assert load_fixture("complete4.txt").undirected == frozenset(
        {("A1", "A2"), ("A1", "V1"), ("A1", "Y"), ("A2", "V1"), ("A2", "Y"), ("V1", "Y")}
    )


def test_graph_json_shape(four_mpdag):
    payload = M.graph_to_json(four_mpdag.graph)
    assert payload["directed"] == [["A", "Y"]]
    assert ["V1", "Y"] in payload["undirected"]
