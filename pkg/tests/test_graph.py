import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netbayes.graph import (
    Graph,
    GraphFormatError,
    density,
    edge_count,
    from_edge_list,
    from_matrix_text,
    neighbors,
    read_edge_list,
    read_graph,
    toggle,
)

from conftest import complete, load_dolphins, path


def test_matrix_text_path_graph():
    g = from_matrix_text("0 1 0\n1 0 1\n0 1 0\n")
    assert g.n == 3 and edge_count(g) == 2
    assert g == path(3)


def test_matrix_text_skips_header_lines():
    text = "some header\nanother one\n0 1\n1 0\n"
    assert from_matrix_text(text, skip_lines=2).edge_count() == 1


@pytest.mark.parametrize(
    "text, fragment, line",
    [
        ("0 1 0\n1 0 2\n0 2 0\n", "non-binary", 2),
        ("0 1\n1 0 0\n", "non-square", 2),
        ("1 0\n0 0\n", "diagonal", 1),
        ("0 1\n0 0\n", "asymmetric", 1),
    ],
)
def test_matrix_text_errors_carry_line(text, fragment, line):
    with pytest.raises(GraphFormatError, match=fragment) as info:
        from_matrix_text(text)
    assert info.value.line == line


def test_directed_matrix_keeps_asymmetry():
    g = from_matrix_text("0 1\n0 0\n", directed=True)
    assert g.has_edge(0, 1) and not g.has_edge(1, 0)


def test_edge_list_examples():
    assert from_edge_list([(1, 2), (2, 3)], 3) == path(3)
    empty = from_edge_list([], 5)
    assert empty.edge_count() == 0 and empty.n == 5
    with pytest.raises(GraphFormatError, match="self-loop"):
        from_edge_list([(1, 1)], 2)
    with pytest.raises(GraphFormatError, match="out of range"):
        from_edge_list([(1, 4)], 3)


def test_edge_list_duplicates_are_idempotent():
    assert from_edge_list([(1, 2), (2, 1), (1, 2)], 3).edge_count() == 1


def test_toggle_examples():
    g = Graph.empty(3)
    g1 = toggle(g, 0, 1)
    assert g1.edge_count() == 1 and g.edge_count() == 0
    assert toggle(g1, 0, 1) == g
    d = toggle(Graph.empty(3, directed=True), 0, 1)
    assert d.has_edge(0, 1) and not d.has_edge(1, 0)
    with pytest.raises(ValueError):
        toggle(g, 1, 1)
    with pytest.raises(IndexError):
        toggle(g, 0, 3)


def test_counts_on_complete_and_empty():
    k4 = complete(4)
    assert k4.edge_count() == 6 and density(k4) == 1.0
    assert neighbors(k4, 0) == {1, 2, 3}
    assert np.all(Graph.empty(4).degree() == 0)


def test_directed_counts():
    g = from_edge_list([(1, 2), (2, 1), (1, 3)], 3, directed=True)
    assert g.edge_count() == 3
    assert g.density() == pytest.approx(3 / 6)
    assert g.degree(0) == 2


def test_rows_are_read_only():
    g = path(4)
    with pytest.raises(ValueError):
        g.rows[0, 0] = 0
    with pytest.raises(ValueError):
        g.adjacency[0, 1] = 0


def test_packing_beyond_one_word():
    rng = np.random.default_rng(1)
    n = 130
    A = np.triu(rng.random((n, n)) < 0.1, 1).astype(np.uint8)
    A = A + A.T
    g = Graph(A)
    assert g.rows.shape == (n, 3)
    h = Graph._from_rows(g.rows, n, False)
    assert np.array_equal(h.adjacency, A)
    assert all(g.has_edge(i, j) == bool(A[i, j]) for i in range(0, n, 7) for j in range(0, n, 5))


def test_edge_list_text_round_trip_keeps_isolated_nodes(tmp_path):
    g = from_edge_list([(1, 2)], 5, directed=True)
    f = tmp_path / "g.txt"
    f.write_text(g.to_edge_list_text())
    assert read_edge_list(f) == g
    assert read_graph(io.StringIO(g.to_matrix_text()), directed=True) == g


def test_edge_list_parse_errors():
    with pytest.raises(GraphFormatError) as info:
        read_edge_list(io.StringIO("1 2\n2 x\n"))
    assert info.value.line == 2
    with pytest.raises(GraphFormatError, match="1-based"):
        read_edge_list(io.StringIO("0 1\n"))


@st.composite
def undirected_graphs(draw, max_n=12):
    n = draw(st.integers(2, max_n))
    bits = draw(st.lists(st.booleans(), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    A = np.zeros((n, n), dtype=np.uint8)
    A[np.triu_indices(n, 1)] = bits
    return Graph(A + A.T)


@settings(max_examples=60, deadline=None)
@given(undirected_graphs())
def test_edge_list_round_trip(g):
    pairs = [(i + 1, j + 1) for i, j in g.edges()]
    assert from_edge_list(pairs, g.n) == g
    assert from_matrix_text(g.to_matrix_text()) == g


@settings(max_examples=60, deadline=None)
@given(undirected_graphs(), st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), max_size=20))
def test_toggle_sequences_keep_symmetry(g, moves):
    for i, j in moves:
        i, j = i % g.n, j % g.n
        if i == j:
            continue
        before = g.edge_count()
        g = toggle(g, i, j)
        assert abs(g.edge_count() - before) == 1
        assert np.array_equal(g.adjacency, g.adjacency.T)


def test_dolphin_edge_count_matches_raw_file(dolphins):
    import os

    from conftest import DOLPHIN_ENV, DOLPHIN_SKIP_ENV

    skip = int(os.environ.get(DOLPHIN_SKIP_ENV, "130"))
    with open(os.environ[DOLPHIN_ENV]) as fh:
        lines = fh.read().splitlines()[skip:]
    ones = sum(tok == "1" for line in lines for tok in line.split())
    assert dolphins.n == 62
    assert dolphins.edge_count() == ones // 2
    assert load_dolphins() == dolphins
