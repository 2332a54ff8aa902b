import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netlotto.graph import (
    Graph,
    bipartite_partition,
    complete,
    edges_covered,
    erdos_renyi,
    find_odd_cycle,
    format_edge_list,
    line,
    parse_edge_list,
    parse_graph_spec,
    random_bipartite,
    ring,
    sample_erdos_renyi,
    star,
    vertex_cover_complement,
)


def has_odd_closed_walk(n, edges):
    """Odd cycle exists iff some odd power of the adjacency matrix has a
    nonzero trace (an odd closed walk always contains an odd cycle)."""
    a = np.zeros((n, n), dtype=np.int64)
    for i, j in edges:
        a[i, j] = a[j, i] = 1
    reach = np.eye(n, dtype=np.int64)
    for k in range(1, n + 1):
        reach = np.minimum(reach @ a, 1)
        if k % 2 == 1 and np.trace(reach) > 0:
            return True
    return False


def all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1, 1 << len(pairs)):
        yield [p for k, p in enumerate(pairs) if bits >> k & 1]


def test_bipartite_examples():
    part = bipartite_partition(line(5))
    assert (part.part1, part.part2) == ({0, 2, 4}, {1, 3})
    assert bipartite_partition(Graph(3, ((0, 1), (1, 2), (0, 2)))) is None
    part = bipartite_partition(star(6))
    assert (part.part1, part.part2) == ({0}, {1, 2, 3, 4, 5})


def test_isolated_and_component_roots_go_to_part1():
    g = Graph(6, ((1, 2), (4, 3)))
    part = bipartite_partition(g)
    assert {0, 1, 3, 5} <= part.part1
    assert part.part2 == {2, 4}


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_bipartite_matches_odd_walk_oracle_exhaustive(n):
    for edges in all_graphs(n):
        g = Graph(n, tuple(edges))
        part = bipartite_partition(g)
        assert (part is None) == has_odd_closed_walk(n, edges)
        if part is not None:
            part.validate(g)
            d = g.degrees
            assert d[list(part.part1)].sum() == d[list(part.part2)].sum() == g.num_edges
        else:
            cyc = find_odd_cycle(g)
            assert len(cyc) % 2 == 1 and len(set(cyc)) == len(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                assert b in g.adjacency[a]


def test_bipartite_matches_oracle_on_random_seven_node_graphs():
    rng = np.random.default_rng(7)
    for _ in range(400):
        p = rng.uniform(0.1, 0.6)
        g = erdos_renyi(7, p, int(rng.integers(1 << 31)))
        assert (bipartite_partition(g) is None) == has_odd_closed_walk(7, g.edges)


def test_generators():
    g = star(6)
    assert (g.n, g.num_edges, tuple(g.degrees)) == (6, 5, (5, 1, 1, 1, 1, 1))
    g = ring(6)
    assert (g.n, g.num_edges) == (6, 6) and set(g.degrees) == {2}
    assert complete(4).num_edges == 6
    assert line(5).num_edges == 4
    assert bipartite_partition(ring(5)) is None
    for bad in (lambda: star(1), lambda: ring(2), lambda: erdos_renyi(5, 1.5, 0), lambda: erdos_renyi(5, 0.0, 0)):
        with pytest.raises(ValueError):
            bad()


def test_graph_rejects_bad_edges():
    with pytest.raises(ValueError):
        Graph(3, ((0, 0),))
    with pytest.raises(ValueError):
        Graph(3, ((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        Graph(3, ())
    with pytest.raises(ValueError):
        Graph(3, ((0, 3),))


def test_edges_covered_examples():
    assert edges_covered(star(6), {0}) == 5
    assert edges_covered(ring(6), {0}) == 2
    assert edges_covered(ring(6), set()) == 0
    with pytest.raises(IndexError):
        edges_covered(ring(6), {6})


def test_vertex_cover_complement_examples():
    g = line(5)
    assert vertex_cover_complement(g, 2) == {0, 1, 3, 4}
    assert vertex_cover_complement(star(6), 0) == {1, 2, 3, 4, 5}
    assert edges_covered(star(6), vertex_cover_complement(star(6), 0)) == 5
    with pytest.raises(IndexError):
        vertex_cover_complement(g, 5)


@st.composite
def graphs(draw, max_n=9):
    n = draw(st.integers(2, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    return Graph(n, tuple(chosen))


@given(graphs())
def test_cover_and_degree_invariants(g):
    assert g.degrees.sum() == 2 * g.num_edges
    for k in range(g.n):
        assert edges_covered(g, vertex_cover_complement(g, k)) == g.num_edges
    for i in range(g.n):
        for j in g.adjacency[i]:
            assert i in g.adjacency[j]


def test_erdos_renyi_reproducible_and_unbiased():
    a = erdos_renyi(30, 0.2, 11)
    b = erdos_renyi(30, 0.2, 11)
    assert a.edges == b.edges
    counts = np.array([erdos_renyi(30, 0.2, s).num_edges for s in range(400)])
    expected = 0.2 * 30 * 29 / 2
    se = counts.std(ddof=1) / np.sqrt(counts.size)
    assert abs(counts.mean() - expected) < 3 * se


def test_erdos_renyi_redraws_empty_graphs():
    redraws = [sample_erdos_renyi(3, 0.05, s)[1] for s in range(50)]
    assert max(redraws) > 0
    g, r = sample_erdos_renyi(3, 0.05, 0)
    assert g.num_edges >= 1
    assert sample_erdos_renyi(3, 0.05, 0)[0].edges == g.edges


def test_random_bipartite_is_bipartite():
    for s in range(20):
        g = random_bipartite(4, 6, 0.4, s)
        part = bipartite_partition(g)
        assert part is not None


def test_edge_list_roundtrip_and_names():
    g = ring(5)
    assert parse_edge_list(format_edge_list(g)).edges == g.edges
    h = parse_edge_list("# comment\n0 1\n1 2  # trailing\n\n")
    assert h.n == 3 and h.edges == ((0, 1), (1, 2))
    h = parse_edge_list("n 5\n0 1\n")
    assert h.n == 5 and tuple(h.degrees) == (1, 1, 0, 0, 0)
    named = parse_edge_list("b a\na c\n")
    assert named.n == 3 and named.edges == ((0, 1), (1, 2))
    with pytest.raises(ValueError):
        parse_edge_list("0 1 2\n")


def test_graph_spec_parsing(tmp_path):
    assert parse_graph_spec("star:6").num_edges == 5
    assert parse_graph_spec("er:20:0.3", seed=4).edges == erdos_renyi(20, 0.3, 4).edges
    path = tmp_path / "g.txt"
    path.write_text("0 1\n1 2\n")
    assert parse_graph_spec(f"file:{path}").num_edges == 2
    with pytest.raises(ValueError):
        parse_graph_spec("wheel:5")
