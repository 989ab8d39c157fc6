"""Graph core: construction, structural queries, relabeling, edge-list I/O."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spilltest.errors import (
    LengthMismatch,
    NotABijection,
    OutOfRangeVertex,
    ParseError,
    SelfLoop,
)
from spilltest.graph import (
    Graph,
    VertexPermutation,
    bfs_distances,
    degree_sequence,
    induced_subgraph,
    labelled_degrees,
    new_graph,
    read_edge_list,
    relabel,
    write_edge_list,
)

from oracles import pairwise_distances


def random_graph(n, p, rng):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph(n, edges)


class TestConstruction:
    def test_dedup_and_symmetry(self):
        g = new_graph(3, [(0, 1), (1, 0), (1, 2)])
        assert g.edges() == [(0, 1), (1, 2)]
        assert g.edge_count == 2

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoop):
            new_graph(2, [(0, 0)])

    def test_empty_graph(self):
        g = new_graph(0, [])
        assert g.n == 0
        assert g.edge_count == 0

    def test_out_of_range_endpoint(self):
        with pytest.raises(OutOfRangeVertex):
            new_graph(3, [(0, 3)])
        with pytest.raises(OutOfRangeVertex):
            new_graph(3, [(-1, 2)])

    def test_equality_ignores_input_order(self):
        a = Graph(4, [(2, 3), (0, 1)])
        b = Graph(4, [(1, 0), (3, 2), (0, 1)])
        assert a == b
        assert hash(a) == hash(b)


class TestDegrees:
    def test_triangle(self):
        g = Graph(3, [(0, 1), (1, 2), (0, 2)])
        assert labelled_degrees(g).tolist() == [2, 2, 2]

    def test_path(self):
        g = Graph(3, [(0, 1), (1, 2)])
        assert labelled_degrees(g).tolist() == [1, 2, 1]

    def test_empty(self):
        g = Graph(4, [])
        assert labelled_degrees(g).tolist() == [0, 0, 0, 0]

    def test_star_sequence(self):
        g = Graph(4, [(0, 1), (0, 2), (0, 3)])
        assert degree_sequence(g).tolist() == [1, 1, 1, 3]

    def test_nonisomorphic_graphs_share_sequence(self):
        # one 6-cycle vs two disjoint triangles: same sorted degrees
        c6 = Graph(6, [(i, (i + 1) % 6) for i in range(6)])
        two_c3 = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
        assert degree_sequence(c6).tolist() == degree_sequence(two_c3).tolist()
        assert c6 != two_c3

    def test_empty_two_vertices(self):
        assert degree_sequence(Graph(2, [])).tolist() == [0, 0]

    def test_handshake(self, rng):
        for _ in range(20):
            g = random_graph(12, 0.3, rng)
            d = labelled_degrees(g)
            assert d.sum() == 2 * g.edge_count
            assert d.max(initial=0) <= g.n - 1


class TestBfs:
    def test_path_from_end(self):
        g = Graph(3, [(0, 1), (1, 2)])
        assert bfs_distances(g, 0).tolist() == [0.0, 1.0, 2.0]

    def test_disconnected_inf(self):
        g = Graph(3, [(0, 1)])
        d = bfs_distances(g, 0)
        assert d[0] == 0 and d[1] == 1
        assert np.isinf(d[2])

    def test_triangle_center(self):
        g = Graph(3, [(0, 1), (1, 2), (0, 2)])
        assert bfs_distances(g, 1).tolist() == [1.0, 0.0, 1.0]

    def test_source_out_of_range(self):
        with pytest.raises(OutOfRangeVertex):
            bfs_distances(Graph(2, []), 2)

    def test_matches_floyd_warshall(self, rng):
        for _ in range(10):
            g = random_graph(10, 0.25, rng)
            want = pairwise_distances(g.n, g.edges())
            for s in range(g.n):
                assert np.array_equal(bfs_distances(g, s), want[s])

    def test_triangle_inequality_within_component(self, rng):
        g = random_graph(14, 0.2, rng)
        dist = np.array([bfs_distances(g, s) for s in range(g.n)])
        for _ in range(200):
            i, j, k = rng.integers(0, g.n, size=3)
            if np.isfinite(dist[i, j]) and np.isfinite(dist[j, k]):
                assert dist[i, k] <= dist[i, j] + dist[j, k]


class TestInducedSubgraph:
    def test_triangle_pair(self):
        g = Graph(3, [(0, 1), (1, 2), (0, 2)])
        sub, idx = induced_subgraph(g, {0, 1})
        assert sub.n == 2 and sub.edges() == [(0, 1)]
        assert idx.tolist() == [0, 1]

    def test_full_set_is_identity(self, rng):
        g = random_graph(8, 0.4, rng)
        sub, idx = induced_subgraph(g, range(8))
        assert sub == g
        assert idx.tolist() == list(range(8))

    def test_star_leaves_empty(self):
        g = Graph(4, [(0, 1), (0, 2), (0, 3)])
        sub, idx = induced_subgraph(g, {1, 2, 3})
        assert sub.n == 3 and sub.edge_count == 0
        assert idx.tolist() == [1, 2, 3]

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeVertex):
            induced_subgraph(Graph(3, []), {0, 5})

    def test_monotone_counts(self, rng):
        g = random_graph(10, 0.4, rng)
        sub, idx = induced_subgraph(g, {1, 3, 4, 8})
        assert sub.edge_count <= g.edge_count
        assert (sub.degrees <= g.degrees[idx]).all()


class TestRelabel:
    def test_identity(self, rng):
        g = random_graph(7, 0.4, rng)
        assert relabel(g, np.arange(7)) == g

    def test_path_reversal(self):
        g = Graph(3, [(0, 1), (1, 2)])
        assert relabel(g, [2, 1, 0]) == g

    def test_round_trip_inverse(self, rng):
        g = random_graph(9, 0.35, rng)
        pi = VertexPermutation(rng.permutation(9))
        assert relabel(relabel(g, pi), pi.inverse()) == g

    def test_degree_transport(self, rng):
        g = random_graph(9, 0.35, rng)
        pi = rng.permutation(9)
        h = relabel(g, pi)
        assert (labelled_degrees(h)[pi] == labelled_degrees(g)).all()
        assert degree_sequence(h).tolist() == degree_sequence(g).tolist()
        assert h.edge_count == g.edge_count

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            relabel(Graph(3, []), [0, 1])

    def test_not_a_bijection(self):
        with pytest.raises(NotABijection):
            relabel(Graph(3, []), [0, 0, 1])
        with pytest.raises(NotABijection):
            VertexPermutation([0, 2, 3])


class TestEdgeListIO:
    def test_documented_format(self, tmp_path):
        path = tmp_path / "g.edgelist"
        path.write_text("3\n0 1\n1 2\n")
        g = read_edge_list(path)
        assert g.n == 3 and g.edges() == [(0, 1), (1, 2)]

    def test_round_trip(self, tmp_path, rng):
        g = random_graph(15, 0.25, rng)
        path = tmp_path / "g.edgelist"
        write_edge_list(g, path)
        assert read_edge_list(path) == g

    def test_comments_blanks_duplicates(self, tmp_path):
        path = tmp_path / "g.edgelist"
        path.write_text("# header\n4\n\n0 1\n1 0\n# trailing\n2 3\n")
        g = read_edge_list(path)
        assert g.edges() == [(0, 1), (2, 3)]

    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / "bad.edgelist"
        path.write_text("3\n0 1\n0 x\n")
        with pytest.raises(ParseError) as err:
            read_edge_list(path)
        assert err.value.line_no == 3

    def test_self_loop_and_range_rejected(self, tmp_path):
        p1 = tmp_path / "loop.edgelist"
        p1.write_text("3\n1 1\n")
        with pytest.raises(SelfLoop):
            read_edge_list(p1)
        p2 = tmp_path / "range.edgelist"
        p2.write_text("3\n0 7\n")
        with pytest.raises(OutOfRangeVertex):
            read_edge_list(p2)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_relabel_preserves_isomorphism_invariants(data):
    n = data.draw(st.integers(min_value=1, max_value=9))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = data.draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    g = Graph(n, [p for p, keep in zip(pairs, mask) if keep])
    perm = data.draw(st.permutations(range(n)))
    h = relabel(g, list(perm))
    assert h.edge_count == g.edge_count
    assert degree_sequence(h).tolist() == degree_sequence(g).tolist()
    pi = np.asarray(perm)
    assert (labelled_degrees(h)[pi] == labelled_degrees(g)).all()
