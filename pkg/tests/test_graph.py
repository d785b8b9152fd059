import itertools
import math

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpnn_lab.graph import (
    GraphSizeError,
    LabeledGraph,
    canonical_form,
    canonical_relabeling,
    complete_graph,
    connected_components,
    cycle_graph,
    diameter,
    edge_cut,
    format_graph,
    is_connected,
    is_isomorphic,
    min_separating_cut,
    parse_graph,
    path_graph,
    read_graphs,
    star_graph,
    write_graphs,
)
from oracles import (
    brute_canonical,
    brute_isomorphic,
    brute_min_edge_separator,
    floyd_warshall,
    graphs,
    is_connected_uf,
)


class TestLabeledGraph:
    def test_edges_normalized(self):
        g = LabeledGraph(3, ((2, 0), (1, 2)))
        assert g.edges == ((0, 2), (1, 2))

    @pytest.mark.parametrize("edges", [((0, 0),), ((0, 1), (1, 0)), ((0, 3),), ((-1, 1),)])
    def test_rejects_bad_edges(self, edges):
        with pytest.raises(ValueError):
            LabeledGraph(3, edges)

    def test_feature_rows_checked(self):
        with pytest.raises(ValueError):
            LabeledGraph(2, (), ((1,),))
        with pytest.raises(ValueError):
            LabeledGraph(2, (), ((1,), (1, 0)))

    def test_size_limit(self):
        with pytest.raises(GraphSizeError):
            LabeledGraph(33)

    def test_relabel_moves_features(self):
        g = LabeledGraph(3, ((0, 1),), ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
        h = g.relabel([2, 0, 1])
        assert h.edges == ((0, 2),)
        assert h.features[2] == (1, 0, 0)
        assert h.features[0] == (0, 1, 0)

    def test_induced(self):
        g = cycle_graph(5)
        assert g.induced([0, 1, 2]).edges == ((0, 1), (1, 2))


class TestCanonicalForm:
    def test_path_relabelings_match(self):
        assert canonical_form(LabeledGraph(3, ((0, 1), (1, 2)))) == canonical_form(LabeledGraph(3, ((2, 0), (0, 1))))

    def test_triangle_vs_path(self):
        assert canonical_form(complete_graph(3)) != canonical_form(path_graph(3))

    def test_star_has_one_code_over_all_relabelings(self):
        star = star_graph(4)
        codes = {canonical_form(star.relabel(p)) for p in itertools.permutations(range(4))}
        assert len(codes) == 1

    def test_code_layout(self):
        code = canonical_form(complete_graph(4))
        assert code[0] == 4
        assert len(code) == 2
        assert code[1] == 0b11111100

    def test_size_limit(self):
        with pytest.raises(GraphSizeError):
            canonical_form(path_graph(17))
        assert canonical_form(path_graph(17), max_nodes=20)

    def test_features_ignored(self):
        g = path_graph(3)
        assert canonical_form(g) == canonical_form(g.with_features(((1,), (2,), (3,))))

    @settings(max_examples=300, deadline=None)
    @given(graphs(max_nodes=8), st.data())
    def test_relabeling_invariance(self, g, data):
        perm = data.draw(st.permutations(list(range(g.n))))
        assert canonical_form(g) == canonical_form(g.relabel(perm))

    @settings(max_examples=200, deadline=None)
    @given(graphs(max_nodes=6), graphs(max_nodes=6))
    def test_matches_brute_force(self, g, h):
        if g.n != h.n:
            return
        same = brute_canonical(g) == brute_canonical(h)
        assert (canonical_form(g) == canonical_form(h)) == same
        assert is_isomorphic(g, h) == same

    @settings(max_examples=100, deadline=None)
    @given(graphs(max_nodes=9))
    def test_relabeling_gives_representative(self, g):
        rep = g.relabel(canonical_relabeling(g))
        assert canonical_form(rep) == canonical_form(g)
        # the representative is a fixed point up to automorphism
        assert rep.relabel(canonical_relabeling(rep)).edges == rep.edges

    def test_all_five_node_graphs_against_orbits(self):
        # every labeled 5-node graph: codes group exactly like brute-force canonical keys
        pairs = list(itertools.combinations(range(5), 2))
        by_code, by_key = {}, {}
        for mask in range(1 << len(pairs)):
            g = LabeledGraph(5, tuple(p for k, p in enumerate(pairs) if mask >> k & 1))
            by_code.setdefault(canonical_form(g), set()).add(mask)
            by_key.setdefault(brute_canonical(g), set()).add(mask)
        assert sorted(map(sorted, by_code.values())) == sorted(map(sorted, by_key.values()))
        assert len(by_code) == 34

    @settings(max_examples=40, deadline=None)
    @given(graphs(min_nodes=6, max_nodes=10), st.data())
    def test_agrees_with_networkx(self, g, data):
        other = data.draw(graphs(min_nodes=g.n, max_nodes=g.n))
        expected = nx.is_isomorphic(g.to_networkx(), other.to_networkx())
        assert is_isomorphic(g, other) == expected

    def test_regular_pairs_are_told_apart(self):
        # the 6-cycle and two triangles, and the cube vs. the twisted cube-like 3-regular 8-node graph
        two_triangles = LabeledGraph(6, ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)))
        assert not is_isomorphic(cycle_graph(6), two_triangles)
        cube = LabeledGraph.from_edges(8, nx.convert_node_labels_to_integers(nx.hypercube_graph(3)).edges)
        moebius = LabeledGraph.from_edges(8, [(i, (i + 1) % 8) for i in range(8)] + [(i, i + 4) for i in range(4)])
        assert not is_isomorphic(cube, moebius)
        assert is_isomorphic(moebius, moebius.relabel([3, 1, 4, 0, 5, 2, 7, 6]))


class TestIsIsomorphic:
    def test_identity(self):
        g = cycle_graph(5)
        assert is_isomorphic(g, g)

    def test_cycle_vs_star(self):
        assert not is_isomorphic(cycle_graph(4), star_graph(4))

    @settings(max_examples=50, deadline=None)
    @given(graphs(min_nodes=6, max_nodes=6), st.data())
    def test_random_relabeling(self, g, data):
        perm = data.draw(st.permutations(list(range(6))))
        h = g.relabel(perm)
        assert brute_isomorphic(g, h)
        assert is_isomorphic(g, h)


class TestCuts:
    def test_path_cut(self):
        assert edge_cut(path_graph(4), {0, 1}, {2, 3}, bidirectional=False) == 1
        assert edge_cut(path_graph(4), {0, 1}, {2, 3}, bidirectional=True) == 2

    def test_complete_cut(self):
        assert edge_cut(complete_graph(4), {0, 1}, {2, 3}, bidirectional=False) == 4

    @pytest.mark.parametrize("a,b", [({0}, {0, 1}), (set(), {1})])
    def test_bad_parts(self, a, b):
        with pytest.raises(ValueError):
            edge_cut(path_graph(3), a, b)
        with pytest.raises(ValueError):
            min_separating_cut(path_graph(3), a, b)

    def test_min_separating_examples(self):
        assert min_separating_cut(path_graph(4), {0}, {3}) == 1
        assert min_separating_cut(complete_graph(4), {0}, {3}) == 3
        halves = LabeledGraph(4, ((0, 1), (2, 3)))
        assert min_separating_cut(halves, {0, 1}, {2, 3}) == 0

    @settings(max_examples=60, deadline=None)
    @given(graphs(min_nodes=3, max_nodes=6), st.data())
    def test_min_separating_vs_brute_force(self, g, data):
        nodes = list(range(g.n))
        a = data.draw(st.sets(st.sampled_from(nodes), min_size=1, max_size=g.n - 1))
        rest = [v for v in nodes if v not in a]
        b = data.draw(st.sets(st.sampled_from(rest), min_size=1))
        if g.num_edges > 10:
            return
        assert min_separating_cut(g, a, b) == brute_min_edge_separator(g, a, b)
        assert min_separating_cut(g, a, b, bidirectional=True) == 2 * brute_min_edge_separator(g, a, b)

    @settings(max_examples=80, deadline=None)
    @given(graphs(min_nodes=2, max_nodes=8), st.data())
    def test_full_partition_cut_equals_flow(self, g, data):
        a = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=g.n - 1))
        b = set(range(g.n)) - a
        assert edge_cut(g, a, b, bidirectional=False) == min_separating_cut(g, a, b)


class TestMetrics:
    def test_examples(self):
        assert diameter(LabeledGraph(1)) == 0
        for v in range(1, 9):
            assert diameter(path_graph(v)) == v - 1
        assert math.isinf(diameter(LabeledGraph(2)))
        assert not is_connected(LabeledGraph(2))
        assert is_connected(star_graph(6))

    @settings(max_examples=100, deadline=None)
    @given(graphs(max_nodes=8))
    def test_diameter_vs_floyd_warshall(self, g):
        d = floyd_warshall(g)
        assert diameter(g) == max(max(row) for row in d)

    @settings(max_examples=100, deadline=None)
    @given(graphs(max_nodes=9))
    def test_connectivity_vs_union_find(self, g):
        assert is_connected(g) == is_connected_uf(g.n, g.edges)
        comps = connected_components(g)
        assert sorted(v for c in comps for v in c) == list(range(g.n))
        assert (len(comps) == 1) == is_connected(g)

    @settings(max_examples=60, deadline=None)
    @given(graphs(min_nodes=2, max_nodes=8, connected=True))
    def test_connected_diameter_bounds(self, g):
        assert 1 <= diameter(g) <= g.n - 1


class TestTextFormat:
    def test_example_line(self):
        g = parse_graph("4;0-1,1-2,2-3;10,01,10,01")
        assert g.edges == ((0, 1), (1, 2), (2, 3))
        assert g.features == ((1, 0), (0, 1), (1, 0), (0, 1))
        assert format_graph(g) == "4;0-1,1-2,2-3;10,01,10,01"

    @pytest.mark.parametrize("line", [
        "3;1-0;", "3;0-1,0-1;", "3;0-2,0-1;", "03;0-1;", "3;0-1", "3;0-01;", "2;0-1;1,", "2;;1X,10", "a;;",
    ])
    def test_rejects_non_normalized(self, line):
        with pytest.raises(ValueError):
            parse_graph(line)

    @settings(max_examples=150, deadline=None)
    @given(graphs(max_nodes=12), st.data())
    def test_round_trip(self, g, data):
        if data.draw(st.booleans()):
            width = data.draw(st.integers(1, 4))
            rows = data.draw(st.lists(st.lists(st.integers(0, 35), min_size=width, max_size=width),
                                      min_size=g.n, max_size=g.n))
            g = g.with_features(rows)
        line = format_graph(g)
        assert parse_graph(line) == g
        assert format_graph(parse_graph(line)) == line

    def test_file_round_trip(self, tmp_path):
        gs = [path_graph(3), complete_graph(4), LabeledGraph(1)]
        write_graphs(tmp_path / "g.txt", gs)
        assert read_graphs(tmp_path / "g.txt") == gs
