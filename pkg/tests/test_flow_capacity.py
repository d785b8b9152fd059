import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpnn_lab.capacity import (
    LayerSpec,
    MpnnSchedule,
    build_flow_network,
    capacity_exact,
    capacity_report,
    capacity_upper_bound,
    gin_capacity,
    separating_cut,
)
from mpnn_lab.flow import FlowNetwork, max_flow
from mpnn_lab.graph import LabeledGraph, complete_graph, path_graph
from mpnn_lab.universe import glue
from oracles import brute_min_cut_arcs, graphs


@st.composite
def small_networks(draw, max_nodes=6, max_arcs=12):
    n = draw(st.integers(2, max_nodes))
    k = draw(st.integers(0, max_arcs))
    net = FlowNetwork()
    for i in range(n):
        net.add_node(i)
    net.source, net.sink = 0, n - 1
    for _ in range(k):
        tail = draw(st.integers(0, n - 2))  # nothing leaves the sink
        head = draw(st.integers(1, n - 1))  # nothing enters the source
        if tail == head:
            continue
        cap = draw(st.one_of(st.integers(0, 9), st.none()))
        net.add_arc(tail, head, cap)
    return net


def _oracle(net: FlowNetwork) -> float:
    arcs = [(a.tail, a.head, a.capacity) for a in net.arcs]
    return brute_min_cut_arcs(net.num_nodes, arcs, net.source, net.sink)


class TestMaxFlow:
    def test_single_arc(self):
        net = FlowNetwork()
        s, t = net.add_node("s"), net.add_node("t")
        net.add_arc(s, t, 7)
        net.source, net.sink = s, t
        assert max_flow(net) == 7

    def test_parallel_paths(self):
        net = FlowNetwork()
        s, a, b, t = (net.add_node(x) for x in "sabt")
        for mid, c in ((a, 2), (b, 3)):
            net.add_arc(s, mid, None)
            net.add_arc(mid, t, c)
        net.source, net.sink = s, t
        assert max_flow(net) == 5

    def test_unbounded(self):
        net = FlowNetwork()
        s, a, t = (net.add_node(x) for x in "sat")
        net.add_arc(s, a, None)
        net.add_arc(a, t, None)
        net.add_arc(s, t, 4)
        net.source, net.sink = s, t
        assert max_flow(net) == float("inf")

    def test_validation(self):
        net = FlowNetwork()
        s, t = net.add_node("s"), net.add_node("t")
        net.add_arc(t, s, 1)
        net.source, net.sink = s, t
        with pytest.raises(ValueError):
            max_flow(net)
        with pytest.raises(ValueError):
            net.add_arc(s, t, -1)

    @settings(max_examples=150, deadline=None)
    @given(small_networks())
    def test_equals_exhaustive_min_cut(self, net):
        assert max_flow(net) == _oracle(net)

    @settings(max_examples=50, deadline=None)
    @given(small_networks(max_nodes=8, max_arcs=12))
    def test_eight_node_networks(self, net):
        assert max_flow(net) == _oracle(net)


class TestSchedule:
    def test_parse_and_format(self):
        s = MpnnSchedule.parse("d=2,w=1,4,m=3,2,gamma=1,s=2")
        assert s.w == (1, 4) and s.m == (3, 2) and s.gamma == (1, 1)
        assert MpnnSchedule.parse(s.format()) == s
        assert MpnnSchedule.parse("w=1/4").m == (1, 4)

    @pytest.mark.parametrize("text", ["d=2", "d=3,w=1/2", "w=1,x=2", "w=-1", "w=2,s=1"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            MpnnSchedule.parse(text)


class TestCapacityFormula:
    def test_examples(self):
        assert capacity_upper_bound(MpnnSchedule.uniform(3, 2), 1) == 6
        assert capacity_upper_bound(MpnnSchedule((1, 4), (3, 2), (1, 1)), 2) == 8
        assert capacity_upper_bound(MpnnSchedule.uniform(4, 5, 3), 0) == 0

    def test_gin_capacity(self):
        assert gin_capacity(4, 2) == 16
        assert gin_capacity(2, 1) == 4
        assert gin_capacity(5, 0) == 0
        assert gin_capacity(3, 2, direction="undirected") == 6


class TestFlowNetwork:
    def test_two_node_network(self):
        net = build_flow_network(path_graph(2), [0], [1], LayerSpec(1, 1, 0))
        assert net.num_nodes == 6
        assert max_flow(net) == 1

    def test_global_node_only_route(self):
        g = LabeledGraph(4, ((0, 1), (2, 3)))
        sched = MpnnSchedule.uniform(1, 9, 9, 5)
        assert capacity_exact(g, [0, 1], [2, 3], sched) == 5
        sched = MpnnSchedule.uniform(1, 2, 1, 5)
        # each node pushes at most m = 1 into the global node
        assert capacity_exact(g, [0, 1], [2, 3], sched) == 2

    def test_path_examples(self):
        g = path_graph(4)
        assert capacity_exact(g, [0, 1], [2, 3], MpnnSchedule.uniform(3, 2)) == 6
        assert capacity_exact(g, [0, 1], [2, 3], MpnnSchedule.uniform(3, 2, 2, 1)) == 9

    def test_barbell(self):
        barbell = glue(complete_graph(3), complete_graph(3), 0, 0)
        sched = MpnnSchedule.uniform(2, 5, 1)
        exact = capacity_exact(barbell, range(3), range(3, 6), sched)
        assert exact == 2 * min(1, 5) * 1
        rep = capacity_report(barbell, list(range(3)), None, sched, "undirected")
        assert rep.exact == rep.upper_bound == 2 and rep.cut == 1
        assert capacity_report(barbell, list(range(3)), None, sched).upper_bound == 4

    def test_separating_cut_direction(self):
        assert separating_cut(complete_graph(4), [0], [3], "undirected") == 3
        assert separating_cut(complete_graph(4), [0], [3]) == 6
        with pytest.raises(ValueError):
            separating_cut(complete_graph(4), [0], [3], "sideways")


@st.composite
def schedules(draw, max_d=4, max_val=4):
    d = draw(st.integers(1, max_d))
    vals = st.lists(st.integers(0, max_val), min_size=d, max_size=d)
    return MpnnSchedule(tuple(draw(vals)), tuple(draw(vals)), tuple(draw(vals)), draw(st.integers(2, 4)))


class TestCapacityProperties:
    @settings(max_examples=200, deadline=None)
    @given(graphs(min_nodes=2, max_nodes=10), schedules(), st.data())
    def test_exact_at_most_upper_bound(self, g, sched, data):
        a = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=g.n - 1))
        b = sorted(set(range(g.n)) - a)
        exact = capacity_exact(g, a, b, sched)
        for direction in ("undirected", "bidirectional"):
            assert exact <= capacity_upper_bound(sched, separating_cut(g, a, b, direction))

    @settings(max_examples=100, deadline=None)
    @given(graphs(min_nodes=1, max_nodes=5, connected=True), graphs(min_nodes=1, max_nodes=5, connected=True),
           st.data(), schedules())
    def test_glued_bridge_is_tight(self, ga, gb, data, sched):
        u = data.draw(st.integers(0, ga.n - 1))
        v = data.draw(st.integers(0, gb.n - 1))
        g = glue(ga, gb, u, v)
        sched = MpnnSchedule(sched.w, sched.m, (0,) * sched.d, sched.s)
        part_a, part_b = range(ga.n), range(ga.n, g.n)
        assert capacity_exact(g, part_a, part_b, sched) == capacity_upper_bound(sched, 1)

    @settings(max_examples=60, deadline=None)
    @given(graphs(min_nodes=2, max_nodes=8), schedules(), st.data())
    def test_monotone_in_width(self, g, sched, data):
        a = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=g.n - 1))
        b = sorted(set(range(g.n)) - a)
        wider = MpnnSchedule(tuple(x + 1 for x in sched.w), sched.m, sched.gamma, sched.s)
        assert capacity_exact(g, a, b, wider) >= capacity_exact(g, a, b, sched)
