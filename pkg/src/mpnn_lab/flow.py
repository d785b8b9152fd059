"""Integer max-flow on small directed networks (Dinic's blocking-flow algorithm)."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable


@dataclass
class Arc:
    tail: int
    head: int
    capacity: int | None  # None marks an infinite super-arc


@dataclass
class FlowNetwork:
    """Directed capacitated network with a designated source and sink.

    Arcs with ``capacity=None`` are infinite; at solve time they are given
    the sum of all finite capacities plus one, which keeps arithmetic exact.
    """

    labels: list[Hashable] = field(default_factory=list)
    arcs: list[Arc] = field(default_factory=list)
    source: int | None = None
    sink: int | None = None

    def add_node(self, label: Hashable) -> int:
        self.labels.append(label)
        return len(self.labels) - 1

    def add_arc(self, tail: int, head: int, capacity: int | None) -> None:
        if capacity is not None and capacity < 0:
            raise ValueError("capacities must be nonnegative")
        self.arcs.append(Arc(tail, head, capacity))

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    def index(self, label: Hashable) -> int:
        return self.labels.index(label)

    def infinity(self) -> int:
        return sum(a.capacity for a in self.arcs if a.capacity is not None) + 1

    def finite_capacities(self) -> list[int]:
        inf = self.infinity()
        return [inf if a.capacity is None else a.capacity for a in self.arcs]

    def validate(self) -> None:
        if self.source is None or self.sink is None:
            raise ValueError("source and sink must be set")
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        for a in self.arcs:
            if a.head == self.source:
                raise ValueError("arc into the source")
            if a.tail == self.sink:
                raise ValueError("arc out of the sink")


def max_flow(network: FlowNetwork) -> float:
    """Value of a maximum source-sink flow (``math.inf`` if an all-infinite path exists).

    Arcs are processed in insertion order, so the flow found (not only its
    value) is reproducible.
    """
    network.validate()
    if _unbounded(network):
        return math.inf
    n = network.num_nodes
    s, t = network.source, network.sink
    # residual graph as parallel arrays; arc i and i ^ 1 are partners
    head: list[int] = []
    cap: list[int] = []
    adj: list[list[int]] = [[] for _ in range(n)]
    for arc, c in zip(network.arcs, network.finite_capacities()):
        adj[arc.tail].append(len(head))
        head.append(arc.head)
        cap.append(c)
        adj[arc.head].append(len(head))
        head.append(arc.tail)
        cap.append(0)

    inf = network.infinity()
    total = 0
    while True:
        level = [-1] * n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in adj[u]:
                if cap[e] > 0 and level[head[e]] < 0:
                    level[head[e]] = level[u] + 1
                    queue.append(head[e])
        if level[t] < 0:
            return total
        it = [0] * n

        def push(u: int, limit: int) -> int:
            if u == t:
                return limit
            while it[u] < len(adj[u]):
                e = adj[u][it[u]]
                w = head[e]
                if cap[e] > 0 and level[w] == level[u] + 1:
                    got = push(w, min(limit, cap[e]))
                    if got:
                        cap[e] -= got
                        cap[e ^ 1] += got
                        return got
                it[u] += 1
            return 0

        while True:
            f = push(s, inf)
            if not f:
                break
            total += f


def _unbounded(network: FlowNetwork) -> bool:
    adj: dict[int, list[int]] = {}
    for a in network.arcs:
        if a.capacity is None:
            adj.setdefault(a.tail, []).append(a.head)
    stack, seen = [network.source], {network.source}
    while stack:
        x = stack.pop()
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return network.sink in seen
