"""Communication capacity of message-passing schedules.

Two routes to the same quantity:

* :func:`capacity_upper_bound` -- the closed form
  ``cut * sum_l min(m_l, w_l) + sum_l gamma_l``;
* :func:`capacity_exact` -- per-layer max-flow on the node-split network
  built by :func:`build_flow_network`, summed over layers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .flow import FlowNetwork, max_flow
from .graph import LabeledGraph, _check_parts, min_separating_cut

DIRECTIONS = ("bidirectional", "undirected")
DEFAULT_DIRECTION = "bidirectional"


@dataclass(frozen=True)
class LayerSpec:
    m: int
    w: int
    gamma: int = 0


@dataclass(frozen=True)
class MpnnSchedule:
    """Per-layer width ``w``, message size ``m`` and global-state size ``gamma`` over alphabet ``s``."""

    w: tuple[int, ...]
    m: tuple[int, ...]
    gamma: tuple[int, ...]
    s: int = 2

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(int(x) for x in self.w))
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))
        object.__setattr__(self, "gamma", tuple(int(x) for x in self.gamma))
        if not self.w:
            raise ValueError("schedule needs at least one layer")
        if not len(self.w) == len(self.m) == len(self.gamma):
            raise ValueError("w, m and gamma must have one entry per layer")
        if any(x < 0 for x in self.w + self.m + self.gamma):
            raise ValueError("schedule entries must be nonnegative")
        if self.s < 2:
            raise ValueError("alphabet size s must be at least 2")

    @property
    def d(self) -> int:
        return len(self.w)

    @classmethod
    def uniform(cls, d: int, w: int, m: int | None = None, gamma: int = 0, s: int = 2) -> "MpnnSchedule":
        m = w if m is None else m
        return cls((w,) * d, (m,) * d, (gamma,) * d, s)

    def layers(self) -> Iterable[LayerSpec]:
        for w, m, g in zip(self.w, self.m, self.gamma):
            yield LayerSpec(m=m, w=w, gamma=g)

    @classmethod
    def parse(cls, text: str) -> "MpnnSchedule":
        """Parse ``d=3,w=2,m=2,gamma=0,s=2``; per-layer lists use ``/`` or ``,`` (``w=1/4``).

        Scalars are broadcast to ``d`` layers; ``m`` defaults to ``w`` and
        ``gamma`` to 0.
        """
        fields: dict[str, str] = {}
        for tok in filter(None, re.split(r",(?=[a-z]+=)", text.strip())):
            key, sep, value = tok.partition("=")
            if not sep or key not in {"d", "w", "m", "gamma", "s"}:
                raise ValueError(f"bad schedule field {tok!r}")
            fields[key] = value
        if "w" not in fields:
            raise ValueError("schedule needs w=")

        def seq(v: str) -> list[int]:
            return [int(x) for x in re.split(r"[/ ,]", v) if x]

        w = seq(fields["w"])
        d = int(fields["d"]) if "d" in fields else len(w)
        m = seq(fields.get("m", fields["w"]))
        gamma = seq(fields.get("gamma", "0"))

        def broadcast(xs: list[int], name: str) -> tuple[int, ...]:
            if len(xs) == 1:
                return tuple(xs * d)
            if len(xs) != d:
                raise ValueError(f"{name} has {len(xs)} entries but d={d}")
            return tuple(xs)

        return cls(broadcast(w, "w"), broadcast(m, "m"), broadcast(gamma, "gamma"), int(fields.get("s", 2)))

    def format(self) -> str:
        def j(xs):
            return "/".join(map(str, xs))

        return f"d={self.d},w={j(self.w)},m={j(self.m)},gamma={j(self.gamma)},s={self.s}"


def capacity_upper_bound(schedule: MpnnSchedule, cut_value: int) -> int:
    if cut_value < 0:
        raise ValueError("cut_value must be nonnegative")
    return cut_value * sum(min(m, w) for m, w in zip(schedule.m, schedule.w)) + sum(schedule.gamma)


def build_flow_network(g: LabeledGraph, part_a, part_b, layer: LayerSpec) -> FlowNetwork:
    """Single-source single-sink network for one layer.

    Graph node ``i`` becomes ``("in", i) -> ("out", i)`` with capacity ``w``;
    each edge becomes two opposite arcs of capacity ``m``; the super-source
    ``"A"`` feeds ``V_a`` and ``V_b`` drains into ``"B"`` through infinite arcs.
    When ``gamma > 0`` a global node split with capacity ``gamma`` is joined
    to every graph node by arcs of capacity ``m`` in both directions.
    """
    a, b = _check_parts(g, part_a, part_b)
    net = FlowNetwork()
    src = net.add_node("A")
    snk = net.add_node("B")
    node_in = [net.add_node(("in", i)) for i in range(g.n)]
    node_out = [net.add_node(("out", i)) for i in range(g.n)]
    for i in range(g.n):
        net.add_arc(node_in[i], node_out[i], layer.w)
    for u, v in g.edges:
        net.add_arc(node_out[u], node_in[v], layer.m)
        net.add_arc(node_out[v], node_in[u], layer.m)
    if layer.gamma > 0:
        g_in, g_out = net.add_node(("in", "global")), net.add_node(("out", "global"))
        net.add_arc(g_in, g_out, layer.gamma)
        for i in range(g.n):
            net.add_arc(node_out[i], g_in, layer.m)
            net.add_arc(g_out, node_in[i], layer.m)
    for i in sorted(a):
        net.add_arc(src, node_in[i], None)
    for i in sorted(b):
        net.add_arc(node_out[i], snk, None)
    net.source, net.sink = src, snk
    return net


def capacity_exact(g: LabeledGraph, part_a, part_b, schedule: MpnnSchedule) -> int:
    """Sum over layers of the max-flow from ``part_a`` to ``part_b``."""
    return sum(max_flow(build_flow_network(g, part_a, part_b, layer)) for layer in schedule.layers())


def separating_cut(g: LabeledGraph, part_a, part_b, direction: str = DEFAULT_DIRECTION) -> int:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    return min_separating_cut(g, part_a, part_b, bidirectional=direction == "bidirectional")


@dataclass(frozen=True)
class CapacityReport:
    exact: int
    upper_bound: int
    cut: int

    def csv_row(self) -> str:
        return f"{self.exact},{self.upper_bound},{self.cut}"


def capacity_report(g: LabeledGraph, part_a, part_b, schedule: MpnnSchedule,
                    direction: str = DEFAULT_DIRECTION) -> CapacityReport:
    part_a = sorted(set(part_a))
    if part_b is None:
        part_b = [i for i in range(g.n) if i not in part_a]
    cut = separating_cut(g, part_a, part_b, direction)
    return CapacityReport(capacity_exact(g, part_a, part_b, schedule), capacity_upper_bound(schedule, cut), cut)


def gin_capacity(depth: int, width: int, cut: int | None = None, direction: str = DEFAULT_DIRECTION) -> int:
    """Capacity of a ``depth``-layer network with message size equal to width and no global state.

    For a tau=1 universe the separating cut is one bridge, counted twice under
    the default bidirectional convention.
    """
    if depth < 0 or width < 0:
        raise ValueError("depth and width must be nonnegative")
    if cut is None:
        if direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        cut = 2 if direction == "bidirectional" else 1
    if depth == 0:
        return 0
    return capacity_upper_bound(MpnnSchedule.uniform(depth, width), cut)


def schedule_from_lists(w: Sequence[int], m: Sequence[int] | None = None,
                        gamma: Sequence[int] | None = None, s: int = 2) -> MpnnSchedule:
    m = list(w) if m is None else m
    gamma = [0] * len(w) if gamma is None else gamma
    return MpnnSchedule(tuple(w), tuple(m), tuple(gamma), s)
