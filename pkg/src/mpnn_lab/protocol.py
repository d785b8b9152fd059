"""Deterministic two-party protocols over finite function tables.

Inputs are referred to by index: Alice holds a row index into
``table.inputs_a``, Bob a column index into ``table.inputs_b``.  Message
functions are explicit lookup tables from the owner's input index to a
symbol in ``0..s-1``.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Iterator, Sequence

from .bounds import shannon_entropy

ALICE, BOB = "A", "B"
MAX_PARTITION_CELLS = 16


class MalformedProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionTable:
    inputs_a: tuple
    inputs_b: tuple
    values: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs_a", tuple(self.inputs_a))
        object.__setattr__(self, "inputs_b", tuple(self.inputs_b))
        object.__setattr__(self, "values", tuple(tuple(row) for row in self.values))
        if len(self.values) != len(self.inputs_a) or any(len(r) != len(self.inputs_b) for r in self.values):
            raise ValueError("value matrix shape does not match the input lists")

    @classmethod
    def from_matrix(cls, values: Sequence[Sequence[int]]) -> "FunctionTable":
        return cls(tuple(range(len(values))), tuple(range(len(values[0]) if values else 0)), values)

    @classmethod
    def from_function(cls, inputs_a: Sequence, inputs_b: Sequence, f: Callable[[Any, Any], int]) -> "FunctionTable":
        return cls(inputs_a, inputs_b, [[f(a, b) for b in inputs_b] for a in inputs_a])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.inputs_a), len(self.inputs_b)

    def distinct_values(self) -> set[int]:
        return {x for row in self.values for x in row}


@dataclass(frozen=True)
class ProtocolNode:
    owner: str | None = None  # None for leaves
    message: tuple[int, ...] = ()
    children: tuple[int, ...] = ()
    output: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.owner is None


@dataclass
class ProtocolTree:
    """Rooted ``s``-ary protocol tree stored as a node list with the root at index 0."""

    s: int
    nodes: list[ProtocolNode] = field(default_factory=lambda: [ProtocolNode()])

    def add(self, node: ProtocolNode) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def leaves(self) -> list[int]:
        return [i for i, nd in enumerate(self.nodes) if nd.is_leaf]

    def depth_of(self) -> dict[int, int]:
        depth = {0: 0}
        stack = [0]
        while stack:
            i = stack.pop()
            for c in self.nodes[i].children:
                if c in depth:
                    raise MalformedProtocolError("protocol graph is not a tree")
                depth[c] = depth[i] + 1
                stack.append(c)
        return depth

    def depth(self) -> int:
        return max(self.depth_of().values())

    def validate(self, n_a: int, n_b: int) -> None:
        for nd in self.nodes:
            if nd.is_leaf:
                if nd.children:
                    raise MalformedProtocolError("leaf with children")
                continue
            if nd.owner not in (ALICE, BOB):
                raise MalformedProtocolError(f"bad owner {nd.owner!r}")
            if len(nd.children) != self.s:
                raise MalformedProtocolError(f"internal node needs {self.s} children, has {len(nd.children)}")
            size = n_a if nd.owner == ALICE else n_b
            if len(nd.message) != size:
                raise MalformedProtocolError("message table does not cover the owner's inputs")
            if any(not 0 <= x < self.s for x in nd.message):
                raise MalformedProtocolError("message symbol outside the alphabet")
            if any(not 0 <= c < len(self.nodes) for c in nd.children):
                raise MalformedProtocolError("child index out of range")
        self.depth_of()


@dataclass(frozen=True)
class Rectangle:
    rows: frozenset[int]
    cols: frozenset[int]

    def cells(self) -> set[tuple[int, int]]:
        return set(itertools.product(self.rows, self.cols))


def run_protocol(tree: ProtocolTree, x_a: int, x_b: int) -> tuple[int, int]:
    """Leaf reached on input ``(x_a, x_b)`` and the number of symbols sent."""
    node, length = 0, 0
    seen = set()
    while not tree.nodes[node].is_leaf:
        if node in seen:
            raise MalformedProtocolError("cycle in protocol")
        seen.add(node)
        nd = tree.nodes[node]
        if len(nd.children) != tree.s:
            raise MalformedProtocolError(f"internal node {node} has {len(nd.children)} children")
        if nd.owner not in (ALICE, BOB):
            raise MalformedProtocolError(f"bad owner {nd.owner!r}")
        x = x_a if nd.owner == ALICE else x_b
        node = nd.children[nd.message[x]]
        length += 1
    return node, length


def transcript(tree: ProtocolTree, x_a: int, x_b: int) -> list[tuple[str, int]]:
    out, node = [], 0
    while not tree.nodes[node].is_leaf:
        nd = tree.nodes[node]
        sym = nd.message[x_a if nd.owner == ALICE else x_b]
        out.append((nd.owner, sym))
        node = nd.children[sym]
    return out


def leaf_map(tree: ProtocolTree, table: FunctionTable) -> dict[tuple[int, int], int]:
    n_a, n_b = table.shape
    return {(a, b): run_protocol(tree, a, b)[0] for a in range(n_a) for b in range(n_b)}


def verify_leaf_rectangles(tree: ProtocolTree, table: FunctionTable,
                           mapping: dict[tuple[int, int], int] | None = None) -> tuple[bool, list[Rectangle]]:
    """Check that leaf input sets are rectangles partitioning the domain.

    ``mapping`` (input -> leaf) overrides execution; used to test corrupted maps.
    """
    n_a, n_b = table.shape
    mapping = leaf_map(tree, table) if mapping is None else mapping
    domain = set(itertools.product(range(n_a), range(n_b)))
    if set(mapping) != domain:
        return False, []
    groups: dict[int, set[tuple[int, int]]] = {}
    for cell, leaf in mapping.items():
        groups.setdefault(leaf, set()).add(cell)
    rects = []
    ok = True
    for leaf in sorted(groups):
        cells = groups[leaf]
        rect = Rectangle(frozenset(a for a, _ in cells), frozenset(b for _, b in cells))
        if rect.cells() != cells:
            ok = False
        rects.append(rect)
    return ok, rects


def is_monochromatic(rect: Rectangle, table: FunctionTable) -> bool:
    return len({table.values[a][b] for a, b in rect.cells()}) <= 1


def computes(tree: ProtocolTree, table: FunctionTable, mode: str = "both") -> bool:
    """Whether the protocol lets both parties (``both``) or at least one (``one``) learn f.

    In ``one`` mode, Alice knows the value at a leaf if it is constant along
    her row of the leaf rectangle, Bob if it is constant along his column.
    """
    ok, rects = verify_leaf_rectangles(tree, table)
    if not ok:
        return False
    for rect in rects:
        if mode == "both":
            if not is_monochromatic(rect, table):
                return False
        elif mode == "one":
            for a, b in rect.cells():
                alice = len({table.values[a][y] for y in rect.cols}) == 1
                bob = len({table.values[x][b] for x in rect.rows}) == 1
                if not (alice or bob):
                    return False
        else:
            raise ValueError("mode must be 'one' or 'both'")
    return True


def monochromatic_rectangles(table: FunctionTable) -> list[int]:
    """All nonempty monochromatic rectangles as cell bitmasks (cell ``a * n_b + b``)."""
    n_a, n_b = table.shape
    rects = []
    for rmask in range(1, 1 << n_a):
        rows = [a for a in range(n_a) if rmask >> a & 1]
        for cmask in range(1, 1 << n_b):
            cols = [b for b in range(n_b) if cmask >> b & 1]
            if len({table.values[a][b] for a in rows for b in cols}) == 1:
                bits = 0
                for a in rows:
                    for b in cols:
                        bits |= 1 << (a * n_b + b)
                rects.append(bits)
    return rects


def min_monochromatic_partition(table: FunctionTable) -> int:
    """Fewest monochromatic rectangles partitioning the table (exact-cover search)."""
    n_a, n_b = table.shape
    cells = n_a * n_b
    if cells > MAX_PARTITION_CELLS:
        raise ValueError(f"table has {cells} cells; exhaustive search is limited to {MAX_PARTITION_CELLS}")
    if cells == 0:
        return 0
    full = (1 << cells) - 1
    by_cell: list[list[int]] = [[] for _ in range(cells)]
    for r in monochromatic_rectangles(table):
        for k in range(cells):
            if r >> k & 1:
                by_cell[k].append(r)

    @lru_cache(maxsize=None)
    def best(covered: int) -> int:
        if covered == full:
            return 0
        free = ~covered & full
        k = (free & -free).bit_length() - 1
        return 1 + min(best(covered | r) for r in by_cell[k] if not r & covered)

    return best(0)


def class_count_bound(table: FunctionTable, s: float = 2) -> float:
    """``log_s`` of the number of distinct values: a floor on both-party complexity."""
    k = len(table.distinct_values())
    return math.log(k) / math.log(s) if k else 0.0


# ---------------------------------------------------------------------------
# distributions over inputs


def leaf_distribution(tree: ProtocolTree, dist: Sequence[Sequence[float]]) -> dict[int, float]:
    total = sum(sum(row) for row in dist)
    if not math.isclose(total, 1.0, abs_tol=1e-9) or any(p < 0 for row in dist for p in row):
        raise ValueError("input distribution must be nonnegative and sum to 1")
    out: dict[int, float] = {}
    for a, row in enumerate(dist):
        for b, p in enumerate(row):
            leaf, _ = run_protocol(tree, a, b)
            out[leaf] = out.get(leaf, 0.0) + p
    return out


def expected_length(tree: ProtocolTree, dist: Sequence[Sequence[float]]) -> float:
    depth = tree.depth_of()
    return sum(p * depth[leaf] for leaf, p in leaf_distribution(tree, dist).items())


def leaf_entropy(tree: ProtocolTree, dist: Sequence[Sequence[float]]) -> float:
    return shannon_entropy(list(leaf_distribution(tree, dist).values()), tree.s)


def huffman_protocol(table: FunctionTable, dist: Sequence[Sequence[float]], owner: str = ALICE, s: int = 2) -> ProtocolTree:
    """``owner`` announces its own input with an ``s``-ary Huffman code for its marginal.

    The expected length lies within one symbol of the leaf entropy.
    """
    n_a, n_b = table.shape
    if owner == ALICE:
        marginal = [sum(row) for row in dist]
    else:
        marginal = [sum(dist[a][b] for a in range(n_a)) for b in range(n_b)]
    k = len(marginal)
    # pad with zero-weight dummies so every merge takes exactly s items
    dummies = (-(k - 1)) % (s - 1) if k > 1 else s - 1
    heap = [(p, i, ("sym", i)) for i, p in enumerate(marginal)]
    heap += [(0.0, k + j, ("dummy",)) for j in range(dummies)]
    heapq.heapify(heap)
    counter = len(heap)
    while len(heap) > 1:
        group = [heapq.heappop(heap) for _ in range(s)]
        heapq.heappush(heap, (sum(g[0] for g in group), counter, ("node", [g[2] for g in group])))
        counter += 1
    tree = ProtocolTree(s, [])

    def build(node, depth: int, reaching: set[int]) -> int:
        idx = tree.add(ProtocolNode())
        if node[0] != "node":
            tree.nodes[idx] = ProtocolNode(output=node[1] if node[0] == "sym" else None)
            return idx
        # inputs that never reach this node send 0
        message = [0] * k
        for sym, child in enumerate(node[1]):
            for x in _symbols_under(child):
                if x in reaching:
                    message[x] = sym
        children = tuple(
            build(child, depth + 1, reaching & _symbols_under(child)) for child in node[1]
        )
        tree.nodes[idx] = ProtocolNode(owner, tuple(message), children)
        return idx

    build(heap[0][2], 0, set(range(k)))
    return tree


def _symbols_under(node) -> set[int]:
    if node[0] == "sym":
        return {node[1]}
    if node[0] == "dummy":
        return set()
    return set().union(*(_symbols_under(c) for c in node[1]))


# ---------------------------------------------------------------------------
# exhaustive and random protocol trees


def enumerate_protocol_trees(n_a: int, n_b: int, s: int, max_depth: int) -> Iterator[ProtocolTree]:
    """Every protocol tree of depth at most ``max_depth`` (message tables over all functions)."""

    def shapes(depth: int):
        yield ("leaf",)
        if depth == 0:
            return
        for owner, size in ((ALICE, n_a), (BOB, n_b)):
            for msg in itertools.product(range(s), repeat=size):
                for kids in itertools.product(list(shapes(depth - 1)), repeat=s):
                    yield ("node", owner, msg, kids)

    for shape in shapes(max_depth):
        tree = ProtocolTree(s, [])
        _materialize(tree, shape)
        yield tree


def _materialize(tree: ProtocolTree, shape) -> int:
    idx = tree.add(ProtocolNode())
    if shape[0] == "node":
        _, owner, msg, kids = shape
        children = tuple(_materialize(tree, k) for k in kids)
        tree.nodes[idx] = ProtocolNode(owner, tuple(msg), children)
    return idx


def random_protocol_tree(n_a: int, n_b: int, s: int, max_depth: int, rng, p_stop: float = 0.3) -> ProtocolTree:
    tree = ProtocolTree(s, [])

    def grow(depth: int) -> int:
        idx = tree.add(ProtocolNode())
        if depth == max_depth or (depth > 0 and rng.random() < p_stop):
            return idx
        owner = ALICE if rng.random() < 0.5 else BOB
        size = n_a if owner == ALICE else n_b
        msg = tuple(rng.randrange(s) for _ in range(size))
        children = tuple(grow(depth + 1) for _ in range(s))
        tree.nodes[idx] = ProtocolNode(owner, msg, children)
        return idx

    grow(0)
    return tree


def label_leaves(tree: ProtocolTree, table: FunctionTable) -> ProtocolTree:
    """Copy of ``tree`` whose monochromatic leaves carry the table value as output."""
    out = ProtocolTree(tree.s, list(tree.nodes))
    groups: dict[int, set[int]] = {}
    for (a, b), leaf in leaf_map(tree, table).items():
        groups.setdefault(leaf, set()).add(table.values[a][b])
    for leaf, vals in groups.items():
        if len(vals) == 1:
            out.nodes[leaf] = ProtocolNode(output=next(iter(vals)))
    return out


# ---------------------------------------------------------------------------
# edge exchange


def _digits_for_bits(bits: int, s: int) -> int:
    length = 0
    while s ** length < 2 ** bits:
        length += 1
    return length


@dataclass(frozen=True)
class EdgeExchangeProtocol:
    """Alice then Bob send their ``C(v, 2)`` edge indicators recoded in base ``s``."""

    v: int
    s: int = 2

    def __post_init__(self):
        if self.v < 1:
            raise ValueError("v must be positive")
        if self.s < 2:
            raise ValueError("s must be at least 2")

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(itertools.combinations(range(self.v), 2))

    @property
    def digits_per_party(self) -> int:
        return _digits_for_bits(math.comb(self.v, 2), self.s)

    @property
    def length(self) -> int:
        return 2 * self.digits_per_party

    def encode(self, edges) -> list[int]:
        edge_set = {tuple(sorted(e)) for e in edges}
        value = 0
        for pair in self.pairs:
            value = (value << 1) | (pair in edge_set)
        out = []
        for _ in range(self.digits_per_party):
            value, r = divmod(value, self.s)
            out.append(r)
        return out[::-1]

    def decode(self, digits: Sequence[int]) -> tuple[tuple[int, int], ...]:
        value = 0
        for d in digits:
            value = value * self.s + d
        pairs = self.pairs
        bits = len(pairs)
        return tuple(p for k, p in enumerate(pairs) if value >> (bits - 1 - k) & 1)

    def run(self, edges_a, edges_b) -> tuple[list[tuple[str, int]], tuple, tuple]:
        """Transcript plus the edge sets each party holds afterwards."""
        sent_a, sent_b = self.encode(edges_a), self.encode(edges_b)
        script = [(ALICE, d) for d in sent_a] + [(BOB, d) for d in sent_b]
        return script, self.decode(sent_a), self.decode(sent_b)

    def as_tree(self, table: FunctionTable, edges_of: Callable[[Any], Any],
                combine: Callable[[Any, Any], int]) -> ProtocolTree:
        """Materialize over a finite table whose inputs map to edge sets via ``edges_of``.

        Leaves reached by some input carry ``combine(edges_a, edges_b)``.
        """
        enc_a = [self.encode(edges_of(x)) for x in table.inputs_a]
        enc_b = [self.encode(edges_of(x)) for x in table.inputs_b]
        tree = ProtocolTree(self.s, [])
        L = self.digits_per_party
        seen_a = {tuple(e) for e in enc_a}
        seen_b = {tuple(e) for e in enc_b}

        def build(prefix: tuple[int, ...]) -> int:
            idx = tree.add(ProtocolNode())
            depth = len(prefix)
            if depth == 2 * L:
                if prefix[:L] in seen_a and prefix[L:] in seen_b:
                    out = combine(self.decode(prefix[:L]), self.decode(prefix[L:]))
                    tree.nodes[idx] = ProtocolNode(output=out)
                return idx
            if depth < L:
                owner, msg = ALICE, tuple(e[depth] for e in enc_a)
            else:
                owner, msg = BOB, tuple(e[depth - L] for e in enc_b)
            children = tuple(build(prefix + (sym,)) for sym in range(self.s))
            tree.nodes[idx] = ProtocolNode(owner, msg, children)
            return idx

        build(())
        return tree


def edge_exchange_protocol(v: int, s: int = 2) -> tuple[EdgeExchangeProtocol, int]:
    proto = EdgeExchangeProtocol(v, s)
    return proto, proto.length


def analyze_table(table: FunctionTable, s: float = 2) -> dict:
    n_a, n_b = table.shape
    report = {
        "shape": [n_a, n_b],
        "distinct_values": len(table.distinct_values()),
        "class_count_bound": class_count_bound(table, s),
        "min_monochromatic_partition": None,
        "partition_bound": None,
    }
    if n_a * n_b <= MAX_PARTITION_CELLS:
        k = min_monochromatic_partition(table)
        report["min_monochromatic_partition"] = k
        report["partition_bound"] = math.log(k) / math.log(s) if k else 0.0
    return report
