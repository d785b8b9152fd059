"""Two-part graph universes, samplers and JSONL datasets.

Every graph in a universe on ``n`` nodes consists of a part on nodes
``0..v-1`` and a part on nodes ``v..n-1`` (``v = n // 2``) joined by a single
bridge edge.  A graph's class is the unordered pair of the parts'
isomorphism classes, so a census of size ``c`` yields ``c (c + 1) / 2``
classes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .enumeration import FAMILIES, MAX_GRAPH_NODES, MAX_TREE_NODES, ClassCensus, census
from .graph import (
    LabeledGraph,
    bfs_distances,
    canonical_form,
    connected_components,
    diameter,
    edge_cut,
    is_connected,
)

SPLITS = ("train", "valid", "test")
DEFAULT_FRACTIONS = (0.9, 0.05, 0.05)
BVP_MAX_RETRIES = 10_000

# published reference values for the twelve dataset tasks, keyed by (family, n)
REFERENCE_CLASS_COUNTS = {
    ("graphs", 6): 3, ("graphs", 8): 21, ("graphs", 10): 231, ("graphs", 12): 6328,
    ("trees", 8): 3, ("trees", 10): 6, ("trees", 12): 21, ("trees", 14): 66,
    ("trees", 16): 276, ("trees", 18): 1128, ("trees", 20): 5671, ("trees", 22): 22730,
}
REFERENCE_AVG_DEGREES = {
    ("graphs", 6): 4.0, ("graphs", 8): 4.7, ("graphs", 10): 5.4, ("graphs", 12): 6.0,
    ("trees", 8): 3.5, ("trees", 10): 3.6, ("trees", 12): 3.7, ("trees", 14): 3.7,
    ("trees", 16): 3.8, ("trees", 18): 3.8, ("trees", 20): 3.8, ("trees", 22): 3.8,
}
REFERENCE_AVG_DIAMETERS = {
    ("graphs", 6): 3.7, ("graphs", 8): 4.5, ("graphs", 10): 5.0, ("graphs", 12): 5.4,
    ("trees", 8): 4.0, ("trees", 10): 4.3, ("trees", 12): 5.0, ("trees", 14): 5.4,
    ("trees", 16): 6.0, ("trees", 18): 6.4, ("trees", 20): 6.9, ("trees", 22): 7.3,
}


@dataclass(frozen=True)
class Decomposition:
    """Parts ``g_a`` (nodes ``0..v_a-1``) and ``g_b`` (shifted by ``v_a``) plus bridge edges.

    ``bridge_edges`` are given in the labeling of the composed graph.
    """

    g_a: LabeledGraph
    g_b: LabeledGraph
    bridge_edges: tuple[tuple[int, int], ...]
    tau: int = 1

    def __post_init__(self):
        if self.cut() > self.tau:
            raise ValueError(f"bridge cut {self.cut()} exceeds tau={self.tau}")

    @property
    def part_a(self) -> range:
        return range(self.g_a.n)

    @property
    def part_b(self) -> range:
        return range(self.g_a.n, self.g_a.n + self.g_b.n)

    def cut(self) -> int:
        a = set(self.part_a)
        return sum(1 for u, v in self.bridge_edges if (u in a) != (v in a))

    def compose(self) -> LabeledGraph:
        off = self.g_a.n
        edges = self.g_a.edges + tuple((u + off, v + off) for u, v in self.g_b.edges)
        return LabeledGraph(self.g_a.n + self.g_b.n, edges + tuple(self.bridge_edges))


def glue(g_a: LabeledGraph, g_b: LabeledGraph, endpoint_a: int, endpoint_b: int) -> LabeledGraph:
    """Disjoint union of the parts plus one bridge between the given endpoints.

    ``endpoint_b`` is a node of ``g_b`` in its own labeling.
    """
    if not 0 <= endpoint_a < g_a.n:
        raise ValueError(f"endpoint_a={endpoint_a} not a node of g_a")
    if not 0 <= endpoint_b < g_b.n:
        raise ValueError(f"endpoint_b={endpoint_b} not a node of g_b")
    return Decomposition(g_a, g_b, ((endpoint_a, g_a.n + endpoint_b),)).compose()


@dataclass(frozen=True)
class GraphInstance:
    graph: LabeledGraph
    class_id: int
    split: str = "train"
    seed: int = 0

    def to_json(self) -> str:
        feats = [list(r) for r in self.graph.features] if self.graph.features is not None else None
        record = {
            "n": self.graph.n,
            "edges": [list(e) for e in self.graph.edges],
            "features": feats,
            "class_id": self.class_id,
            "split": self.split,
            "seed": self.seed,
        }
        return json.dumps(record, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "GraphInstance":
        rec = json.loads(line)
        g = LabeledGraph(rec["n"], tuple(tuple(e) for e in rec["edges"]), rec.get("features"))
        return cls(g, int(rec["class_id"]), rec["split"], int(rec["seed"]))


@dataclass(frozen=True)
class Universe:
    family: str
    n: int
    census: ClassCensus = field(repr=False)

    @property
    def v(self) -> int:
        return self.n // 2

    @property
    def class_count(self) -> int:
        c = len(self.census)
        return c * (c + 1) // 2

    def pair_id(self, i: int, j: int) -> int:
        """Class id of the unordered pair of part classes ``{i, j}``."""
        c = len(self.census)
        if not (0 <= i < c and 0 <= j < c):
            raise IndexError("part class out of range")
        i, j = min(i, j), max(i, j)
        # row-major over the upper triangle including the diagonal
        return i * c - i * (i - 1) // 2 + (j - i)

    def pair_of(self, class_id: int) -> tuple[int, int]:
        c = len(self.census)
        if not 0 <= class_id < self.class_count:
            raise IndexError("class id out of range")
        i = 0
        while class_id >= c - i:
            class_id -= c - i
            i += 1
        return i, i + class_id

    def class_table(self) -> dict[tuple[int, int], int]:
        c = len(self.census)
        return {(i, j): self.pair_id(i, j) for i in range(c) for j in range(i, c)}

    def classify(self, g: LabeledGraph) -> int:
        """Class id of a universe member under any node labeling."""
        if g.n != self.n:
            raise ValueError(f"graph has {g.n} nodes, universe has {self.n}")
        g = g.without_features()
        half = set(range(self.v))
        rest = set(range(self.v, self.n))
        if edge_cut(g, half, rest, bidirectional=False) == 1:
            a, b = sorted(half), sorted(rest)
            ga, gb = g.induced(a), g.induced(b)
            if is_connected(ga) and is_connected(gb):
                return self._pair_from_parts(ga, gb)
        a, b = balanced_bridge_split(g)
        return self._pair_from_parts(g.induced(a), g.induced(b))

    def _pair_from_parts(self, ga: LabeledGraph, gb: LabeledGraph) -> int:
        try:
            i = self.census.index_of(canonical_form(ga))
            j = self.census.index_of(canonical_form(gb))
        except KeyError:
            raise ValueError(f"parts are not members of the {self.family} census on {self.v} nodes") from None
        return self.pair_id(i, j)


def balanced_bridge_split(g: LabeledGraph) -> tuple[list[int], list[int]]:
    """Node sets of the two halves left by the unique bridge splitting ``g`` evenly."""
    if g.n % 2:
        raise ValueError("graph must have an even node count")
    for k, e in enumerate(g.edges):
        h = LabeledGraph(g.n, g.edges[:k] + g.edges[k + 1:])
        comps = connected_components(h)
        if len(comps) == 2 and len(comps[0]) == len(comps[1]):
            a, b = comps
            if e[0] in b:
                a, b = b, a
            return a, b
    raise ValueError("graph has no bridge splitting it into equal halves")


def _check_family_n(family: str, n: int) -> int:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if n % 2 or n < 2:
        raise ValueError(f"n must be a positive even integer, got {n}")
    v = n // 2
    limit = MAX_GRAPH_NODES if family == "graphs" else MAX_TREE_NODES
    if v > limit:
        raise ValueError(f"{family} universes support n/2 <= {limit}, got n={n}")
    return v


@lru_cache(maxsize=None)
def build_universe(family: str, n: int) -> Universe:
    v = _check_family_n(family, n)
    return Universe(family, n, census(family, v))


def class_count(family: str, n: int) -> int:
    return build_universe(family, n).class_count


# ---------------------------------------------------------------------------
# samplers


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_seed(seed: int, index: int) -> int:
    """Stable per-item seed derived from a parent seed and an index."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint32)[0])


def sample_gnp(v: int, p: float, seed) -> LabeledGraph:
    """Erdos-Renyi graph: each of the ``C(v, 2)`` edges present independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = _rng(seed)
    pairs = [(i, j) for i in range(v) for j in range(i + 1, v)]
    keep = rng.random(len(pairs)) < p
    return LabeledGraph(v, tuple(e for e, k in zip(pairs, keep) if k))


def one_hot_features(v_a: int, v_b: int, rng: np.random.Generator) -> tuple[tuple[int, ...], ...]:
    """Rows of a permutation matrix: part a gets a shuffle of ``0..v_a-1``, part b of ``v_a..n-1``."""
    n = v_a + v_b
    perm = list(rng.permutation(v_a)) + [v_a + int(x) for x in rng.permutation(v_b)]
    return tuple(tuple(1 if k == perm[i] else 0 for k in range(n)) for i in range(n))


def sample_bvp(n: int, p: float, seed, max_retries: int = BVP_MAX_RETRIES) -> GraphInstance:
    """Two independent connected ``G(v, p)`` halves joined by a uniformly chosen bridge."""
    if n % 2 or n < 2:
        raise ValueError(f"n must be a positive even integer, got {n}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    v = n // 2
    rng = _rng(seed)
    halves = []
    for _ in range(2):
        for _attempt in range(max_retries):
            g = sample_gnp(v, p, rng)
            if is_connected(g):
                halves.append(g)
                break
        else:
            raise RuntimeError(f"no connected G({v}, {p}) sample within {max_retries} retries")
    ea, eb = int(rng.integers(v)), int(rng.integers(v))
    g = glue(halves[0], halves[1], ea, eb)
    g = g.with_features(one_hot_features(v, v, rng))
    class_id = build_universe("graphs", n).classify(g) if v <= MAX_GRAPH_NODES else -1
    return GraphInstance(g, class_id, "train", int(seed) if isinstance(seed, (int, np.integer)) else 0)


def centers(g: LabeledGraph) -> list[int]:
    """Nodes of minimum eccentricity (one or two of them in a tree)."""
    ecc = [max(bfs_distances(g, i)) for i in range(g.n)]
    r = min(ecc)
    return [i for i, e in enumerate(ecc) if e == r]


def _endpoint(family: str, g: LabeledGraph, rng: np.random.Generator) -> int:
    # trees hang off a centre, graphs off any node; this reproduces the table's average diameters
    if family == "trees":
        options = centers(g)
        return options[int(rng.integers(len(options)))]
    return int(rng.integers(g.n))


def sample_universe(family: str, n: int, seed) -> GraphInstance:
    """Uniform unordered pair of part classes joined by a bridge.

    Graph parts are joined at uniformly chosen endpoints, tree parts at a
    uniformly chosen centre.
    """
    uni = build_universe(family, n)
    rng = _rng(seed)
    class_id = int(rng.integers(uni.class_count))
    i, j = uni.pair_of(class_id)
    if rng.random() < 0.5:
        i, j = j, i
    ga, gb = uni.census.representatives[i], uni.census.representatives[j]
    g = glue(ga, gb, _endpoint(family, ga, rng), _endpoint(family, gb, rng))
    g = g.with_features(one_hot_features(uni.v, uni.v, rng))
    return GraphInstance(g, class_id, "train", int(seed) if isinstance(seed, (int, np.integer)) else 0)


def sample_tv(n: int, seed) -> GraphInstance:
    return sample_universe("trees", n, seed)


# ---------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class DatasetSpec:
    family: str
    n: int
    size: int
    seed: int = 0
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    p: float | None = None  # graphs only: sample halves from G(v, p) instead of uniform class pairs

    def validate(self) -> None:
        _check_family_n(self.family, self.n)
        if self.size < 0:
            raise ValueError("size must be nonnegative")
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions):
            raise ValueError("fractions must be three nonnegative numbers")
        if not math.isclose(sum(self.fractions), 1.0, abs_tol=1e-9):
            raise ValueError(f"split fractions must sum to 1, got {sum(self.fractions)}")
        if self.p is not None and self.family != "graphs":
            raise ValueError("p applies to the graphs family only")


def split_counts(size: int, fractions: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of ``size`` items to the splits."""
    raw = [size * f for f in fractions]
    counts = [math.floor(r) for r in raw]
    order = sorted(range(len(raw)), key=lambda k: (-(raw[k] - counts[k]), k))
    for k in order[: size - sum(counts)]:
        counts[k] += 1
    return counts


def generate_instances(spec: DatasetSpec) -> list[GraphInstance]:
    spec.validate()
    rng = _rng(spec.seed)
    labels = np.repeat(np.arange(3), split_counts(spec.size, spec.fractions))
    labels = labels[rng.permutation(spec.size)] if spec.size else labels
    out = []
    for k in range(spec.size):
        s = derive_seed(spec.seed, k)
        if spec.p is not None:
            inst = sample_bvp(spec.n, spec.p, s)
        else:
            inst = sample_universe(spec.family, spec.n, s)
        out.append(GraphInstance(inst.graph, inst.class_id, SPLITS[int(labels[k])], s))
    return out


def write_dataset(path, instances: Iterable[GraphInstance]) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        for inst in instances:
            fh.write(inst.to_json() + "\n")
    return path


def generate_dataset(spec: DatasetSpec, path) -> Path:
    return write_dataset(path, generate_instances(spec))


def load_dataset(path) -> list[GraphInstance]:
    with open(path) as fh:
        return [GraphInstance.from_json(line) for line in fh if line.strip()]


@dataclass(frozen=True)
class DatasetStats:
    family: str
    n: int
    classes: int
    avg_degree: float
    avg_degree_standard: float
    avg_diameter: float
    size: int

    def csv_row(self) -> str:
        return f"{self.family},{self.n},{self.classes},{self.avg_degree:.4f},{self.avg_diameter:.4f}"


def dataset_stats(instances: Sequence[GraphInstance], family: str | None = None) -> DatasetStats:
    """Observed class count and average degree/diameter.

    ``avg_degree`` follows the dataset-table convention ``4|E|/n`` (each
    edge counted in both directions); ``avg_degree_standard`` is ``2|E|/n``.
    """
    if not instances:
        raise ValueError("empty dataset")
    sizes = {inst.graph.n for inst in instances}
    if len(sizes) != 1:
        raise ValueError(f"mixed graph sizes in dataset: {sorted(sizes)}")
    n = sizes.pop()
    if family is None:
        family = "trees" if all(inst.graph.num_edges == n - 1 for inst in instances) else "graphs"
    deg = float(np.mean([4 * inst.graph.num_edges / n for inst in instances]))
    diam = float(np.mean([diameter(inst.graph) for inst in instances]))
    classes = len({inst.class_id for inst in instances})
    return DatasetStats(family, n, classes, deg, deg / 2, diam, len(instances))
