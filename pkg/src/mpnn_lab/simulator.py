"""1-WL colour refinement and a capacity-limited quantized message-passing simulator.

The simulator is a model of bounded width, not of trained networks: every
update is a seeded hash truncated to the layer's width, so two graphs can
only be told apart through information that actually fits through the
node states and messages.
"""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .capacity import MpnnSchedule
from .graph import LabeledGraph
from .universe import GraphInstance

READOUT_MODES = ("consensus", "majority")
NO_CLASS = -1


# ---------------------------------------------------------------------------
# 1-WL


@dataclass(frozen=True)
class ColorPartition:
    """Per-node colour ids (first-occurrence order) after ``rounds`` refinement rounds."""

    colors: tuple[int, ...]
    rounds: int
    history: tuple[int, ...]  # number of colours after each round, starting with the initial colouring
    stable: bool

    @property
    def num_colors(self) -> int:
        return len(set(self.colors))

    def cells(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i, c in enumerate(self.colors):
            out.setdefault(c, []).append(i)
        return list(out.values())


def _compress(keys: Sequence[Hashable]) -> list[int]:
    ids: dict[Hashable, int] = {}
    return [ids.setdefault(k, len(ids)) for k in keys]


def _initial_keys(g: LabeledGraph, anonymous: bool) -> list[Hashable]:
    if anonymous or g.features is None:
        return [0] * g.n
    return list(g.features)


def wl_refine(g: LabeledGraph, max_rounds: int | None = None, anonymous: bool = True) -> ColorPartition:
    """Colour refinement until the partition stops splitting or ``max_rounds`` is hit.

    ``rounds`` counts the rounds that split at least one cell.
    """
    max_rounds = g.n if max_rounds is None else max_rounds
    if max_rounds < 0:
        raise ValueError("max_rounds must be nonnegative")
    adj = g.adjacency()
    colors = _compress(_initial_keys(g, anonymous))
    history = [len(set(colors))]
    rounds = 0
    stable = False
    while rounds < max_rounds:
        nxt = _compress([(colors[i], tuple(sorted(colors[j] for j in adj[i]))) for i in range(g.n)])
        if len(set(nxt)) == history[-1]:
            stable = True
            break
        colors = nxt
        history.append(len(set(colors)))
        rounds += 1
    else:
        # the cap may coincide with stabilization
        nxt = _compress([(colors[i], tuple(sorted(colors[j] for j in adj[i]))) for i in range(g.n)])
        stable = len(set(nxt)) == history[-1]
    return ColorPartition(tuple(colors), rounds, tuple(history), stable)


def wl_histogram(g: LabeledGraph, rounds: int, anonymous: bool = True,
                 palette: dict | None = None) -> Counter:
    """Colour multiset after exactly ``rounds`` rounds; colours are shared through ``palette``."""
    palette = {} if palette is None else palette
    adj = g.adjacency()
    colors = [palette.setdefault(("init", k), len(palette)) for k in _initial_keys(g, anonymous)]
    for _ in range(rounds):
        colors = [palette.setdefault((colors[i], tuple(sorted(colors[j] for j in adj[i]))), len(palette))
                  for i in range(g.n)]
    return Counter(colors)


def wl_distinguishes(g: LabeledGraph, h: LabeledGraph, anonymous: bool = True) -> bool:
    """True when 1-WL run to stabilization tells ``g`` and ``h`` apart."""
    if g.n != h.n:
        return True
    rounds = g.n + h.n  # refinement of the disjoint union stabilises within this many rounds
    palette: dict = {}
    for r in range(rounds + 1):
        if wl_histogram(g, r, anonymous, palette) != wl_histogram(h, r, anonymous, palette):
            return True
    return False


# ---------------------------------------------------------------------------
# quantized forward pass


@dataclass(frozen=True)
class QuantizedState:
    digits: tuple[int, ...]
    s: int = 2

    def __post_init__(self):
        if any(not 0 <= d < self.s for d in self.digits):
            raise ValueError("digit outside [0, s)")

    @property
    def width(self) -> int:
        return len(self.digits)


def _digits(seed: int, tag: bytes, payload: bytes, count: int, s: int) -> tuple[int, ...]:
    if count == 0:
        return ()
    h = hashlib.shake_256()
    h.update(int(seed).to_bytes(8, "big", signed=True))
    h.update(tag)
    h.update(payload)
    return tuple(b % s for b in h.digest(count))


def _encode(parts: Sequence[Sequence[int]]) -> bytes:
    # length-prefixed so that concatenation stays unambiguous
    out = bytearray()
    for p in parts:
        out += len(p).to_bytes(4, "big")
        for x in p:
            out += int(x).to_bytes(4, "big")
    return bytes(out)


def quantized_forward(g: LabeledGraph, schedule: MpnnSchedule, seed: int = 0,
                      anonymous: bool = False) -> list[QuantizedState]:
    """Final per-node states after ``schedule.d`` synchronous layers.

    Layer ``l`` sends ``m_l`` digits of a hash of each node's state to its
    neighbours and keeps ``w_l`` digits of a hash of (state, sorted received
    messages).  With ``gamma_l > 0`` a global node holding ``gamma_l`` digits
    exchanges messages with every node.
    """
    if not anonymous and g.features is None:
        raise ValueError("graph has no features; pass anonymous=True")
    s = schedule.s
    adj = g.adjacency()
    if anonymous:
        states: list[tuple[int, ...]] = [()] * g.n
    else:
        states = [tuple(row) for row in g.features]
    glob: tuple[int, ...] = ()
    for layer, spec in enumerate(schedule.layers()):
        tag = layer.to_bytes(4, "big")
        msgs = [_digits(seed, b"msg" + tag, _encode([x]), spec.m, s) for x in states]
        inbox = [sorted(msgs[j] for j in adj[i]) for i in range(g.n)]
        if spec.gamma > 0:
            g_msg = _digits(seed, b"gmsg" + tag, _encode([glob]), spec.m, s)
            glob = _digits(seed, b"gupd" + tag, _encode([glob] + sorted(msgs)), spec.gamma, s)
            inbox = [box + [(s,) + g_msg] for box in inbox]  # digit s marks the global sender
        states = [_digits(seed, b"upd" + tag, _encode([states[i]] + inbox[i]), spec.w, s)
                  for i in range(g.n)]
    return [QuantizedState(x, s) for x in states]


def fingerprint(states: Sequence[QuantizedState], mode: str = "consensus") -> tuple:
    """Readout-level summary of final states.

    ``consensus`` keeps the full sorted multiset (an injective readout over
    all nodes); ``majority`` keeps only the set of distinct states, which is
    all a readout that trusts any single node can rely on.
    """
    if mode == "consensus":
        return tuple(sorted(st.digits for st in states))
    if mode == "majority":
        return tuple(sorted({st.digits for st in states}))
    raise ValueError(f"mode must be one of {READOUT_MODES}")


def readout(states: Sequence, mode: str, class_map: Mapping | Callable) -> int | None:
    """Graph-level class from per-node states, or ``None`` when undecided.

    ``class_map`` maps a node state to a class (missing or ``None`` means the
    node abstains).  Majority needs a unique most frequent class; consensus
    needs every node to agree.
    """
    if not states:
        raise ValueError("states must be nonempty")
    if mode not in READOUT_MODES:
        raise ValueError(f"mode must be one of {READOUT_MODES}")
    lookup = class_map if callable(class_map) else (lambda st: class_map.get(st))
    votes = [lookup(st.digits if isinstance(st, QuantizedState) else st) for st in states]
    if mode == "consensus":
        first = votes[0]
        return first if first is not None and all(v == first for v in votes) else None
    counts = Counter(v for v in votes if v is not None)
    if not counts:
        return None
    ranked = counts.most_common(2)
    if len(ranked) == 2 and ranked[0][1] == ranked[1][1]:
        return None
    return ranked[0][0]


@dataclass(frozen=True)
class CollisionResult:
    rate: float
    pairs_checked: int
    collisions: int


def collision_rate(instances: Sequence[GraphInstance], schedule: MpnnSchedule, mode: str = "consensus",
                   seed: int = 0, anonymous: bool = False) -> CollisionResult:
    """Fraction of differently-classed instance pairs with identical fingerprints."""
    if len(instances) < 2:
        raise ValueError("need at least two instances")
    prints = [fingerprint(quantized_forward(inst.graph, schedule, seed, anonymous), mode) for inst in instances]
    by_print: dict[tuple, Counter] = {}
    for inst, fp in zip(instances, prints):
        by_print.setdefault(fp, Counter())[inst.class_id] += 1
    per_class = Counter(inst.class_id for inst in instances)
    total = len(instances)
    pairs = (total * total - sum(c * c for c in per_class.values())) // 2
    collisions = 0
    for counts in by_print.values():
        size = sum(counts.values())
        collisions += (size * size - sum(c * c for c in counts.values())) // 2
    rate = collisions / pairs if pairs else 0.0
    return CollisionResult(rate, pairs, collisions)


def saturated_schedule(n: int, d: int | None = None, s: int = 2) -> MpnnSchedule:
    """Width and message size ``n * d`` digits over ``d`` layers (``d`` defaults to ``n``)."""
    d = n if d is None else d
    return MpnnSchedule.uniform(d, n * d, n * d, 0, s)


# ---------------------------------------------------------------------------
# estimators


def _graphs(X) -> list[LabeledGraph]:
    return [x.graph if isinstance(x, GraphInstance) else x for x in X]


class WLRefiner(TransformerMixin, BaseEstimator):
    """Bag-of-colours features from ``rounds`` rounds of 1-WL, vocabulary learned in ``fit``."""

    def __init__(self, rounds: int = 3, anonymous: bool = True):
        self.rounds = rounds
        self.anonymous = anonymous

    def fit(self, X, y=None):
        self.palette_ = {}
        for g in _graphs(X):
            wl_histogram(g, self.rounds, self.anonymous, self.palette_)
        self.n_features_ = len(self.palette_)
        return self

    def transform(self, X) -> np.ndarray:
        graphs = _graphs(X)
        out = np.zeros((len(graphs), self.n_features_), dtype=np.int64)
        for row, g in enumerate(graphs):
            # unseen colours get ids past the vocabulary and are dropped
            palette = dict(self.palette_)
            for color, count in wl_histogram(g, self.rounds, self.anonymous, palette).items():
                if color < self.n_features_:
                    out[row, color] = count
        return out


class CapacityLimitedMPNN(ClassifierMixin, BaseEstimator):
    """Quantized MPNN classifier whose only learned part is a node-state -> class lookup.

    Training maps each final node state to the most common label among the
    training graphs in which it occurs; prediction applies :func:`readout`.
    Undecided graphs are labelled ``NO_CLASS``.
    """

    def __init__(self, schedule: str = "d=2,w=4,m=4,gamma=0,s=2", mode: str = "majority",
                 seed: int = 0, anonymous: bool = False):
        self.schedule = schedule
        self.mode = mode
        self.seed = seed
        self.anonymous = anonymous

    def _schedule(self) -> MpnnSchedule:
        if isinstance(self.schedule, MpnnSchedule):
            return self.schedule
        return MpnnSchedule.parse(self.schedule)

    def _states(self, X):
        sched = self._schedule()
        return [quantized_forward(g, sched, self.seed, self.anonymous) for g in _graphs(X)]

    def fit(self, X, y):
        if self.mode not in READOUT_MODES:
            raise ValueError(f"mode must be one of {READOUT_MODES}")
        y = np.asarray(y)
        if len(y) != len(X):
            raise ValueError("X and y differ in length")
        self.classes_ = np.unique(y)
        votes: dict[tuple, Counter] = {}
        for states, label in zip(self._states(X), y):
            for st in {st.digits for st in states}:
                votes.setdefault(st, Counter())[label.item()] += 1
        self.class_map_ = {}
        for st, counts in votes.items():
            top = counts.most_common(2)
            if len(top) == 1 or top[0][1] > top[1][1]:
                self.class_map_[st] = top[0][0]
        return self

    def predict(self, X) -> np.ndarray:
        out = []
        for states in self._states(X):
            label = readout(states, self.mode, self.class_map_)
            out.append(NO_CLASS if label is None else label)
        return np.asarray(out)
