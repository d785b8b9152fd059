"""Closed-form communication-complexity bounds for isomorphism classification.

All lower bounds drop their vanishing terms, so they can be negative (vacuous)
at small sizes; values are returned raw and flagged rather than clamped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

OTTER_ALPHA = 2.9557652
OTTER_C = 0.5349496

READOUTS = ("majority", "consensus")
MODE_FOR_READOUT = {"majority": "one", "consensus": "both"}
DEFAULT_DELTAS = (0.0, 0.25, 0.5, 0.75, 1.0)


def _log(x: float, s: float) -> float:
    return math.log(x) / math.log(s)


def entropy(p: float, s: float = 2) -> float:
    """Binary entropy of ``p`` in base ``s`` with ``0 log 0 = 0``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if s < 2:
        raise ValueError("s must be at least 2")
    h = 0.0
    for q in (p, 1.0 - p):
        if q > 0:
            h -= q * _log(q, s)
    return h


def shannon_entropy(probs: Sequence[float], s: float = 2) -> float:
    return -sum(p * _log(p, s) for p in probs if p > 0)


def _check_v(v):
    if v < 2:
        raise ValueError(f"v must be at least 2, got {v}")


def beta_graphs_worstcase(v: int, s: float = 2) -> float:
    """Worst-case both-party bound for connected graphs on ``v`` nodes per part."""
    _check_v(v)
    return (v * v / math.log2(s)
            - 2 * v * _log(v * math.sqrt(2) / math.e, s)
            - _log(2 * v * math.e ** 2, s))


def beta_graphs_worstcase_one(v: int, s: float = 2) -> float:
    return (beta_graphs_worstcase(v, s) - 1 / math.log2(s)) / 2


def beta_graphs_expected(v: int, p: float, s: float = 2) -> float:
    """Expected both-party bound when both parts are drawn from ``G(v, p)``."""
    _check_v(v)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    h = entropy(p, s)
    return v * v * h - v * (2 * _log(v / math.e, s) + h) - _log(2 * v * math.e ** 2, s)


def beta_graphs_expected_one(v: int, p: float, s: float = 2) -> float:
    beta = beta_graphs_expected(v, p, s)
    return beta / 2 - (v * v - v * (1 - entropy(p, 2)) + 1) / (2 * math.log2(s))


def beta_trees(v: int, s: float = 2) -> float:
    """Both-party bound for trees on ``v`` nodes per part (worst case and uniform)."""
    _check_v(v)
    return 2 * v * _log(OTTER_ALPHA, s) - 5 * _log(v, s) + _log(7, s)


def beta_trees_one(v: int, s: float = 2) -> float:
    return (beta_trees(v, s) + _log(2, s)) / 2


def one_sided_transfer(c_both: float, classes_per_party: int, s: float = 2) -> float:
    """One-party bound implied by a both-party bound and the per-party class count."""
    if classes_per_party < 1:
        raise ValueError("classes_per_party must be at least 1")
    return c_both - _log(classes_per_party, s)


def otter_approx(v: int) -> float:
    """Asymptotic unlabeled free-tree count ``c * alpha**v * v**-2.5`` (poor for small ``v``)."""
    if v < 1:
        raise ValueError("v must be positive")
    return OTTER_C * OTTER_ALPHA ** v * v ** -2.5


def upper_bound_graphs(v: int, s: float = 2) -> float:
    """Both parties send their full edge indicator vectors."""
    return v * (v - 1) / math.log2(s)


def upper_bound_trees(v: int, s: float = 2) -> float:
    """Both parties send a DFS up/down word (``2(v-1)`` bits) fixing their tree's shape."""
    return 4 * (v - 1) / math.log2(s)


# ---------------------------------------------------------------------------
# error probability


def error_probability(delta: float, c_f_expected: float, beta_m: float) -> float:
    """Lower bound on the failure probability of a network whose capacity is below
    ``delta`` times the expected complexity ``c_f_expected``; ``beta_m`` is the
    worst-case length of an optimal-expected-length protocol.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    if c_f_expected <= 0:
        raise ValueError("c_f_expected must be positive")
    ratio = beta_m / c_f_expected
    if ratio < 1:
        raise ValueError(f"beta_m / c_f_expected = {ratio} < 1 is inconsistent")
    if ratio == 1 and delta == 1:
        return 0.0
    return (1 - delta) / (ratio - delta)


@dataclass(frozen=True)
class ReverseMarkov:
    bound: float
    exact: float


def reverse_markov(distribution: Sequence[tuple[float, float]], delta: float, beta: float | None = None) -> ReverseMarkov:
    """Tail ``P(X > delta E[X])`` of a bounded nonnegative variable, exact and bounded below.

    ``distribution`` lists ``(value, probability)`` pairs; ``beta`` defaults
    to the largest value.
    """
    if not distribution:
        raise ValueError("empty distribution")
    values = [float(x) for x, _ in distribution]
    probs = [float(p) for _, p in distribution]
    if any(p < 0 for p in probs) or not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
        raise ValueError("probabilities must be nonnegative and sum to 1")
    if any(x < 0 for x in values):
        raise ValueError("values must be nonnegative")
    beta = max(values) if beta is None else float(beta)
    if any(x > beta for x in values):
        raise ValueError("a value exceeds the declared maximum beta")
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    mean = sum(x * p for x, p in distribution)
    if mean <= 0:
        raise ValueError("mean must be positive")
    t = delta * mean
    exact = sum(p for x, p in zip(values, probs) if x > t)
    r = beta / mean
    bound = 0.0 if r == delta else (1 - delta) / (r - delta)
    return ReverseMarkov(bound, exact)


def entropy_partition_check(probs: Sequence[float], partition: Sequence[Sequence[int]], s: float = 2) -> tuple[float, float]:
    """Entropy of ``probs`` and the entropy of the block distribution induced by ``partition``.

    The first is never smaller than the second.
    """
    support = sorted(i for block in partition for i in block)
    if support != list(range(len(probs))):
        raise ValueError("partition must cover every outcome exactly once")
    if any(len(b) == 0 for b in partition):
        raise ValueError("partition blocks must be nonempty")
    lhs = shannon_entropy(probs, s)
    rhs = shannon_entropy([sum(probs[i] for i in block) for block in partition], s)
    return lhs, rhs


# ---------------------------------------------------------------------------
# per-task report


@dataclass(frozen=True)
class BoundReport:
    family: str
    n: int
    v: int
    s: float
    readout: str
    beta_both: float
    bound_one: float
    upper_bound: float
    p: float | None = None
    deltas: tuple[float, ...] = DEFAULT_DELTAS
    error_prob: tuple[float | None, ...] = field(default=())

    @property
    def applicable_mode(self) -> str:
        return MODE_FOR_READOUT[self.readout]

    @property
    def applicable(self) -> float:
        return self.bound_one if self.applicable_mode == "one" else self.beta_both

    @property
    def vacuous(self) -> bool:
        return self.applicable <= 0

    def csv_row(self) -> str:
        return (f"{self.family},{self.n},{self.s:g},{self.readout},{self.beta_both:.6f},"
                f"{self.bound_one:.6f},{self.upper_bound:.6f},{str(self.vacuous).lower()}")


def main_bounds(n: int, family: str, readout: str, s: float = 2, p: float | None = None,
                beta_m: float | None = None, deltas: Sequence[float] = DEFAULT_DELTAS) -> BoundReport:
    """Evaluate the lower and trivial upper bounds for a task on ``n`` nodes.

    Majority readout needs one party to learn the class, consensus needs both.
    ``beta_m`` (worst-case length of the optimal-expected-length protocol)
    defaults to the trivial upper bound.
    """
    if n % 2:
        raise ValueError(f"n must be even, got {n}")
    if readout not in READOUTS:
        raise ValueError(f"readout must be one of {READOUTS}")
    v = n // 2
    if family == "graphs":
        if p is None:
            both, one = beta_graphs_worstcase(v, s), beta_graphs_worstcase_one(v, s)
        else:
            both, one = beta_graphs_expected(v, p, s), beta_graphs_expected_one(v, p, s)
        upper = upper_bound_graphs(v, s)
    elif family == "trees":
        if p is not None:
            raise ValueError("p does not apply to trees")
        both, one = beta_trees(v, s), beta_trees_one(v, s)
        upper = upper_bound_trees(v, s)
    else:
        raise ValueError(f"unknown family {family!r}")
    applicable = one if MODE_FOR_READOUT[readout] == "one" else both
    beta_m = upper if beta_m is None else beta_m
    probs: list[float | None] = []
    for d in deltas:
        if applicable > 0 and beta_m >= applicable:
            probs.append(error_probability(d, applicable, beta_m))
        else:
            probs.append(None)
    return BoundReport(family, n, v, s, readout, both, one, upper, p, tuple(deltas), tuple(probs))

