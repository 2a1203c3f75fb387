"""Single-stage TRA game: Nash tests, enumeration, classification, Pareto order.

All comparisons between costs of the same node go through the instance's
scaled nodal costs, which share a denominator per node; with integral
weights they are exact integers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .attack_model import AttackerSet, members
from .cost_model import GameInstance

DEFAULT_EXHAUSTIVE_BOUND = 24


class NodeState(enum.Enum):
    LOSE = "lose"
    DONT_LOSE = "don't lose"
    MIND = "mind"
    DONT_MIND = "don't mind"

    @property
    def beneficiary(self) -> bool:
        return self in (NodeState.DONT_LOSE, NodeState.DONT_MIND)


class NEStatus(enum.Enum):
    STRICT = "strict"
    WEAK = "weak"
    NONE = "none"


class Pareto(enum.Enum):
    A_SUPERIOR = "A superior"
    B_SUPERIOR = "B superior"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class ProfileAnalysis:
    attackers: AttackerSet
    costs: tuple[float, ...]
    classification: tuple[NodeState, ...]
    ne_status: NEStatus
    violated_count: int


def flip(attackers: AttackerSet, i: int, n: int) -> AttackerSet:
    """The profile in which only node ``i`` changes behaviour."""
    if not 0 <= i < n:
        raise ValueError(f"node index {i} out of range for {n} nodes")
    return attackers ^ (1 << i)


def delta_threshold(delta: float, n: int) -> int:
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must be in [0, 1], got {delta}")
    # guard against 0.1 * 10 = 0.9999...
    return math.floor(delta * n + 1e-9)


def _own_and_flipped(instance: GameInstance, attackers: AttackerSet):
    """Scaled cost of each node at A and at the profile where it alone flips."""
    n = instance.n
    own = instance.nodal_row(attackers)
    dev = [instance.nodal_row(attackers ^ (1 << i))[i] for i in range(n)]
    return own, dev


def delta_violations(instance: GameInstance, attackers: AttackerSet) -> int:
    """Number of nodes that would strictly gain by flipping alone."""
    own, dev = _own_and_flipped(instance, attackers)
    return sum(own[i] > dev[i] for i in range(instance.n))


def is_nash(instance: GameInstance, attackers: AttackerSet, mode: str = "weak") -> bool:
    own, dev = _own_and_flipped(instance, attackers)
    if mode == "weak":
        return all(own[i] <= dev[i] for i in range(instance.n))
    if mode == "strict":
        return all(own[i] < dev[i] for i in range(instance.n))
    raise ValueError(f"mode must be 'weak' or 'strict', got {mode!r}")


def is_delta_ne(instance: GameInstance, attackers: AttackerSet, delta: float) -> bool:
    return delta_violations(instance, attackers) <= delta_threshold(delta, instance.n)


def ne_status(instance: GameInstance, attackers: AttackerSet) -> NEStatus:
    if is_nash(instance, attackers, "strict"):
        return NEStatus.STRICT
    if is_nash(instance, attackers, "weak"):
        return NEStatus.WEAK
    return NEStatus.NONE


def profile_stats(instance: GameInstance) -> tuple[np.ndarray, np.ndarray]:
    """Per-profile violation counts and strict-NE flags over all 2^n profiles.

    Index ``k`` of both arrays refers to the attacker set with mask ``k``.
    """
    table = instance.table()
    masks = np.arange(1 << instance.n)
    violations = np.zeros(len(masks), dtype=np.int32)
    strict = np.ones(len(masks), dtype=bool)
    for i in range(instance.n):
        own = table[:, i]
        dev = table[masks ^ (1 << i), i]
        violations += own > dev
        strict &= own < dev
    return violations, strict


def enumerate_ne(instance: GameInstance, delta: float = 0.0,
                 max_nodes: int = DEFAULT_EXHAUSTIVE_BOUND) -> list[AttackerSet]:
    """All delta-NE profiles, ordered by attacker count then mask value."""
    n = instance.n
    if n > max_nodes:
        raise ValueError(f"exhaustive search limited to {max_nodes} nodes, got {n}")
    limit = delta_threshold(delta, n)
    if n <= instance.table_limit:
        violations, _ = profile_stats(instance)
        found = np.flatnonzero(violations <= limit).tolist()
    else:
        found = [a for a in range(1 << n) if delta_violations(instance, a) <= limit]
    return sorted(found, key=lambda a: (a.bit_count(), a))


def ne_proportion(instance: GameInstance, delta: float = 0.0) -> float:
    """Fraction of the 2^n profiles that are delta-NE."""
    violations, _ = profile_stats(instance)
    return float(np.mean(violations <= delta_threshold(delta, instance.n)))


def classify_nodes(instance: GameInstance, attackers: AttackerSet) -> list[NodeState]:
    row, base = instance.nodal_row(attackers), instance.baseline_scaled
    out = []
    for i in range(instance.n):
        worse = row[i] > base[i]
        if attackers >> i & 1:
            out.append(NodeState.LOSE if worse else NodeState.DONT_LOSE)
        else:
            out.append(NodeState.MIND if worse else NodeState.DONT_MIND)
    return out


def beneficiary_share(instance: GameInstance, attackers: AttackerSet) -> float:
    """Fraction of nodes whose cost has not increased over the all-neutral case."""
    row, base = instance.nodal_row(attackers), instance.baseline_scaled
    return sum(row[i] <= base[i] for i in range(instance.n)) / instance.n


def pareto_compare(instance: GameInstance, a: AttackerSet, b: AttackerSet) -> Pareto:
    ra, rb = instance.nodal_row(a), instance.nodal_row(b)
    a_le = all(x <= y for x, y in zip(ra, rb))
    b_le = all(y <= x for x, y in zip(ra, rb))
    if a_le and b_le:
        return Pareto.EQUIVALENT
    if a_le:
        return Pareto.A_SUPERIOR
    if b_le:
        return Pareto.B_SUPERIOR
    return Pareto.INCOMPARABLE


def analyze_profile(instance: GameInstance, attackers: AttackerSet) -> ProfileAnalysis:
    return ProfileAnalysis(
        attackers=attackers,
        costs=tuple(instance.costs(attackers).tolist()),
        classification=tuple(classify_nodes(instance, attackers)),
        ne_status=ne_status(instance, attackers),
        violated_count=delta_violations(instance, attackers),
    )


def attacker_labels(attackers: AttackerSet) -> list[int]:
    return [i + 1 for i in members(attackers)]
