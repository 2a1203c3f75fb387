"""Boundedly rational multistage play of the TRA game.

Each stage every dissatisfied node may switch behaviour with a probability
driven by how often its current behaviour has raised its cost so far. A node
is satisfied when its current cost is no larger than in any of the last
``cm`` stages; satisfied nodes keep their behaviour.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .attack_model import AttackerSet, full_set
from .cost_model import GameInstance
from .game import NEStatus, beneficiary_share, delta_threshold, delta_violations, ne_status


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def substream(*keys: int) -> np.random.Generator:
    """Independent generator for e.g. (master seed, instance id, run id)."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


@dataclass(frozen=True)
class MultistageConfig:
    cm: int = 10
    sigma: Callable[[float], float] = logistic
    max_stages: int = 200
    stability_window: int = 50
    initial_set: str | int = "empty"
    seed: int | None = None
    # "previous": counters keyed on membership in A(k-1) (canonical);
    # "current": keyed on A(k), kept only for comparison
    attribution: str = "previous"

    def __post_init__(self):
        if self.cm < 1:
            raise ValueError("cm must be >= 1")
        if self.max_stages < 0:
            raise ValueError("max_stages must be >= 0")
        if not 1 <= self.stability_window <= max(self.max_stages, 1):
            raise ValueError("stability_window must be in [1, max_stages]")
        if self.attribution not in ("previous", "current"):
            raise ValueError("attribution must be 'previous' or 'current'")
        if isinstance(self.initial_set, str) and self.initial_set not in ("empty", "full", "random"):
            raise ValueError(f"unknown initial set {self.initial_set!r}")


class NodeCounters(NamedTuple):
    lose: int
    dont_lose: int
    mind: int
    dont_mind: int


@dataclass
class MultistageState:
    n: int
    cm: int
    stage: int = 0
    attackers: AttackerSet = 0
    lose: list[int] = field(default_factory=list)
    dont_lose: list[int] = field(default_factory=list)
    mind: list[int] = field(default_factory=list)
    dont_mind: list[int] = field(default_factory=list)
    history: deque = field(default_factory=deque)  # scaled nodal rows, oldest first
    satisfied: list[bool] = field(default_factory=list)

    @classmethod
    def initial(cls, instance: GameInstance, attackers: AttackerSet, cm: int) -> "MultistageState":
        n = instance.n
        return cls(n=n, cm=cm, stage=0, attackers=attackers,
                   lose=[0] * n, dont_lose=[0] * n, mind=[0] * n, dont_mind=[0] * n,
                   history=deque([instance.nodal_row(attackers)], maxlen=cm + 1),
                   satisfied=[False] * n)

    def counters(self, i: int) -> NodeCounters:
        return NodeCounters(self.lose[i], self.dont_lose[i], self.mind[i], self.dont_mind[i])

    def copy(self) -> "MultistageState":
        return replace(self, lose=list(self.lose), dont_lose=list(self.dont_lose),
                       mind=list(self.mind), dont_mind=list(self.dont_mind),
                       history=deque(self.history, maxlen=self.cm + 1),
                       satisfied=list(self.satisfied))

    @property
    def dissatisfied(self) -> int:
        return self.n - sum(self.satisfied)


def satisfied(history: Sequence, k: int, cm: int) -> bool:
    """Satisfaction of one node at stage ``k``.

    ``history`` holds the node's costs up to and including stage ``k``
    (at least the last ``cm + 1`` of them once ``k >= cm``).
    """
    if k < cm:
        return False
    if len(history) < cm + 1:
        raise ValueError(f"need {cm + 1} stages of history at stage {k}, got {len(history)}")
    now = history[-1]
    return all(now <= history[-1 - l] for l in range(1, cm + 1))


def _advance(instance: GameInstance, state: MultistageState, sigma, rng: np.random.Generator,
             attribution: str = "previous") -> None:
    n = state.n
    prev = state.attackers
    draws = rng.random(n)
    new = 0
    for i in range(n):
        if prev >> i & 1:
            keep = state.satisfied[i] or not draws[i] < sigma(state.lose[i] - state.dont_lose[i])
            if keep:
                new |= 1 << i
        elif not state.satisfied[i] and draws[i] < sigma(state.mind[i] - state.dont_mind[i]):
            new |= 1 << i

    row = instance.nodal_row(new)
    old = state.history[-1]
    member = prev if attribution == "previous" else new
    for i in range(n):
        if row[i] > old[i]:
            if member >> i & 1:
                state.lose[i] += 1
            else:
                state.mind[i] += 1
        elif member >> i & 1:
            state.dont_lose[i] += 1
        else:
            state.dont_mind[i] += 1

    state.history.append(row)
    state.stage += 1
    state.attackers = new
    k, cm = state.stage, state.cm
    if k < cm:
        state.satisfied = [False] * n
    else:
        past = list(state.history)[:-1]
        state.satisfied = [all(row[i] <= h[i] for h in past) for i in range(n)]


def step(instance: GameInstance, state: MultistageState, rng: np.random.Generator,
         sigma: Callable[[float], float] = logistic, attribution: str = "previous") -> MultistageState:
    """Next stage of the multistage strategy; ``state`` is left untouched."""
    nxt = state.copy()
    _advance(instance, nxt, sigma, rng, attribution)
    return nxt


class StageRecord(NamedTuple):
    k: int
    attackers: AttackerSet
    n_attackers: int
    dissatisfied: int
    nodal: tuple  # scaled nodal costs, see GameInstance.nodal_row


@dataclass
class RunTrace:
    records: list[StageRecord]
    quasi_equilibrium: AttackerSet | None
    converged: bool

    @property
    def initial(self) -> AttackerSet:
        return self.records[0].attackers

    @property
    def final(self) -> AttackerSet:
        return self.records[-1].attackers

    def costs(self, instance: GameInstance, k: int) -> np.ndarray:
        return np.array(self.records[k].nodal, dtype=float) / instance.baseline_scaled


def _stable(prev: StageRecord, cur: StageRecord) -> bool:
    return cur.attackers == prev.attackers and cur.dissatisfied == 0


def initial_attackers(spec, n: int, rng: np.random.Generator) -> AttackerSet:
    if spec == "empty":
        return 0
    if spec == "full":
        return full_set(n)
    if spec == "random":
        return int(rng.integers(0, 1 << n))
    a = int(spec)
    if a >> n:
        raise ValueError("explicit initial set has nodes outside the instance")
    return a


def run(instance: GameInstance, config: MultistageConfig = MultistageConfig(),
        rng: np.random.Generator | None = None) -> RunTrace:
    """Play from A(0) until quasi-equilibrium is detected or ``max_stages``."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    a0 = initial_attackers(config.initial_set, instance.n, rng)
    state = MultistageState.initial(instance, a0, config.cm)
    records = [StageRecord(0, a0, a0.bit_count(), state.dissatisfied, state.history[-1])]
    stable = 0
    while state.stage < config.max_stages:
        _advance(instance, state, config.sigma, rng, config.attribution)
        rec = StageRecord(state.stage, state.attackers, state.attackers.bit_count(),
                          state.dissatisfied, state.history[-1])
        stable = stable + 1 if _stable(records[-1], rec) else 0
        records.append(rec)
        if stable >= config.stability_window:
            break
    qe = detect_quasi_equilibrium(records, config.stability_window)
    return RunTrace(records, qe.attackers if qe.converged else None, qe.converged)


class QuasiEquilibrium(NamedTuple):
    attackers: AttackerSet
    converged: bool


def detect_quasi_equilibrium(trace: RunTrace | Sequence[StageRecord],
                             stability_window: int) -> QuasiEquilibrium:
    """Final attacker set, flagged converged iff the last ``stability_window``
    stages kept the same set with every node satisfied."""
    records = trace.records if isinstance(trace, RunTrace) else trace
    final = records[-1].attackers
    if len(records) <= stability_window:
        return QuasiEquilibrium(final, False)
    tail = records[-stability_window - 1:]
    ok = all(_stable(a, b) for a, b in zip(tail, tail[1:]))
    return QuasiEquilibrium(final, ok)


# --- asymptotic metrics -------------------------------------------------------

def asymptotic_set(trace: RunTrace, converged_only: bool = False) -> AttackerSet | None:
    if converged_only:
        return trace.quasi_equilibrium
    return trace.final


def ne_hits(instance: GameInstance, finals: Iterable[AttackerSet | None], delta: float = 0.0) -> float:
    """Percentage of runs whose asymptotic set is a delta-NE.

    ``None`` entries (runs without a detected quasi-equilibrium) count as misses.
    """
    finals = list(finals)
    if not finals:
        return 0.0
    limit = delta_threshold(delta, instance.n)
    hits = sum(a is not None and delta_violations(instance, a) <= limit for a in finals)
    return 100.0 * hits / len(finals)


def effectiveness(instance: GameInstance, runs: Iterable[RunTrace]) -> tuple[float, float]:
    """(initial, asymptotic) beneficiary percentages averaged over runs."""
    runs = list(runs)
    init = np.mean([beneficiary_share(instance, r.initial) for r in runs])
    asym = np.mean([beneficiary_share(instance, r.final) for r in runs])
    return 100.0 * float(init), 100.0 * float(asym)


def anomalous_nodes(instance: GameInstance, a_inf: AttackerSet) -> tuple[int, int]:
    """Counts of (attacker-type, neutral-type) nodes that would gain by
    flipping alone without helping other attackers / hurting other neutrals."""
    n = instance.n
    here = instance.nodal_row(a_inf)
    attackers = neutrals = 0
    for i in range(n):
        flipped = a_inf ^ (1 << i)
        there = instance.nodal_row(flipped)
        if not there[i] < here[i]:
            continue
        if a_inf >> i & 1:
            if all(there[j] >= here[j] for j in range(n) if flipped >> j & 1):
                attackers += 1
        elif all(there[j] <= here[j] for j in range(n) if not flipped >> j & 1):
            neutrals += 1
    return attackers, neutrals


def run_summary(instance: GameInstance, trace: RunTrace) -> dict:
    final = trace.final
    return {
        "final": final,
        "converged": trace.converged,
        "stages": trace.records[-1].k,
        "ne_status": ne_status(instance, final).value,
        "violations": delta_violations(instance, final),
        "initial_beneficiary": 100.0 * beneficiary_share(instance, trace.initial),
        "final_beneficiary": 100.0 * beneficiary_share(instance, final),
    }


__all__ = [
    "MultistageConfig", "MultistageState", "NodeCounters", "RunTrace", "StageRecord",
    "QuasiEquilibrium", "NEStatus", "logistic", "substream", "satisfied", "step", "run",
    "detect_quasi_equilibrium", "ne_hits", "effectiveness", "anomalous_nodes",
    "initial_attackers", "asymptotic_set", "run_summary",
]
