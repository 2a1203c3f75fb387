"""Rank-based per-hop metric, flow/nodal costs and the game instance.

Two evaluation paths exist on purpose:

* module-level functions (``outgoing_hflows`` ... ``cost``) follow the
  definitions hop by hop and are used as a reference;
* :class:`GameInstance` precomputes the competition structure once and
  evaluates nodal costs for many attacker sets at a time with numpy.

When the weights are integers the engine works on integer nodal costs
scaled by ``GameInstance.scale`` (the lcm of VO hop counts), so cost
comparisons are exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .attack_model import AttackerSet, HFlow, hac
from .net_model import (AC, E2eFlow, FlowSet, Topology, flows_from_json,
                        flows_to_json)


@dataclass(frozen=True)
class RankParams:
    alpha: float = 40
    beta: float = 10

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")


@dataclass(frozen=True)
class CostParams:
    gamma_vo: float = 2
    gamma_be: float = 1

    def __post_init__(self):
        if self.gamma_vo <= 1:
            raise ValueError("gamma_vo must be > 1")
        if self.gamma_be != 1:
            raise ValueError("gamma_be is fixed at 1")

    def gamma(self, ac: AC) -> float:
        return self.gamma_vo if ac is AC.VO else self.gamma_be


class CompetitionCount(NamedTuple):
    vo: int
    be: int


class InstanceError(ValueError):
    pass


def rank(hac_: AC, counts: CompetitionCount, params: RankParams = RankParams()):
    """Per-hop rank; lower is better."""
    vo, be = counts
    is_be = hac_ is AC.BE
    crowded = vo > 1 or be > 2
    return is_be * params.alpha * (vo + crowded) + params.beta * (vo + is_be) + be


def _is_integral(x) -> bool:
    return float(x).is_integer()


class GameInstance:
    """Topology + flows + weights; evaluates node costs for attacker sets."""

    table_limit = 20

    def __init__(self, topology: Topology, flows: Sequence[E2eFlow],
                 rank_params: RankParams = RankParams(),
                 cost_params: CostParams = CostParams()):
        self.topology = topology
        self.flows = FlowSet(flows, n=topology.n)
        self.flows.validate(topology)
        self.rank_params = rank_params
        self.cost_params = cost_params
        self.n = topology.n
        self.exact = all(_is_integral(x) for x in
                         (rank_params.alpha, rank_params.beta, cost_params.gamma_vo))
        self._dtype = np.int64 if self.exact else np.float64
        self._build()
        self._rows: dict[int, tuple] = {}
        self._table = None
        base = self.nodal_scaled(np.array([0]))[0]
        if (base <= 0).any():
            bad = ", ".join(str(i + 1) for i in np.flatnonzero(base <= 0))
            raise InstanceError(f"zero all-neutral nodal cost at node(s) {bad}")
        self.baseline_scaled = base
        self.baseline = base / self.scale

    def _build(self):
        adj = self.topology.adjacency
        tx, succ, flow_of, prefix_bits, src_bits = [], [], [], [], []
        self.flow_slots: list[range] = []
        for fi, f in enumerate(self.flows):
            start = len(tx)
            nodes = f.route.nodes
            for p in range(len(nodes) - 1):
                tx.append(nodes[p])
                succ.append(nodes[p + 1])
                flow_of.append(fi)
                prefix_bits.append(sum(1 << j for j in nodes[1: p + 1]))
                src_bits.append(1 << nodes[0])
            self.flow_slots.append(range(start, len(tx)))
        H = len(tx)
        self.slot_tx = np.array(tx)
        self.slot_flow = np.array(flow_of)
        self._prefix_bits = np.array(prefix_bits, dtype=np.int64)
        self._src_bits = np.array(src_bits, dtype=np.int64)
        self._slot_vo = np.array([self.flows[fi].ac is AC.VO for fi in flow_of])

        # which transmitters an h-flow competes with: own queue, carrier
        # sensing, and nodes hidden from the transmitter but heard by the receiver
        comp = np.zeros((H, H), dtype=bool)
        for s in range(H):
            i, nxt = tx[s], succ[s]
            near = adj[:, i].copy()
            near[i] = True
            hidden = adj[:, nxt] & ~adj[:, i]
            hidden[i] = False
            comp[s] = (near | hidden)[self.slot_tx]
            comp[s, s] = False
        self.competitors = comp
        self._comp_t = comp.T.astype(np.int32)
        self._n_comp = comp.sum(axis=1).astype(np.int32)

        hops = [len(f.route) - 1 for f in self.flows if f.ac is AC.VO]
        self.scale = math.lcm(*hops) if hops else 1

    # --- vectorized engine ------------------------------------------------

    def hac_matrix(self, masks: np.ndarray) -> np.ndarray:
        """Boolean (len(masks), n_hflows) array: True where the h-flow is VO."""
        m = np.asarray(masks, dtype=np.int64)[:, None]
        clean = (m & self._prefix_bits) == 0
        upgraded = (m & self._src_bits) != 0
        return clean & (self._slot_vo | upgraded)

    def rank_matrix(self, masks: np.ndarray) -> np.ndarray:
        is_vo = self.hac_matrix(masks)
        vo = is_vo.astype(np.int32) @ self._comp_t
        be = self._n_comp - vo
        is_be = ~is_vo
        a, b = self.rank_params.alpha, self.rank_params.beta
        crowded = (vo > 1) | (be > 2)
        r = is_be * a * (vo + crowded) + b * (vo + is_be) + be
        return r.astype(self._dtype)

    def nodal_scaled(self, masks: np.ndarray) -> np.ndarray:
        """Nodal costs times ``scale`` for each mask, shape (len(masks), n)."""
        masks = np.atleast_1d(np.asarray(masks, dtype=np.int64))
        ranks = self.rank_matrix(masks)
        out = np.zeros((len(masks), self.n), dtype=self._dtype)
        for fi, f in enumerate(self.flows):
            sl = self.flow_slots[fi]
            block = ranks[:, sl.start: sl.stop]
            if f.ac is AC.VO:
                fc = block.sum(axis=1) * (self.scale // len(sl))
            else:
                fc = block.max(axis=1) * self.scale
            gamma = self.cost_params.gamma(f.ac)
            out[:, f.source] += (int(gamma) if self.exact else gamma) * fc
        return out

    def nodal_row(self, attackers: AttackerSet) -> tuple:
        """Scaled nodal costs of one attacker set (memoized)."""
        row = self._rows.get(attackers)
        if row is None:
            if self._table is not None:
                row = tuple(self._table[attackers].tolist())
            else:
                row = tuple(self.nodal_scaled(np.array([attackers]))[0].tolist())
            self._rows[attackers] = row
        return row

    def table(self) -> np.ndarray:
        """Scaled nodal costs for all 2^n attacker sets, indexed by mask."""
        if self._table is None:
            if self.n > self.table_limit:
                raise InstanceError(f"full table needs n <= {self.table_limit}")
            masks = np.arange(1 << self.n, dtype=np.int64)
            chunks = [self.nodal_scaled(masks[k: k + 4096]) for k in range(0, len(masks), 4096)]
            self._table = np.concatenate(chunks)
        return self._table

    def cost_table(self) -> np.ndarray:
        return self.table() / self.baseline_scaled

    def nodalcosts(self, attackers: AttackerSet) -> np.ndarray:
        return np.array(self.nodal_row(attackers), dtype=float) / self.scale

    def costs(self, attackers: AttackerSet) -> np.ndarray:
        return np.array(self.nodal_row(attackers), dtype=float) / self.baseline_scaled

    def cost(self, attackers: AttackerSet, i: int) -> float:
        return self.nodal_row(attackers)[i] / float(self.baseline_scaled[i])

    def cost_exact(self, attackers: AttackerSet, i: int):
        """Normalized cost as a Fraction (float when weights are not integral)."""
        num = self.nodal_row(attackers)[i]
        if self.exact:
            return Fraction(int(num), int(self.baseline_scaled[i]))
        return num / float(self.baseline_scaled[i])

    # --- persistence ------------------------------------------------------

    def to_bundle(self) -> dict:
        return {
            "topology": self.topology.adjacency.astype(int).tolist(),
            "flows": flows_to_json(self.flows),
            "params": {**asdict(self.rank_params), "gamma_vo": self.cost_params.gamma_vo},
        }

    @classmethod
    def from_bundle(cls, bundle: dict) -> "GameInstance":
        params = bundle.get("params", {})
        return cls(
            Topology(np.array(bundle["topology"], dtype=bool)),
            flows_from_json(bundle["flows"]),
            RankParams(params.get("alpha", 40), params.get("beta", 10)),
            CostParams(params.get("gamma_vo", 2)),
        )

    @classmethod
    def load(cls, path) -> "GameInstance":
        return cls.from_bundle(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_bundle(), indent=1) + "\n")

    def __repr__(self):
        return f"GameInstance(n={self.n}, flows={len(self.flows)})"


# --- reference path -----------------------------------------------------------

def outgoing_hflows(instance: GameInstance, attackers: AttackerSet, i: int) -> list[HFlow]:
    return [HFlow(i, f, hac(f, i, attackers))
            for f in instance.flows if i in f.route.transmitters]


def competing_hflows(instance: GameInstance, attackers: AttackerSet, h: HFlow) -> list[HFlow]:
    topo = instance.topology
    i = h.transmitter
    nxt = h.flow.route.succ(i)
    senders = [i]
    senders += [j for j in range(topo.n) if topo.hears(j, i)]
    senders += [j for j in range(topo.n)
                if j != i and topo.hears(j, nxt) and not topo.hears(j, i)]
    out = []
    for j in dict.fromkeys(senders):
        out += [g for g in outgoing_hflows(instance, attackers, j) if g != h]
    return out


def competition_count(instance: GameInstance, attackers: AttackerSet, h: HFlow) -> CompetitionCount:
    ch = competing_hflows(instance, attackers, h)
    vo = sum(g.hac is AC.VO for g in ch)
    return CompetitionCount(vo, len(ch) - vo)


def hop_ranks(instance: GameInstance, attackers: AttackerSet, flow: E2eFlow) -> list:
    ranks = []
    for i in flow.route.transmitters:
        h = HFlow(i, flow, hac(flow, i, attackers))
        ranks.append(rank(h.hac, competition_count(instance, attackers, h), instance.rank_params))
    return ranks


def flowcost(instance: GameInstance, attackers: AttackerSet, flow: E2eFlow):
    """Mean hop rank for VO flows, bottleneck (max) hop rank for BE flows."""
    ranks = hop_ranks(instance, attackers, flow)
    if flow.ac is AC.VO:
        return Fraction(sum(ranks), len(ranks)) if instance.exact else sum(ranks) / len(ranks)
    return max(ranks)


def nodalcost(instance: GameInstance, attackers: AttackerSet, i: int):
    own = instance.flows.sourced_by(i)
    if not own:
        raise ValueError(f"node {i + 1} sources no flow")
    return sum(instance.cost_params.gamma(f.ac) * flowcost(instance, attackers, f) for f in own)


def cost(instance: GameInstance, attackers: AttackerSet, i: int):
    num, den = nodalcost(instance, attackers, i), nodalcost(instance, 0, i)
    if instance.exact:
        return Fraction(num) / Fraction(den)
    return num / den


def cost_change_percent(c) -> int:
    """(cost - 1) as a whole percentage, rounding halves away from zero."""
    x = (Fraction(c) - 1) * 100 if not isinstance(c, float) else (c - 1) * 100
    if isinstance(x, Fraction):
        q, r = divmod(abs(x.numerator), x.denominator)
        q += 2 * r >= x.denominator
        return int(q if x >= 0 else -q)
    return int(math.copysign(math.floor(abs(x) + 0.5), x))
