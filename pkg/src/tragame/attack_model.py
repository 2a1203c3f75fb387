"""Opportunistic traffic remapping attacks along e2e-flow routes.

An attacker set is an ``int`` bitmask: bit ``i`` is set iff node ``i``
attacks. ``mask``/``members`` convert to and from node collections.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .net_model import AC, E2eFlow

AttackerSet = int


def mask(nodes: Iterable[int]) -> AttackerSet:
    m = 0
    for i in nodes:
        if i < 0:
            raise ValueError(f"negative node index {i}")
        m |= 1 << i
    return m


def members(attackers: AttackerSet) -> list[int]:
    out, i = [], 0
    while attackers:
        if attackers & 1:
            out.append(i)
        attackers >>= 1
        i += 1
    return out


def parse_labels(text: str) -> AttackerSet:
    """``"1,3,8,9"`` (1-based labels) -> mask. Empty string is the empty set."""
    text = text.strip()
    if not text:
        return 0
    return mask(int(t) - 1 for t in text.replace(" ", ",").split(",") if t)


def format_labels(attackers: AttackerSet) -> str:
    return "{" + ",".join(str(i + 1) for i in members(attackers)) + "}"


def full_set(n: int) -> AttackerSet:
    return (1 << n) - 1


def _on(attackers: AttackerSet, i: int) -> bool:
    return bool(attackers >> i & 1)


@dataclass(frozen=True)
class HFlow:
    """A flow as transmitted by one node, carrying its possibly remapped AC."""

    transmitter: int
    flow: E2eFlow
    hac: AC


class TraKind(enum.Enum):
    UPGRADE = "TRA+"
    DOWNGRADE = "TRA-"


@dataclass(frozen=True)
class TraEvent:
    node: int
    kind: TraKind

    def __str__(self):
        return f"{self.kind.value} at {self.node + 1}"


def hac(flow: E2eFlow, i: int, attackers: AttackerSet) -> AC:
    """AC carried by ``flow`` when transmitted by node ``i`` (closed form)."""
    nodes = flow.route.nodes
    pos = flow.route.position(i)
    if pos == len(nodes) - 1:
        raise ValueError(f"node {i + 1} is the destination of flow {flow.id}")
    downgraded = any(_on(attackers, j) for j in nodes[1: pos + 1])
    if flow.ac is AC.VO:
        return AC.BE if downgraded else AC.VO
    return AC.VO if _on(attackers, nodes[0]) and not downgraded else AC.BE


def remap(flow: E2eFlow, i: int, incoming: AC, attackers: AttackerSet) -> AC:
    """The AC node ``i`` sets on ``flow``; ``incoming`` is what it received.

    Plausibility: only a source upgrades (its own BE traffic) and only a
    forwarder downgrades (transit VO traffic). Destinations are neutral.
    """
    if i == flow.destination or not _on(attackers, i):
        return incoming
    if i == flow.source:
        return AC.VO if incoming is AC.BE else incoming
    return AC.BE if incoming is AC.VO else incoming


def simulate_per_hop_mapping(flow: E2eFlow, attackers: AttackerSet) -> list[AC]:
    """Apply each node's remapping in route order; one AC per transmitting hop."""
    out = []
    current = flow.ac
    for i in flow.route.transmitters:
        current = remap(flow, i, current, attackers)
        out.append(current)
    return out


def received_ac(flow: E2eFlow, attackers: AttackerSet) -> AC:
    """AC of the h-flow as recognized at the destination."""
    return simulate_per_hop_mapping(flow, attackers)[-1]


def tra_events(flow: E2eFlow, attackers: AttackerSet) -> list[TraEvent]:
    events = []
    current = flow.ac
    for i in flow.route.transmitters:
        new = remap(flow, i, current, attackers)
        if new > current:
            events.append(TraEvent(i, TraKind.UPGRADE))
        elif new < current:
            events.append(TraEvent(i, TraKind.DOWNGRADE))
        current = new
    return events


def format_events(events: list[TraEvent]) -> str:
    return " & ".join(str(e) for e in events)
