"""Hearability topologies, routes and e2e-flow sets.

Nodes are 0-based indices internally. Every text or JSON format uses
1-based node labels, matching how instances are usually written down.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np


class AC(enum.IntEnum):
    """EDCA access category. Higher value means higher priority."""

    BE = 0
    VO = 1

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str) -> "AC":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown access category {text!r}") from None


class TrafficPattern(str, enum.Enum):
    FLOW_SPARSE = "flow-sparse"
    FLOW_DENSE = "flow-dense"
    CUSTOM = "custom"


class TopologyError(ValueError):
    pass


class RouteError(ValueError):
    pass


class Topology:
    """Directed hearability graph; ``adjacency[i, j]`` means j hears i."""

    def __init__(self, adjacency):
        adj = np.array(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise TopologyError(f"adjacency must be square, got shape {adj.shape}")
        if adj.shape[0] < 1:
            raise TopologyError("topology needs at least one node")
        if adj.diagonal().any():
            raise TopologyError("self-loops are not allowed")
        adj.setflags(write=False)
        self.adjacency = adj

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def hears(self, i: int, j: int) -> bool:
        """True iff (i, j) is a link, i.e. j is within hearing range of i."""
        return bool(self.adjacency[i, j])

    def neighbors(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.adjacency[i])]

    def is_symmetric(self) -> bool:
        return bool((self.adjacency == self.adjacency.T).all())

    def is_connected(self) -> bool:
        g = nx.from_numpy_array(self.adjacency | self.adjacency.T)
        return nx.is_connected(g)

    def edge_count(self) -> int:
        """Number of unordered node pairs joined in at least one direction."""
        und = self.adjacency | self.adjacency.T
        return int(und.sum()) // 2

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())

    def __repr__(self):
        return f"Topology(n={self.n}, edges={self.edge_count()})"


@dataclass(frozen=True)
class Route:
    nodes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(int(i) for i in self.nodes))
        if len(self.nodes) < 2:
            raise RouteError("a route needs at least two nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise RouteError(f"route revisits a node: {self.labels()}")

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def destination(self) -> int:
        return self.nodes[-1]

    @property
    def transmitters(self) -> tuple[int, ...]:
        """Nodes that transmit the flow, i.e. every node but the destination."""
        return self.nodes[:-1]

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, i) -> bool:
        return i in self.nodes

    def position(self, i: int) -> int:
        try:
            return self.nodes.index(i)
        except ValueError:
            raise RouteError(f"node {i + 1} is not on route {self.labels()}") from None

    def succ(self, i: int) -> int:
        p = self.position(i)
        if p == len(self.nodes) - 1:
            raise RouteError("the destination has no successor")
        return self.nodes[p + 1]

    def pred(self, i: int) -> int:
        p = self.position(i)
        return self.nodes[max(p - 1, 0)]

    def prefix(self, i: int) -> tuple[int, ...]:
        """Nodes preceding or coinciding with i."""
        return self.nodes[: self.position(i) + 1]

    def precedes(self, i: int, j: int, strict: bool = True) -> bool:
        pi, pj = self.position(i), self.position(j)
        return pi < pj if strict else pi <= pj

    def validate(self, topology: Topology) -> None:
        for i in self.nodes:
            if not 0 <= i < topology.n:
                raise RouteError(f"node {i + 1} outside topology of {topology.n} nodes")
        for a, b in zip(self.nodes, self.nodes[1:]):
            if not topology.hears(a, b):
                raise RouteError(f"no link {a + 1}->{b + 1} on route {self.labels()}")

    def labels(self) -> str:
        return " ".join(str(i + 1) for i in self.nodes)


@dataclass(frozen=True)
class E2eFlow:
    id: int
    route: Route
    ac: AC

    @property
    def source(self) -> int:
        return self.route.source

    @property
    def destination(self) -> int:
        return self.route.destination


class FlowSet(tuple):
    """Immutable sequence of e2e-flows in which every node sources a flow."""

    def __new__(cls, flows: Iterable[E2eFlow], n: int | None = None):
        flows = tuple(flows)
        ids = [f.id for f in flows]
        if len(set(ids)) != len(ids):
            raise ValueError("flow ids must be unique")
        self = super().__new__(cls, flows)
        if n is not None:
            missing = set(range(n)) - {f.source for f in flows}
            if missing:
                labels = ", ".join(str(i + 1) for i in sorted(missing))
                raise ValueError(f"nodes source no flow: {labels}")
        return self

    def sourced_by(self, i: int) -> list[E2eFlow]:
        return [f for f in self if f.source == i]

    def by_id(self, flow_id: int) -> E2eFlow:
        for f in self:
            if f.id == flow_id:
                return f
        raise KeyError(flow_id)

    def validate(self, topology: Topology) -> None:
        for f in self:
            f.route.validate(topology)


# --- text formats -----------------------------------------------------------

def parse_topology(text: str) -> Topology:
    """Parse an incidence matrix of ``0``/``1`` tokens with ``-`` on the diagonal.

    An optional header row of column labels and an optional leading label
    column (as in a printed table, ``|`` separators allowed) are stripped.
    Rows are separated by newlines or ``/``.
    """
    rows = []
    for line in text.replace("|", " ").replace("/", "\n").splitlines():
        toks = line.split()
        if toks:
            rows.append(toks)
    if not rows:
        raise TopologyError("empty topology text")

    def is_grid_token(t):
        return t in ("0", "1", "-")

    # a header row contains no '-' and every token is a label 1..n
    n_guess = len(rows) - 1
    if "-" not in rows[0] and rows[0] == [str(k) for k in range(1, n_guess + 1)]:
        rows = rows[1:]
    n = len(rows)
    if all(len(r) == n + 1 and r[0] == str(k + 1) for k, r in enumerate(rows)):
        rows = [r[1:] for r in rows]

    adj = np.zeros((n, n), dtype=bool)
    for i, r in enumerate(rows):
        if len(r) != n:
            raise TopologyError(f"row {i + 1} has {len(r)} entries, expected {n}")
        for j, t in enumerate(r):
            if not is_grid_token(t):
                raise TopologyError(f"bad token {t!r} at ({i + 1},{j + 1})")
            if (t == "-") != (i == j):
                raise TopologyError(f"'-' must appear exactly on the diagonal, see ({i + 1},{j + 1})")
            adj[i, j] = t == "1"
    return Topology(adj)


def render_topology(topology: Topology) -> str:
    lines = []
    for i in range(topology.n):
        toks = ["-" if i == j else str(int(topology.adjacency[i, j])) for j in range(topology.n)]
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def parse_flows(text: str, topology: Topology | None = None) -> FlowSet:
    """Parse ``id;n1 n2 ... nk;VO|BE`` lines (1-based node labels)."""
    flows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(";")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'id;route;ac', got {line!r}")
        route = Route(tuple(int(t) - 1 for t in parts[1].split()))
        flows.append(E2eFlow(int(parts[0]), route, AC.parse(parts[2])))
    fs = FlowSet(flows, n=topology.n if topology is not None else None)
    if topology is not None:
        fs.validate(topology)
    return fs


def render_flows(flows: Sequence[E2eFlow]) -> str:
    return "".join(f"{f.id};{f.route.labels()};{f.ac}\n" for f in flows)


def flows_to_json(flows: Sequence[E2eFlow]) -> list[dict]:
    return [{"id": f.id, "route": [i + 1 for i in f.route.nodes], "ac": str(f.ac)} for f in flows]


def flows_from_json(items: Iterable[dict]) -> list[E2eFlow]:
    return [
        E2eFlow(int(d["id"]), Route(tuple(int(i) - 1 for i in d["route"])), AC.parse(d["ac"]))
        for d in items
    ]


# --- random generation ------------------------------------------------------

def random_topology(n: int, edge_prob: float, rng: np.random.Generator,
                    max_attempts: int = 10_000) -> Topology:
    """Symmetric G(n, p) topology, resampled until connected."""
    if n < 2:
        raise TopologyError("need at least two nodes")
    if not 0.0 < edge_prob <= 1.0:
        raise TopologyError(f"edge_prob must be in (0, 1], got {edge_prob}")
    iu = np.triu_indices(n, k=1)
    for _ in range(max_attempts):
        adj = np.zeros((n, n), dtype=bool)
        adj[iu] = rng.random(len(iu[0])) < edge_prob
        adj |= adj.T
        topo = Topology(adj)
        if topo.is_connected():
            return topo
    raise TopologyError(f"no connected topology after {max_attempts} draws")


def random_route(topology: Topology, length: int, rng: np.random.Generator,
                 source: int | None = None) -> Route:
    """Self-avoiding random walk of exactly ``length`` nodes.

    Next hops are chosen uniformly among unvisited neighbours; a walk that
    dead-ends is restarted. Gives up after ``10 * n * length`` attempts.
    """
    n = topology.n
    if not 2 <= length <= n:
        raise RouteError(f"route length must be in [2, {n}], got {length}")
    nbrs = [topology.neighbors(i) for i in range(n)]
    for _ in range(10 * n * length):
        cur = int(rng.integers(n)) if source is None else source
        walk = [cur]
        while len(walk) < length:
            options = [j for j in nbrs[cur] if j not in walk]
            if not options:
                break
            cur = options[int(rng.integers(len(options)))]
            walk.append(cur)
        if len(walk) == length:
            return Route(tuple(walk))
    where = "any source" if source is None else f"node {source + 1}"
    raise RouteError(f"no route of length {length} found from {where}")


def generate_traffic(topology: Topology, pattern: TrafficPattern | str,
                     rng: np.random.Generator, length_range: tuple[int, int] = (2, 5),
                     fixture_layout: bool = False) -> FlowSet:
    """Random flow set following the flow-sparse or flow-dense pattern.

    Route lengths are uniform on ``length_range`` (clipped to n). Flow ids
    are 1-based. With ``fixture_layout`` the flow-sparse VO sources are the
    odd-labelled nodes instead of a random half.
    """
    pattern = TrafficPattern(pattern)
    n = topology.n
    lo, hi = length_range
    hi = min(hi, n)
    if not 2 <= lo <= hi:
        raise RouteError(f"invalid length range {length_range} for {n} nodes")

    def draw(src, ac, fid):
        length = int(rng.integers(lo, hi + 1))
        return E2eFlow(fid, random_route(topology, length, rng, source=src), ac)

    flows = []
    if pattern is TrafficPattern.FLOW_SPARSE:
        if fixture_layout:
            vo = {i for i in range(n) if i % 2 == 0}
        else:
            vo = {int(i) for i in rng.permutation(n)[: n // 2]}
        for i in range(n):
            flows.append(draw(i, AC.VO if i in vo else AC.BE, i + 1))
    elif pattern is TrafficPattern.FLOW_DENSE:
        for i in range(n):
            flows.append(draw(i, AC.VO, 2 * i + 1))
            flows.append(draw(i, AC.BE, 2 * i + 2))
    else:
        raise ValueError("custom traffic is loaded from a file, not generated")
    return FlowSet(flows, n=n)
