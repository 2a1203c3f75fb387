import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from tragame.cost_model import GameInstance, InstanceError
from tragame.net_model import (AC, E2eFlow, Route, RouteError, Topology, generate_traffic,
                               random_topology)


def make_instance(adjacency, flows, **kw) -> GameInstance:
    """flows: (1-based route, "VO"|"BE") pairs; ids are assigned 1, 2, ..."""
    fs = [E2eFlow(k + 1, Route(tuple(i - 1 for i in r)), AC.parse(ac)) for k, (r, ac) in enumerate(flows)]
    return GameInstance(Topology(np.array(adjacency, dtype=bool)), fs, **kw)


@pytest.fixture
def pair():
    """Two nodes hearing each other, one BE flow each way."""
    return make_instance([[0, 1], [1, 0]], [((1, 2), "BE"), ((2, 1), "BE")])


def random_instance(seed: int, n: int, pattern: str = "flow-sparse", edge_prob: float = 0.5):
    rng = np.random.default_rng(seed)
    while True:
        topo = random_topology(n, edge_prob, rng)
        try:
            flows = generate_traffic(topo, pattern, rng, (2, min(5, n)))
            return GameInstance(topo, flows)
        except (RouteError, InstanceError):
            continue


small_instances = st.builds(
    random_instance,
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(2, 6),
    pattern=st.sampled_from(["flow-sparse", "flow-dense"]),
)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
