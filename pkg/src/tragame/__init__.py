"""Traffic remapping attack game on multi-hop ad hoc networks."""

__version__ = "0.1.0"

from .attack_model import format_labels, mask, members, parse_labels  # noqa: E402
from .cost_model import CostParams, GameInstance, RankParams  # noqa: E402
from .net_model import AC, E2eFlow, FlowSet, Route, Topology, TrafficPattern  # noqa: E402

__all__ = [
    "AC", "CostParams", "E2eFlow", "FlowSet", "GameInstance", "RankParams", "Route",
    "Topology", "TrafficPattern", "format_labels", "mask", "members", "parse_labels",
]
