"""The two 10-node example instances and their reference annotations."""
from __future__ import annotations

import json
from importlib import resources

from .attack_model import full_set, parse_labels
from .cost_model import GameInstance

FIXTURE_ATTACKERS = parse_labels("1,3,8,9")

# flow id -> TRA annotation, attackers {1,3,8,9}
TABLE_I_TRA = {
    1: "TRA- at 3", 2: "", 3: "", 4: "", 5: "TRA- at 8",
    6: "", 7: "TRA- at 8", 8: "TRA+ at 8 & TRA- at 3", 9: "TRA- at 3", 10: "",
}

TABLE_II_TRA = {
    1: "TRA- at 3", 2: "TRA+ at 1 & TRA- at 8", 3: "", 4: "", 5: "TRA- at 8",
    6: "TRA+ at 3", 7: "TRA- at 8", 8: "", 9: "TRA- at 3", 10: "",
    11: "TRA- at 3", 12: "", 13: "TRA- at 8", 14: "", 15: "TRA- at 3",
    16: "TRA+ at 8", 17: "TRA- at 8", 18: "TRA+ at 9", 19: "TRA- at 3", 20: "",
}

# (pattern, profile) -> per-node (cost change %, state), nodes 1..10
TABLE_III = {
    ("flow-sparse", "A"): [
        (133, "lose"), (-40, "don't mind"), (-40, "don't lose"), (-49, "don't mind"),
        (104, "mind"), (-49, "don't mind"), (131, "mind"), (-41, "don't lose"),
        (89, "lose"), (-46, "don't mind")],
    ("flow-dense", "A"): [
        (11, "lose"), (-34, "don't mind"), (-26, "don't lose"), (-2, "don't mind"),
        (2, "mind"), (11, "mind"), (-1, "don't mind"), (-50, "don't lose"),
        (-28, "don't lose"), (8, "mind")],
    ("flow-sparse", "N"): [
        (124, "lose"), (-52, "don't lose"), (135, "lose"), (-91, "don't lose"),
        (141, "lose"), (-91, "don't lose"), (149, "lose"), (-46, "don't lose"),
        (147, "lose"), (-52, "don't lose")],
    ("flow-dense", "N"): [
        (-8, "don't lose"), (-34, "don't lose"), (-37, "don't lose"), (-5, "don't lose"),
        (-34, "don't lose"), (-36, "don't lose"), (-6, "don't lose"), (-7, "don't lose"),
        (-20, "don't lose"), (-24, "don't lose")],
}

_FILES = {"flow-sparse": "flow_sparse.json", "flow-dense": "flow_dense.json"}
ALIASES = {"table-I": "flow-sparse", "table-II": "flow-dense",
           "I": "flow-sparse", "II": "flow-dense"}


def load_fixture(name: str) -> GameInstance:
    """Built-in example instance: ``flow-sparse``/``table-I`` or ``flow-dense``/``table-II``."""
    name = ALIASES.get(name, name)
    try:
        fname = _FILES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(_FILES)}") from None
    text = resources.files("tragame.data").joinpath(fname).read_text()
    return GameInstance.from_bundle(json.loads(text))


def profile_for(tag: str, n: int = 10) -> int:
    return FIXTURE_ATTACKERS if tag == "A" else full_set(n)
