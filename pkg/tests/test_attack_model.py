import pytest

from tragame.attack_model import (TraKind, format_events, format_labels, full_set, hac, mask,
                                  members, parse_labels, received_ac, simulate_per_hop_mapping,
                                  tra_events)
from tragame.fixtures import FIXTURE_ATTACKERS, TABLE_I_TRA, TABLE_II_TRA, load_fixture
from tragame.net_model import AC, E2eFlow, Route


A = FIXTURE_ATTACKERS
sparse = load_fixture("flow-sparse")
dense = load_fixture("flow-dense")


def test_labels_roundtrip():
    assert members(A) == [0, 2, 7, 8]
    assert format_labels(A) == "{1,3,8,9}"
    assert parse_labels("") == 0
    assert mask([]) == 0 and full_set(3) == 0b111
    with pytest.raises(ValueError):
        mask([-1])


def _hacs(flow, attackers):
    return [hac(flow, i, attackers) for i in flow.route.transmitters]


def test_hac_sparse_flow_1():
    f = sparse.flows.by_id(1)  # 1 3 9 5 4, VO
    assert _hacs(f, A) == [AC.VO, AC.BE, AC.BE, AC.BE]
    assert format_events(tra_events(f, A)) == "TRA- at 3"


def test_hac_sparse_flow_8():
    f = sparse.flows.by_id(8)  # 8 3 2, BE
    assert _hacs(f, A) == [AC.VO, AC.BE]
    assert format_events(tra_events(f, A)) == "TRA+ at 8 & TRA- at 3"


def test_hac_no_attackers_keeps_ac():
    for f in list(sparse.flows) + list(dense.flows):
        assert _hacs(f, 0) == [f.ac] * (len(f.route) - 1)


def test_hac_rejects_destination_and_stranger():
    f = sparse.flows.by_id(1)
    with pytest.raises(ValueError):
        hac(f, 3, A)  # node 4 is the destination
    with pytest.raises(ValueError):
        hac(f, 1, A)  # node 2 is not on the route


@pytest.mark.parametrize("fid,expected", sorted(TABLE_I_TRA.items()))
def test_sparse_annotations(fid, expected):
    assert format_events(tra_events(sparse.flows.by_id(fid), A)) == expected


@pytest.mark.parametrize("fid,expected", sorted(TABLE_II_TRA.items()))
def test_dense_annotations(fid, expected):
    assert format_events(tra_events(dense.flows.by_id(fid), A)) == expected


def test_specific_events():
    # attacker source of a VO flow does nothing, a later forwarder downgrades
    assert tra_events(sparse.flows.by_id(3), A) == []
    ev = tra_events(sparse.flows.by_id(5), A)
    assert [(e.node + 1, e.kind) for e in ev] == [(8, TraKind.DOWNGRADE)]
    ev = tra_events(dense.flows.by_id(2), A)
    assert [(e.node + 1, e.kind) for e in ev] == [(1, TraKind.UPGRADE), (8, TraKind.DOWNGRADE)]


def test_all_attack_vo_arrives_be():
    full = full_set(10)
    for f in sparse.flows:
        if f.ac is AC.VO and len(f.route) > 2:
            assert received_ac(f, full) is AC.BE


def test_length_two_vo_untouched():
    f = E2eFlow(1, Route((0, 1)), AC.VO)
    for a in range(4):
        assert simulate_per_hop_mapping(f, a) == [AC.VO]


@pytest.mark.parametrize("inst", [sparse, dense], ids=["sparse", "dense"])
def test_oracle_equivalence_fixtures(inst):
    for a in range(1 << inst.n):
        for f in inst.flows:
            assert simulate_per_hop_mapping(f, a) == _hacs(f, a)


