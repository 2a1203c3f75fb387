import csv
import json

import pytest

from tragame.experiments import (ExperimentConfig, aggregate, generate_instance, reproduce_fixture,
                                 run_campaign, run_instance, scatter_rows)
from tragame.net_model import AC


def small(**kw):
    base = dict(instances=2, runs=3, n=6, max_stages=40, stability_window=10, seed=5)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"instances": 4, "pattern": "flow-dense", "deltas": [0, 0.5]}))
    cfg = ExperimentConfig.from_json(p)
    assert cfg.instances == 4 and cfg.deltas == (0.0, 0.5)
    assert ExperimentConfig(**cfg.to_dict()) == cfg
    p.write_text(json.dumps({"instance": 4}))
    with pytest.raises(ValueError):
        ExperimentConfig.from_json(p)


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        ExperimentConfig(pattern="flow-medium")
    with pytest.raises(ValueError):
        ExperimentConfig(deltas=(1.5,))
    with pytest.raises(ValueError):
        ExperimentConfig(runs=0)


def test_instances_are_reproducible_in_isolation():
    cfg = small()
    a = generate_instance(cfg, 1)
    b = generate_instance(cfg, 1)
    assert a.topology == b.topology and tuple(a.flows) == tuple(b.flows)
    assert a.topology != generate_instance(cfg, 0).topology or a.flows != generate_instance(cfg, 0).flows


def test_dense_generation():
    inst = generate_instance(small(pattern="flow-dense"), 0)
    assert len(inst.flows) == 12
    assert sum(f.ac is AC.VO for f in inst.flows) == 6


def test_run_instance_row():
    res = run_instance(small(), 0)
    row = res.row
    for key in ("ne_pct_0", "ne_pct_0.1", "ne_pct_0.2", "weak_ne", "strict_ne", "converged_pct",
                "mixed_qe_pct", "ne_hits_0", "ne_hits_qe_0.2", "initial_beneficiary_pct",
                "final_beneficiary_pct", "anomalous_neutral_pct"):
        assert key in row
    assert 0 <= row["ne_pct_0"] <= row["ne_pct_0.1"] <= row["ne_pct_0.2"] <= 100
    assert len(res.runs) == 6
    assert res.dissatisfied_series.shape == (41,)
    # empty-start runs begin with nobody satisfied
    assert res.dissatisfied_series[0] == 6


def test_campaign_determinism_and_files(tmp_path):
    cfg = small(out=str(tmp_path / "a"))
    r1 = run_campaign(cfg)
    run_campaign(small(out=str(tmp_path / "b")))
    for name in ("instances.csv", "runs.csv", "evolution.csv", "scatter.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["provenance"]["seed"] == 5 and rep["provenance"]["config"]["runs"] == 3
    assert r1.aggregate["instances"] == 2
    with open(tmp_path / "a" / "scatter.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0]) == {"instance", "metric", "x", "y"}
    assert len(rows) == 2 * 4


def test_aggregate_rules():
    rows = [
        {"instance": 0, "ne_pct_0": 1.0, "ne_hits_0": 5.0, "weak_ne": 3, "strict_ne": 1,
         "initial_beneficiary_pct": 50.0, "final_beneficiary_pct": 60.0},
        {"instance": 1, "ne_pct_0": 2.0, "ne_hits_0": 2.0, "weak_ne": 1, "strict_ne": 0,
         "initial_beneficiary_pct": 50.0, "final_beneficiary_pct": 50.0},
    ]
    agg = aggregate(rows, (0.0,))
    assert agg["ne_seeking_pct_0"] == 50.0
    assert agg["effective_pct"] == 50.0
    assert agg["weak_share_of_ne"] == 0.8
    assert agg["median_ne_pct_0"] == 1.5
    assert len(scatter_rows(rows, (0.0,))) == 4


@pytest.mark.parametrize("table,total", [("I", 10), ("II", 20)])
def test_tra_tables(table, total):
    rep = reproduce_fixture(table)
    assert rep.ok and len(rep.cells) == total


def test_cost_table_report_shape():
    rep = reproduce_fixture("III")
    assert len(rep.cells) == 40
    assert "Table III" in rep.summary()
