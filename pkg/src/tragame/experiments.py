"""Fixture regression checks and seeded Monte Carlo campaigns.

Every random draw in a campaign comes from a substream keyed by
``(seed, purpose, instance, run)``, so any single instance or run can be
regenerated in isolation and the written files are byte-identical for
equal configurations.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean, median

import numpy as np

from . import __version__
from .attack_model import format_events, format_labels, full_set, tra_events
from .cost_model import (CostParams, GameInstance, InstanceError, RankParams,
                         cost_change_percent)
from .fixtures import TABLE_I_TRA, TABLE_II_TRA, TABLE_III, load_fixture, profile_for
from .game import beneficiary_share, classify_nodes, delta_threshold, profile_stats
from .multistage import MultistageConfig, anomalous_nodes, ne_hits, run, substream
from .net_model import (RouteError, TopologyError, TrafficPattern, generate_traffic,
                        random_topology)

log = logging.getLogger(__name__)

# substream purposes
_INSTANCE, _RUN_EMPTY, _RUN_RANDOM = 0, 1, 2


@dataclass
class ExperimentConfig:
    instances: int = 100
    n: int = 10
    pattern: str = "flow-sparse"
    length_range: tuple[int, int] = (2, 5)
    edge_prob: float = 0.5
    alpha: float = 40
    beta: float = 10
    gamma_vo: float = 2
    runs: int = 100
    cm: int = 10
    max_stages: int = 200
    stability_window: int = 50
    deltas: tuple[float, ...] = (0.0, 0.1, 0.2)
    seed: int = 0
    out: str | None = None
    random_start_runs: bool = True
    fixture_layout: bool = False
    attribution: str = "previous"

    def __post_init__(self):
        self.length_range = tuple(self.length_range)
        self.deltas = tuple(float(d) for d in self.deltas)
        self.pattern = TrafficPattern(self.pattern).value
        if min(self.instances, self.runs, self.n) < 1:
            raise ValueError("instance count, run count and n must be >= 1")
        if any(not 0.0 <= d <= 1.0 for d in self.deltas):
            raise ValueError("delta values must lie in [0, 1]")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["length_range"] = list(self.length_range)
        d["deltas"] = list(self.deltas)
        return d

    def multistage(self, initial_set) -> MultistageConfig:
        window = min(self.stability_window, max(self.max_stages, 1))
        return MultistageConfig(cm=self.cm, max_stages=self.max_stages,
                                stability_window=window, initial_set=initial_set,
                                attribution=self.attribution)


def generate_instance(config: ExperimentConfig, index: int, max_tries: int = 1000) -> GameInstance:
    """Random instance number ``index`` of a campaign; resamples on failure."""
    rng = substream(config.seed, _INSTANCE, index)
    for _ in range(max_tries):
        try:
            topo = random_topology(config.n, config.edge_prob, rng)
            flows = generate_traffic(topo, config.pattern, rng, config.length_range,
                                     fixture_layout=config.fixture_layout)
            return GameInstance(topo, flows, RankParams(config.alpha, config.beta),
                                CostParams(config.gamma_vo))
        except (RouteError, InstanceError):
            continue
    raise TopologyError(f"could not generate instance {index} in {max_tries} tries")


@dataclass
class InstanceResult:
    row: dict
    runs: list[dict]
    attackers_series: np.ndarray
    dissatisfied_series: np.ndarray


def _series(trace, length: int, attr: str) -> np.ndarray:
    vals = [getattr(r, attr) for r in trace.records]
    # quasi-equilibria are absorbing, so the last value persists
    vals += [vals[-1]] * (length - len(vals))
    return np.array(vals[:length], dtype=float)


def run_instance(config: ExperimentConfig, index: int) -> InstanceResult:
    inst = generate_instance(config, index)
    n = inst.n
    violations, strict = profile_stats(inst)
    n_profiles = len(violations)
    row = {"instance": index}
    for d in config.deltas:
        row[f"ne_pct_{d:g}"] = 100.0 * float(np.mean(violations <= delta_threshold(d, n)))
    row["weak_ne"] = int(np.sum((violations == 0) & ~strict))
    row["strict_ne"] = int(np.sum(strict))
    row["empty_ne"] = bool(violations[0] == 0)
    row["full_ne"] = bool(violations[n_profiles - 1] == 0)

    length = config.max_stages + 1
    att = np.zeros(length)
    dis = np.zeros(length)
    runs = []
    conv = mixed = 0
    anom_att, anom_neu, anom_n = 0, 0, 0
    cfg = config.multistage("empty")
    for r in range(config.runs):
        tr = run(inst, cfg, substream(config.seed, _RUN_EMPTY, index, r))
        att += _series(tr, length, "n_attackers")
        dis += _series(tr, length, "dissatisfied")
        a_inf = tr.final
        is_mixed = tr.converged and a_inf not in (0, full_set(n))
        conv += tr.converged
        mixed += is_mixed
        a_t, a_n = anomalous_nodes(inst, a_inf) if tr.converged else (0, 0)
        if tr.converged:
            anom_att += a_t
            anom_neu += a_n
            anom_n += 1
        runs.append({"instance": index, "run": r, "start": "empty", "initial": format_labels(tr.initial),
                     "final": format_labels(a_inf), "converged": tr.converged, "stages": tr.records[-1].k,
                     "violations": int(violations[a_inf]), "strict_ne": bool(strict[a_inf]),
                     "initial_beneficiary_pct": 100.0 * beneficiary_share(inst, tr.initial),
                     "final_beneficiary_pct": 100.0 * beneficiary_share(inst, a_inf),
                     "anomalous_attackers": a_t, "anomalous_neutrals": a_n})
    row["converged_pct"] = 100.0 * conv / config.runs
    row["mixed_qe_pct"] = 100.0 * mixed / config.runs
    row["anomalous_attacker_pct"] = 100.0 * anom_att / (anom_n * n) if anom_n else 0.0
    row["anomalous_neutral_pct"] = 100.0 * anom_neu / (anom_n * n) if anom_n else 0.0

    if config.random_start_runs:
        cfg = config.multistage("random")
        finals, init_b, final_b, conv_flags = [], [], [], []
        for r in range(config.runs):
            tr = run(inst, cfg, substream(config.seed, _RUN_RANDOM, index, r))
            finals.append(tr.final)
            conv_flags.append(tr.converged)
            init_b.append(100.0 * beneficiary_share(inst, tr.initial))
            final_b.append(100.0 * beneficiary_share(inst, tr.final))
            runs.append({"instance": index, "run": r, "start": "random", "initial": format_labels(tr.initial),
                         "final": format_labels(tr.final), "converged": tr.converged,
                         "stages": tr.records[-1].k, "violations": int(violations[tr.final]),
                         "strict_ne": bool(strict[tr.final]),
                         "initial_beneficiary_pct": init_b[-1], "final_beneficiary_pct": final_b[-1],
                         "anomalous_attackers": "", "anomalous_neutrals": ""})
        for d in config.deltas:
            row[f"ne_hits_{d:g}"] = ne_hits(inst, finals, d)
            row[f"ne_hits_qe_{d:g}"] = ne_hits(inst, [a if c else None for a, c in zip(finals, conv_flags)], d)
        row["initial_beneficiary_pct"] = float(mean(init_b))
        row["final_beneficiary_pct"] = float(mean(final_b))
    return InstanceResult(row, runs, att / config.runs, dis / config.runs)


@dataclass
class CampaignReport:
    config: ExperimentConfig
    rows: list[dict]
    runs: list[dict]
    evolution: list[dict]
    aggregate: dict = field(default_factory=dict)

    @property
    def provenance(self) -> dict:
        cfg = self.config.to_dict()
        cfg.pop("out")  # where files went does not affect results
        return {"config": cfg, "seed": self.config.seed, "version": __version__}

    def to_json(self) -> dict:
        return {"provenance": self.provenance, "aggregate": self.aggregate}


def aggregate(rows: list[dict], deltas) -> dict:
    agg = {"instances": len(rows)}
    keys = [k for k in rows[0] if k != "instance" and isinstance(rows[0][k], (int, float))
            and not isinstance(rows[0][k], bool)]
    for k in keys:
        vals = [r[k] for r in rows]
        agg[f"mean_{k}"] = mean(vals)
        agg[f"median_{k}"] = median(vals)
    total_weak = sum(r["weak_ne"] for r in rows)
    total_strict = sum(r["strict_ne"] for r in rows)
    agg["weak_share_of_ne"] = total_weak / (total_weak + total_strict) if total_weak + total_strict else None
    if "ne_hits_0" in rows[0]:
        for d in deltas:
            above = [r[f"ne_hits_{d:g}"] > r[f"ne_pct_{d:g}"] for r in rows]
            agg[f"ne_seeking_pct_{d:g}"] = 100.0 * float(np.mean(above))
        agg["effective_pct"] = 100.0 * float(np.mean([r["final_beneficiary_pct"] > r["initial_beneficiary_pct"]
                                                      for r in rows]))
    return agg


def run_campaign(config: ExperimentConfig) -> CampaignReport:
    rows, runs = [], []
    att = dis = None
    for k in range(config.instances):
        res = run_instance(config, k)
        rows.append(res.row)
        runs.extend(res.runs)
        att = res.attackers_series if att is None else att + res.attackers_series
        dis = res.dissatisfied_series if dis is None else dis + res.dissatisfied_series
        log.info("instance %d/%d done", k + 1, config.instances)
    att /= config.instances
    dis /= config.instances
    evolution = [{"k": k, "mean_attackers": float(a), "mean_dissatisfied": float(d)}
                 for k, (a, d) in enumerate(zip(att, dis))]
    report = CampaignReport(config, rows, runs, evolution, aggregate(rows, config.deltas))
    if config.out:
        write_report(report, config.out)
    return report


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def scatter_rows(rows: list[dict], deltas) -> list[dict]:
    """Per-instance (x, y) points: x is the accidental rate, y the achieved one."""
    out = []
    if not rows or "ne_hits_0" not in rows[0]:
        return out
    for r in rows:
        for d in deltas:
            out.append({"instance": r["instance"], "metric": f"ne_hits_delta_{d:g}",
                        "x": r[f"ne_pct_{d:g}"], "y": r[f"ne_hits_{d:g}"]})
        out.append({"instance": r["instance"], "metric": "effectiveness",
                    "x": r["initial_beneficiary_pct"], "y": r["final_beneficiary_pct"]})
    return out


def write_report(report: CampaignReport, out) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "instances.csv").write_text(_csv(report.rows))
    (out / "scatter.csv").write_text(_csv(scatter_rows(report.rows, report.config.deltas)))
    (out / "runs.csv").write_text(_csv(report.runs))
    (out / "evolution.csv").write_text(_csv(report.evolution))
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=1, sort_keys=True) + "\n")


# --- fixture reproduction -----------------------------------------------------

@dataclass
class Cell:
    key: str
    expected: object
    computed: object

    @property
    def match(self) -> bool:
        return self.expected == self.computed


@dataclass
class FixtureReport:
    table: str
    cells: list[Cell]

    @property
    def ok(self) -> bool:
        return all(c.match for c in self.cells)

    @property
    def mismatches(self) -> list[Cell]:
        return [c for c in self.cells if not c.match]

    def summary(self) -> str:
        return f"Table {self.table}: {len(self.cells) - len(self.mismatches)}/{len(self.cells)} cells match"


def tra_table(instance: GameInstance, attackers: int) -> dict[int, str]:
    return {f.id: format_events(tra_events(f, attackers)) for f in instance.flows}


def cost_table(instance: GameInstance, attackers: int) -> list[tuple[int, str]]:
    states = classify_nodes(instance, attackers)
    return [(cost_change_percent(instance.cost_exact(attackers, i)), states[i].value)
            for i in range(instance.n)]


def reproduce_fixture(table: str) -> FixtureReport:
    table = table.upper()
    if table in ("I", "II"):
        name = "flow-sparse" if table == "I" else "flow-dense"
        expected = TABLE_I_TRA if table == "I" else TABLE_II_TRA
        inst = load_fixture(name)
        got = tra_table(inst, profile_for("A"))
        cells = [Cell(f"flow {fid}", expected[fid], got[fid]) for fid in sorted(expected)]
        return FixtureReport(table, cells)
    if table == "III":
        cells = []
        for (pattern, tag), rows in TABLE_III.items():
            inst = load_fixture(pattern)
            got = cost_table(inst, profile_for(tag, inst.n))
            label = "{1,3,8,9}" if tag == "A" else "N"
            for i, (exp, comp) in enumerate(zip(rows, got)):
                cells.append(Cell(f"{pattern} A={label} node {i + 1}", exp, comp))
        return FixtureReport(table, cells)
    raise ValueError(f"unknown table {table!r}; choose I, II or III")
