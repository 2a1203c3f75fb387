"""``tra-game`` command line interface."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .attack_model import format_events, format_labels, parse_labels, tra_events
from .cost_model import CostParams, GameInstance, RankParams, cost_change_percent
from .experiments import ExperimentConfig, reproduce_fixture, run_campaign
from .fixtures import ALIASES, load_fixture
from .game import classify_nodes, enumerate_ne, ne_status, profile_stats
from .multistage import MultistageConfig, run, run_summary, substream
from .net_model import generate_traffic, random_topology


def _load(spec: str) -> GameInstance:
    if spec in ALIASES or spec in ("flow-sparse", "flow-dense"):
        return load_fixture(spec)
    return GameInstance.load(spec)


def _emit(rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(rows, indent=1) + "\n")
        return
    if not rows:
        return
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def _open_out(args, default_name: str | None = None):
    if args.out is None:
        return sys.stdout
    path = Path(args.out)
    if path.is_dir() and default_name:
        path = path / default_name
    return open(path, "w", newline="")


def cmd_gen(args) -> int:
    import numpy as np

    rng = np.random.default_rng(args.seed)
    topo = random_topology(args.n, args.edge_prob, rng)
    flows = generate_traffic(topo, args.pattern, rng, (args.min_len, args.max_len),
                             fixture_layout=args.fixture_layout)
    inst = GameInstance(topo, flows, RankParams(args.alpha, args.beta), CostParams(args.gamma_vo))
    text = json.dumps(inst.to_bundle(), indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_attacks(args) -> int:
    inst = _load(args.instance)
    a = parse_labels(args.attackers)
    rows = [{"flow": f.id, "route": f.route.labels(), "ac": str(f.ac),
             "tra": format_events(tra_events(f, a))} for f in inst.flows]
    _emit(rows, args.format, _open_out(args))
    return 0


def cmd_costs(args) -> int:
    inst = _load(args.instance)
    a = parse_labels(args.attackers)
    states = classify_nodes(inst, a)
    nodal = inst.nodalcosts(a)
    rows = [{"node": i + 1, "nodalcost": round(float(nodal[i]), 6),
             "cost": round(inst.cost(a, i), 6),
             "cost_change_pct": cost_change_percent(inst.cost_exact(a, i)),
             "state": states[i].value} for i in range(inst.n)]
    _emit(rows, args.format, _open_out(args))
    return 0


def cmd_ne_scan(args) -> int:
    inst = _load(args.instance)
    deltas = [float(d) for d in args.delta.split(",")]
    violations, strict = profile_stats(inst)
    total = len(violations)
    rows = []
    for d in deltas:
        ne = enumerate_ne(inst, d)
        rows.append({"delta": d, "count": len(ne), "proportion": len(ne) / total,
                     "strict": int(strict.sum()) if d == 0 else "",
                     "empty_status": ne_status(inst, 0).value,
                     "full_status": ne_status(inst, total - 1).value,
                     "profiles": " ".join(format_labels(a) for a in ne)})
    _emit(rows, args.format, _open_out(args))
    return 0


def cmd_evolve(args) -> int:
    inst = _load(args.instance)
    a0 = args.a0
    if a0 not in ("empty", "full", "random"):
        a0 = parse_labels(a0)
    cfg = MultistageConfig(cm=args.cm, max_stages=args.stages,
                           stability_window=min(args.window, max(args.stages, 1)),
                           initial_set=a0)
    stage_rows, summary = [], []
    for r in range(args.runs):
        tr = run(inst, cfg, substream(args.seed, r))
        for rec in tr.records:
            stage_rows.append({"run": r, "k": rec.k, "attackers": rec.n_attackers,
                               "dissatisfied": rec.dissatisfied})
        s = run_summary(inst, tr)
        v = s["violations"]
        summary.append({"run": r, "a_inf": format_labels(s["final"]), "converged": s["converged"],
                        "stages": s["stages"], "ne_status": s["ne_status"],
                        "ne_0": v <= 0, "ne_0.1": v <= int(0.1 * inst.n + 1e-9),
                        "ne_0.2": v <= int(0.2 * inst.n + 1e-9),
                        "initial_beneficiary_pct": s["initial_beneficiary"],
                        "beneficiary_pct": s["final_beneficiary"]})
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "stages.csv", "w", newline="") as fh:
            _emit(stage_rows, "csv", fh)
        with open(out / "summary.csv", "w", newline="") as fh:
            _emit(summary, "csv", fh)
    else:
        _emit(summary, args.format, sys.stdout)
    return 0


def cmd_campaign(args) -> int:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    report = run_campaign(cfg)
    sys.stdout.write(json.dumps(report.to_json(), indent=1, sort_keys=True) + "\n")
    return 0


def cmd_fixtures(args) -> int:
    tables = [args.table] if args.table else ["I", "II", "III"]
    ok = True
    for t in tables:
        rep = reproduce_fixture(t)
        print(rep.summary())
        for c in rep.mismatches:
            print(f"  {c.key}: expected {c.expected!r}, computed {c.computed!r}")
        ok &= rep.ok
    return 0 if ok or not args.check else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tra-game", description=__doc__)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output file or directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance bundle")
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--pattern", choices=("flow-sparse", "flow-dense"), default="flow-sparse")
    g.add_argument("--edge-prob", type=float, default=0.5)
    g.add_argument("--min-len", type=int, default=2)
    g.add_argument("--max-len", type=int, default=5)
    g.add_argument("--alpha", type=float, default=40)
    g.add_argument("--beta", type=float, default=10)
    g.add_argument("--gamma-vo", type=float, default=2)
    g.add_argument("--fixture-layout", action="store_true",
                   help="flow-sparse: odd-labelled nodes source the VO flows")
    g.set_defaults(func=cmd_gen)

    for name, func, helptext in (("attacks", cmd_attacks, "TRA annotations per flow"),
                                 ("costs", cmd_costs, "per-node costs and states")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--instance", required=True, help="bundle JSON or flow-sparse/flow-dense")
        s.add_argument("--attackers", default="", help="1-based labels, e.g. 1,3,8,9")
        s.set_defaults(func=func)

    s = sub.add_parser("ne-scan", help="exhaustive (delta-)NE enumeration")
    s.add_argument("--instance", required=True)
    s.add_argument("--delta", default="0,0.1,0.2")
    s.set_defaults(func=cmd_ne_scan)

    s = sub.add_parser("evolve", help="multistage runs on one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--cm", type=int, default=10)
    s.add_argument("--stages", type=int, default=200)
    s.add_argument("--window", type=int, default=50)
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--a0", default="empty", help="empty, full, random or a label list")
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("campaign", help="Monte Carlo campaign over random instances")
    s.add_argument("--config", default=None, help="JSON file with ExperimentConfig fields")
    s.set_defaults(func=cmd_campaign)

    s = sub.add_parser("fixtures", help="reproduce the example tables")
    s.add_argument("--check", action="store_true", help="exit nonzero on any mismatch")
    s.add_argument("--table", choices=("I", "II", "III"), default=None)
    s.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "evolve" and args.seed is None:
        args.seed = 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
