"""Command-line entry point: ``tsoc run | gap-curve | validate-config | oracle``.

Exit codes: 0 success, 1 an oracle check failed, 2 configuration error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, SystemConfig, load_config, validate_config
from .gap import curve_minimizer, gap_vs_capacity_curve
from .scenarios import SCENARIOS
from .sim import POLICIES, ExperimentSpec, resolved_parameters, run_experiment, write_table
from .socp import SolverError

EXIT_OK, EXIT_ORACLE, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def parse_seeds(text: str) -> list[int]:
    """'7' -> [7]; '3..5' -> [3, 4, 5]; '5..4' or '' -> []; '1,4,9' -> [1, 4, 9]."""
    text = text.strip()
    if not text:
        return []
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",")]


def parse_range(text: str) -> list[float]:
    """'20:150:5' (inclusive stop) or a comma list."""
    if ":" in text:
        a, b, c = (float(v) for v in text.split(":"))
        n = int(round((b - a) / c)) + 1
        return [a + i * c for i in range(n)]
    return [float(v) for v in text.split(",")]


def _config(args) -> SystemConfig:
    base = SCENARIOS[args.scenario]() if getattr(args, "scenario", None) else SystemConfig()
    return load_config(args.config, base) if args.config else base


def cmd_validate(args) -> int:
    cfg = _config(args)
    validate_config(cfg)
    print(json.dumps({"valid": True, "derived": resolved_parameters(cfg)}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    if args.seeds is not None:
        seeds = parse_seeds(args.seeds)
    else:
        seeds = [args.seed if args.seed is not None else cfg.rng_seed]
    policies = list(POLICIES) if args.policy == "all" else [args.policy]
    out = Path(args.out) if args.out else None
    failed = False
    for pol in policies:
        if not seeds:
            print(json.dumps({"policy": pol, "n_seeds": 0}))
            continue
        spec = ExperimentSpec(name=args.name, cfg=cfg, policy=pol, n_slots=args.slots, seeds=seeds,
                              out_dir=out, workers=args.workers)
        summary = run_experiment(spec)
        failed |= summary["n_ok"] < summary["n_seeds"]
        brief = {k: summary.get(k) for k in ("policy", "n_seeds", "n_ok", "mean_cost", "ci_low", "ci_high")}
        print(json.dumps(brief))
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_gap_curve(args) -> int:
    cfg = _config(args)
    C_list = parse_range(args.cmax)
    etas = parse_range(args.eta)
    rows = gap_vs_capacity_curve(cfg, C_list, etas, n_grid=args.grid)
    table = [dict(eta=r.eta, C_max=r.C_max, V_max=r.V_max, G_min=r.G_min, V=r.V, Gamma=r.Gamma,
                  ok=int(r.ok), reason=r.reason) for r in rows]
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_table(table, Path(args.out) / "gap_curve.csv")
    for eta in etas:
        sub = [r for r in rows if r.eta == eta and r.ok]
        if sub:
            loc = curve_minimizer([r.C_max for r in sub], [r.G_min for r in sub])
            print(f"eta={eta:g}: minimum near C_max={loc:g} (G_min={min(r.G_min for r in sub):.6g})")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracles import run_all

    ok = True
    for name, passed, detail in run_all():
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return EXIT_OK if ok else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsoc", description="Two-scale online control simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON or YAML file, one key per config field")
        sp.add_argument("--scenario", choices=sorted(SCENARIOS),
                        help="named base configuration; --config keys override it")

    r = sub.add_parser("run", help="run a policy over seeded sample paths")
    common(r)
    r.add_argument("--policy", default="tsoc", choices=list(POLICIES) + ["all"])
    r.add_argument("--seed", type=int)
    r.add_argument("--seeds", help="N..M inclusive, or a comma list")
    r.add_argument("--slots", type=int, default=500)
    r.add_argument("--out", help="output directory")
    r.add_argument("--name", default="run")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gap-curve", help="minimum optimality gap versus battery capacity")
    common(g)
    g.add_argument("--cmax", default="20:150:5")
    g.add_argument("--eta", default="0.9,0.95,1")
    g.add_argument("--grid", type=int, default=60)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gap_curve)

    v = sub.add_parser("validate-config", help="check a config and print derived parameters")
    common(v)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="run the closed-form self-checks")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
