"""Interval-start SoC C_1(nT), the two forced-action thresholds and the (dis)charge actions P_b,1(t).

Uses the +-5 kWh (dis)charge bounds. Each interval is labelled force-charge,
force-discharge or interior, and forced intervals are checked against the
action actually taken.
"""
import argparse
from pathlib import Path

import numpy as np

from tsoc.controller import classify_soc
from tsoc.scenarios import large_battery_moves
from tsoc.sim import run_policy, seed_path, write_columns


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--intervals", type=int, default=10)
    ap.add_argument("--eta", type=float, default=0.95)
    ap.add_argument("--c0", type=float, default=None, help="initial SoC (default: mid-range)")
    ap.add_argument("--out", default="out/battery_schedule")
    args = ap.parse_args()
    cfg = large_battery_moves(eta=args.eta)
    cfg = cfg.with_(c0=0.5 * (cfg.c_min + cfg.c_max) if args.c0 is None else args.c0)
    recs, info = run_policy("tsoc", seed_path(cfg, args.seed, args.intervals), cfg, args.seed)
    V, G = info["V"], info["Gamma"]
    lo, hi = -V * cfg.alpha_bar - G, -V * cfg.beta_under - G
    C_start = np.array([recs[n * cfg.T].C[0] for n in range(args.intervals)])
    cls = [classify_soc(np.array([c]), V, G, cfg.alpha_bar, cfg.beta_under)[0].value for c in C_start]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_columns({"t": np.arange(len(recs)), "n": np.array([r.n for r in recs]),
                   "C1_interval_start": np.repeat(C_start, cfg.T), "P_b1": np.array([r.P_b[0] for r in recs]),
                   "threshold_charge": np.full(len(recs), lo), "threshold_discharge": np.full(len(recs), hi)},
                  out / "battery_schedule.csv")
    print(f"Gamma={G:.3f} V={V:.3f}: force-charge below {lo:.2f}, force-discharge above {hi:.2f}")
    for n, (c, k) in enumerate(zip(C_start, cls)):
        pb = [recs[n * cfg.T + s].P_b[0] for s in range(cfg.T)]
        print(f"n={n}: C1={c:7.2f} {k:>15}  P_b1 = " + " ".join(f"{p:+.2f}" for p in pb))


if __name__ == "__main__":
    main()
