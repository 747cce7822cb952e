"""Ahead-of-time plan E_1[n] beside the ahead-of-time purchase price and the RES amount."""
import argparse
from pathlib import Path

import numpy as np

from tsoc.scenarios import cost_comparison
from tsoc.sim import run_policy, seed_path, write_columns


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--slots", type=int, default=100)
    ap.add_argument("--plan-iters", type=int, default=200)
    ap.add_argument("--out", default="out/energy_plan")
    args = ap.parse_args()
    cfg = cost_comparison(plan_iters=args.plan_iters)
    recs, _ = run_policy("tsoc", seed_path(cfg, args.seed, args.slots // cfg.T), cfg, args.seed)
    first = recs[::cfg.T]
    E = np.array([r.E_share[0] * cfg.T for r in first])
    price = np.array([r.alpha_lt for r in first])
    A = np.array([r.A[0] for r in first])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_columns({"n": np.arange(len(first)), "E1": E, "alpha_lt": price, "A1": A}, out / "energy_plan.csv")
    r = np.corrcoef(price, E - A)[0, 1]
    print(f"correlation of the net ahead purchase E1 - A1 with alpha_lt: {r:+.3f}")
    for n in range(len(first)):
        print(f"n={n:2d}: alpha_lt={price[n]:.3f}  E1={E[n]:7.2f}  A1={A[n]:6.2f}")


if __name__ == "__main__":
    main()
