"""Marginal storage value -Q_1(t)/V against running-average real-time prices."""
import argparse
from pathlib import Path

import numpy as np

from tsoc.scenarios import cost_comparison
from tsoc.sim import queue_price_trace, run_policy, seed_path, write_columns


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", nargs="+", type=float, default=(0.9, 0.95, 1.0))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--slots", type=int, default=2000)
    ap.add_argument("--burn-in", type=int, default=500)
    ap.add_argument("--out", default="out/queue_price")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cols = {}
    for eta in args.eta:
        cfg = cost_comparison(eta=eta)
        recs, info = run_policy("tsoc", seed_path(cfg, args.seed, args.slots // cfg.T), cfg, args.seed)
        tr = queue_price_trace(recs, info["V"])
        cols.setdefault("t", tr["t"])
        cols.setdefault("avg_alpha_rt", tr["avg_alpha_rt"])
        cols.setdefault("avg_beta_rt", tr["avg_beta_rt"])
        cols[f"neg_q_over_v_eta{eta:g}"] = tr["neg_q_over_v"]
        tail = tr["neg_q_over_v"][args.burn_in:]
        print(f"eta={eta:g}: after burn-in -Q1/V in [{tail.min():.3f}, {tail.max():.3f}]; "
              f"average prices buy {tr['avg_alpha_rt'][-1]:.3f}, sell {tr['avg_beta_rt'][-1]:.3f}")
    write_columns(cols, out / "queue_price.csv")


if __name__ == "__main__":
    main()
