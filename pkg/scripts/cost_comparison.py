"""Running-average cost of TS-OC, the two online baselines and the offline bound on matched paths.

Writes cost_curves.csv (seed-averaged running averages per slot) and
cost_summary.csv (per-policy mean, 95% interval and excess over TS-OC).
"""
import argparse
import time
from pathlib import Path

import numpy as np

from tsoc.scenarios import cost_comparison
from tsoc.sim import cost_series, mean_ci, run_policy, running_average, seed_path, write_columns, write_table

POLICIES = {
    "tsoc": ("tsoc", {}),
    "alg1": ("alg1", {}),
    "alg2": ("alg2", {}),
    "offline": ("offline", {}),
    "alg1_res_local": ("alg1", {"res_use": "local"}),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--slots", type=int, default=500)
    ap.add_argument("--plan-iters", type=int, default=None)
    ap.add_argument("--out", default="out/cost_comparison")
    args = ap.parse_args()
    kw = {} if args.plan_iters is None else {"plan_iters": args.plan_iters}
    cfg = cost_comparison(**kw)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    means = {k: [] for k in POLICIES}
    curves = {k: np.zeros(args.slots) for k in POLICIES}
    t0 = time.time()
    for seed in range(args.seeds):
        path = seed_path(cfg, seed, args.slots // cfg.T)
        for name, (pol, pkw) in POLICIES.items():
            recs, _ = run_policy(pol, path, cfg, seed, **pkw)
            c = cost_series(recs)
            means[name].append(c.mean())
            curves[name] += running_average(c) / args.seeds
        print(f"seed {seed}: " + ", ".join(f"{k}={v[-1]:.3f}" for k, v in means.items()), flush=True)

    write_columns({"t": np.arange(1, args.slots + 1), **curves}, out / "cost_curves.csv")
    ref = np.array(means["tsoc"])
    rows = []
    for name, vals in means.items():
        m, lo, hi = mean_ci(vals)
        rows.append(dict(policy=name, mean=m, ci_low=lo, ci_high=hi, excess_over_tsoc=m / ref.mean() - 1.0))
    write_table(rows, out / "cost_summary.csv")
    for r in rows:
        print(f"{r['policy']:>15}: {r['mean']:.3f} [{r['ci_low']:.3f}, {r['ci_high']:.3f}]  "
              f"excess {100 * r['excess_over_tsoc']:+.1f}%")
    print(f"{time.time() - t0:.0f} s")


if __name__ == "__main__":
    main()
