"""TS-OC average cost versus battery capacity for eta in {0.9, 0.95, 1} on matched paths."""
import argparse
from pathlib import Path

import numpy as np

from tsoc.scenarios import efficiency
from tsoc.sim import cost_series, mean_ci, run_policy, seed_path, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cmax", nargs="+", type=float, default=(40.0, 60.0, 80.0, 100.0, 120.0, 140.0))
    ap.add_argument("--eta", nargs="+", type=float, default=(0.9, 0.95, 1.0))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--slots", type=int, default=500)
    ap.add_argument("--out", default="out/cost_vs_capacity")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for cm in args.cmax:
        for eta in args.eta:
            cfg = efficiency(eta, c_max=cm)
            vals = []
            for seed in range(args.seeds):
                path = seed_path(cfg, seed, args.slots // cfg.T)
                recs, info = run_policy("tsoc", path, cfg, seed)
                vals.append(cost_series(recs).mean())
            m, lo, hi = mean_ci(vals)
            rows.append(dict(C_max=cm, eta=eta, mean=m, ci_low=lo, ci_high=hi, Gamma=info["Gamma"], V=info["V"]))
            print(f"C_max={cm:g} eta={eta:g}: {m:.3f} [{lo:.3f}, {hi:.3f}]", flush=True)
    write_table(rows, out / "cost_vs_capacity.csv")
    for cm in args.cmax:
        base = next(r["mean"] for r in rows if r["C_max"] == cm and r["eta"] == 1.0) if 1.0 in args.eta else np.nan
        ex = ", ".join(f"eta={r['eta']:g}: {100 * (r['mean'] / base - 1):+.1f}%" for r in rows
                       if r["C_max"] == cm and r["eta"] != 1.0)
        print(f"C_max={cm:g} excess over eta=1: {ex}")


if __name__ == "__main__":
    main()
