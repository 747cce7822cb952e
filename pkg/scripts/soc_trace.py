"""Battery SoC C_1(t) of TS-OC under eta in {0.9, 0.95, 1} on one matched path."""
import argparse
from pathlib import Path

import numpy as np

from tsoc.scenarios import cost_comparison
from tsoc.sim import run_policy, seed_path, write_columns


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", nargs="+", type=float, default=(0.9, 0.95, 1.0))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--slots", type=int, default=500)
    ap.add_argument("--out", default="out/soc_trace")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cols = {"t": np.arange(args.slots)}
    for eta in args.eta:
        cfg = cost_comparison(eta=eta)
        recs, info = run_policy("tsoc", seed_path(cfg, args.seed, args.slots // cfg.T), cfg, args.seed)
        cols[f"C1_eta{eta:g}"] = np.array([r.C[0] for r in recs])
        cols[f"Pb1_eta{eta:g}"] = np.array([r.P_b[0] for r in recs])
        c = cols[f"C1_eta{eta:g}"]
        print(f"eta={eta:g}: Gamma={info['Gamma']:.3f} V={info['V']:.3f} SoC range [{c.min():.2f}, {c.max():.2f}]"
              f" mean {c.mean():.2f}")
    write_columns(cols, out / "soc_trace.csv")


if __name__ == "__main__":
    main()
