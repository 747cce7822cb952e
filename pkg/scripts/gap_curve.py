"""Minimum optimality-gap bound versus battery capacity for several storage efficiencies."""
import argparse
from pathlib import Path

import numpy as np

from tsoc.config import reference_config
from tsoc.gap import curve_minimizer, gap_vs_capacity_curve
from tsoc.sim import write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cmax", nargs=3, type=float, default=(20.0, 150.0, 5.0), metavar=("START", "STOP", "STEP"))
    ap.add_argument("--eta", nargs="+", type=float, default=(0.9, 0.95, 1.0))
    ap.add_argument("--grid", type=int, default=60)
    ap.add_argument("--out", default="out/gap_curve")
    args = ap.parse_args()
    a, b, step = args.cmax
    C = np.arange(a, b + step / 2, step)
    rows = gap_vs_capacity_curve(reference_config(), C, args.eta, n_grid=args.grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table([dict(eta=r.eta, C_max=r.C_max, V_max=r.V_max, G_min=r.G_min, V=r.V, Gamma=r.Gamma,
                      ok=int(r.ok), reason=r.reason) for r in rows], out / "gap_curve.csv")
    for eta in args.eta:
        sub = [r for r in rows if r.eta == eta and r.ok]
        loc = curve_minimizer([r.C_max for r in sub], [r.G_min for r in sub])
        print(f"eta={eta:g}: {len(sub)} valid points, minimum near C_max={loc:g}")


if __name__ == "__main__":
    main()
