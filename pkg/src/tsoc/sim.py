"""Seeded Monte Carlo harness: run policies on matched paths, write CSVs and summaries.

Every seed owns two independent streams derived from it: one draws the sample
path (shared by all policies, so comparisons are matched) and one drives the
controller's own randomness (history sampling in the planner).
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .baselines import HorizonError, run_alg1, run_alg2, run_tsoc, solve_offline
from .config import SystemConfig, _jsonable, validate_config
from .controller import parameter_window, select_parameters
from .model import sample_path
from .records import SlotRecord
from .socp import SolverError

log = logging.getLogger(__name__)

POLICIES = ("tsoc", "alg1", "alg2", "offline")

_PATH_STREAM, _CTRL_STREAM = 0, 1


@dataclass
class ExperimentSpec:
    name: str
    cfg: SystemConfig
    policy: str = "tsoc"
    n_slots: int = 500
    seeds: Sequence[int] = (0,)
    out_dir: Optional[Path] = None
    policy_kw: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if self.n_slots < 1:
            raise HorizonError("n_slots must be positive")
        if self.n_slots % self.cfg.T:
            raise HorizonError(f"n_slots={self.n_slots} is not a multiple of T={self.cfg.T}")
        if self.policy == "offline" and self.n_slots > self.cfg.offline_max_slots:
            raise HorizonError(f"offline horizon {self.n_slots} exceeds the cap of {self.cfg.offline_max_slots}")
        self.seeds = [int(s) for s in self.seeds]
        if self.out_dir is not None:
            self.out_dir = Path(self.out_dir)

    @property
    def n_intervals(self) -> int:
        return self.n_slots // self.cfg.T


def path_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, _PATH_STREAM])


def controller_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, _CTRL_STREAM])


def seed_path(cfg: SystemConfig, seed: int, n_intervals: int):
    return sample_path(path_rng(seed), cfg, n_intervals)


def run_policy(policy: str, path, cfg: SystemConfig, seed: int, **kw):
    """Return (records, info) for one policy on one path."""
    rng = controller_rng(seed)
    if policy == "tsoc":
        recs, ctl = run_tsoc(path, cfg, rng=rng, **kw)
    elif policy == "alg1":
        recs, ctl = run_alg1(path, cfg, rng=rng, **kw)
    elif policy == "alg2":
        recs, ctl = run_alg2(path, cfg, rng=rng, **kw)
    elif policy == "offline":
        res = solve_offline(path, cfg, max_slots=kw.get("max_slots"))
        return res.records, {"solver_status": res.report.solver_status, "objective": res.cost}
    else:
        raise ValueError(f"unknown policy {policy!r}")
    s = ctl.stats
    info = {"Gamma": ctl.Gamma, "V": ctl.V, "soc_violations": s.soc_violations,
            "forced_intervals": s.forced_intervals, "forced_failures": s.forced_failures,
            "case_counts": dict(s.case_counts), "chain_failures": s.chain_failures,
            "max_sinr_shortfall": s.max_sinr_shortfall, "max_balance_residual": s.max_balance_residual}
    return recs, info


def running_average(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("running_average needs a nonempty series")
    return np.cumsum(x) / np.arange(1, x.size + 1)


def cost_series(records) -> np.ndarray:
    return np.array([r.total_cost for r in records])


def queue_price_trace(records, V: float, bs: int = 0) -> dict:
    """-Q_bs(t)/V beside the running averages of the real-time purchase and selling prices."""
    Q = np.array([r.Q[bs] for r in records], dtype=float)
    if np.isnan(Q).any():
        raise ValueError("records carry no queue (policy without a virtual queue)")
    return {"t": np.arange(1, len(records) + 1),
            "neg_q_over_v": -Q / V,
            "avg_alpha_rt": running_average([r.alpha_rt for r in records]),
            "avg_beta_rt": running_average([r.beta_rt for r in records])}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_records(records, path: Path, I: int, K: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SlotRecord.columns(I, K))
        for r in records:
            w.writerow([_fmt(v) for v in r.row()])


def write_table(rows: list[dict], path: Path) -> None:
    if not rows:
        Path(path).write_text("")
        return
    keys = list(dict.fromkeys(k for row in rows for k in row))
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, restval="", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (_fmt(v) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})


def write_columns(columns: dict, path: Path) -> None:
    """Equal-length named arrays -> CSV, one row per index."""
    names = list(columns)
    n = {len(columns[k]) for k in names}
    if len(n) > 1:
        raise ValueError(f"columns differ in length: {n}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*(columns[k] for k in names)):
            w.writerow([_fmt(v) for v in row])


def mean_ci(values, level: float = 0.95) -> tuple[float, float, float]:
    """Mean and two-sided Student-t interval; the interval collapses for n < 2."""
    x = np.asarray(values, dtype=float)
    m = float(np.mean(x))
    if x.size < 2:
        return m, m, m
    h = float(stats.t.ppf(0.5 + level / 2, x.size - 1) * np.std(x, ddof=1) / np.sqrt(x.size))
    return m, m - h, m + h


def resolved_parameters(cfg: SystemConfig) -> dict:
    """Derived quantities written next to every output for provenance."""
    out = {}
    if cfg.has_battery:
        try:
            G, V, w = select_parameters(cfg)
            base = parameter_window(cfg, check=False)
            out.update(Gamma=G, V=V, Gamma_min=w.Gamma_min, Gamma_max=w.Gamma_max, V_max=base.V_max,
                       V_eff=base.V_eff, alpha_bar=base.alpha_bar, beta_under=base.beta_under)
        except Exception as exc:  # provenance only
            out["parameter_error"] = str(exc)
    out["E_cap"] = cfg.E_cap
    return out


def _run_seed(spec: ExperimentSpec, seed: int) -> dict:
    cfg = spec.cfg
    path = seed_path(cfg, seed, spec.n_intervals)
    row = {"seed": seed, "policy": spec.policy, "n_slots": spec.n_slots}
    try:
        recs, info = run_policy(spec.policy, path, cfg, seed, **spec.policy_kw)
    except SolverError as exc:
        log.warning("seed %d aborted: %s", seed, exc)
        row.update(status="failed", reason=str(exc), mean_cost=float("nan"))
        return row
    costs = cost_series(recs)
    row.update(status="ok", reason="", mean_cost=float(np.mean(costs)), final_soc=float(np.mean(recs[-1].C)))
    row.update({k: v for k, v in info.items() if isinstance(v, (int, float))})
    if spec.out_dir is not None:
        write_records(recs, spec.out_dir / f"{spec.name}_{spec.policy}_seed{seed}.csv", cfg.I, cfg.K)
    return row


def run_experiment(spec: ExperimentSpec) -> dict:
    """Run every seed, write per-seed CSVs and summaries, return the aggregate summary."""
    validate_config(spec.cfg, require_battery=False)
    if spec.out_dir is not None:
        spec.out_dir.mkdir(parents=True, exist_ok=True)
    if spec.workers > 1 and len(spec.seeds) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            rows = list(ex.map(_run_seed, [spec] * len(spec.seeds), spec.seeds))
    else:
        rows = [_run_seed(spec, s) for s in spec.seeds]
    ok = [r["mean_cost"] for r in rows if r["status"] == "ok"]
    summary = {"name": spec.name, "policy": spec.policy, "n_slots": spec.n_slots, "n_seeds": len(spec.seeds),
               "n_ok": len(ok), "seeds": rows}
    if ok:
        m, lo, hi = mean_ci(ok)
        summary.update(mean_cost=m, ci_low=lo, ci_high=hi)
    if spec.out_dir is not None:
        _merge(spec, rows)
        write_table(rows, spec.out_dir / f"{spec.name}_{spec.policy}_seeds.csv")
        side = {"config": spec.cfg.to_dict(), "derived": resolved_parameters(spec.cfg),
                "spec": {"name": spec.name, "policy": spec.policy, "n_slots": spec.n_slots,
                         "seeds": list(spec.seeds), "policy_kw": spec.policy_kw},
                "summary": {k: v for k, v in summary.items() if k != "seeds"}}
        (spec.out_dir / f"{spec.name}_{spec.policy}.json").write_text(
            json.dumps(side, indent=2, sort_keys=True, default=_jsonable))
    return summary


def _merge(spec: ExperimentSpec, rows) -> None:
    """Concatenate per-seed CSVs into one file with a leading seed column."""
    merged = spec.out_dir / f"{spec.name}_{spec.policy}.csv"
    with open(merged, "w", newline="") as out:
        header_done = False
        for row in rows:
            if row["status"] != "ok":
                continue
            src = spec.out_dir / f"{spec.name}_{spec.policy}_seed{row['seed']}.csv"
            with open(src) as fh:
                lines = fh.read().splitlines()
            if not header_done:
                out.write("seed," + lines[0] + "\n")
                header_done = True
            for line in lines[1:]:
                out.write(f"{row['seed']},{line}\n")
