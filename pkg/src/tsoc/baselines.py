"""Comparison policies: one-scale online, two-scale without RES/storage, clairvoyant offline."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import ConfigError, SystemConfig, validate_config
from .controller import TSOCController, select_parameters
from .planner import lt_epigraph_rows
from .model import Interval, battery_step, cost_lt, cost_rt, sinr_all
from .records import SlotRecord
from .socp import ConeAssembler, Layout, SolveReport, add_slot_block, solve_conic


class HorizonError(ConfigError):
    pass


def _series(records) -> np.ndarray:
    return np.array([r.total_cost for r in records])


def run_tsoc(path: list[Interval], cfg: SystemConfig, rng=None, **kw):
    ctl = TSOCController(cfg, rng=rng, **kw)
    recs = ctl.run(path)
    return recs, ctl


def run_alg1(path: list[Interval], cfg: SystemConfig, rng=None, battery: bool = True, res_use: str = "sell", **kw):
    """No ahead-of-time planning; the real-time rule is unchanged.

    ``res_use="sell"`` sets E = 0, so all RES is sold ahead; ``"local"`` sets
    E = A, so RES is consumed on site with no ahead-of-time trade. With
    ``battery=False`` the (dis)charge box collapses to zero.
    """
    if res_use not in ("sell", "local"):
        raise ValueError(f"unknown res_use {res_use!r}")
    Gamma, V, _ = select_parameters(cfg)
    c = cfg if battery else cfg.with_(p_b_min=0.0, p_b_max=0.0)
    mode = "zero" if res_use == "sell" else "res"
    ctl = TSOCController(c, Gamma=Gamma, V=V, rng=rng, plan_mode=mode, **kw)
    recs = ctl.run(path)
    return recs, ctl


def run_alg2(path: list[Interval], cfg: SystemConfig, rng=None, **kw):
    """Two-scale planning and real-time control with A = 0 and no battery.

    V is the one TS-OC would use so that planner steps are comparable.
    """
    _, V, _ = select_parameters(cfg)
    c = cfg.with_(p_b_min=0.0, p_b_max=0.0)
    ctl = TSOCController(c, Gamma=0.0, V=V, rng=rng, ignore_res=True, **kw)
    recs = ctl.run(path)
    return recs, ctl


# --- clairvoyant benchmark ----------------------------------------------------

@dataclass
class OfflineResult:
    cost: float  # total over the horizon
    records: list
    E: np.ndarray  # (N, I)
    C: np.ndarray  # (NT + 1, I)
    report: SolveReport

    @property
    def average(self) -> float:
        return self.cost / len(self.records)


def solve_offline(path: list[Interval], cfg: SystemConfig, max_slots: Optional[int] = None) -> OfflineResult:
    """Jointly optimal decisions with the whole path known in advance.

    One stacked cone program: per interval 0 <= E_n <= E_cap and an epigraph u_n of the
    ahead-of-time cost; per slot a slot block (V = 1, no queue term) plus the
    next SoC, tied by C(t+1) = eta C(t) + P_b(t) and C_min <= C <= C_max.
    """
    validate_config(cfg, require_battery=False)
    cap = cfg.offline_max_slots if max_slots is None else max_slots
    T, I = cfg.T, cfg.I
    NT = len(path) * T
    if NT == 0:
        raise HorizonError("empty path")
    if NT > cap:
        raise HorizonError(f"offline horizon {NT} slots exceeds the cap of {cap}")
    lay = Layout(I, cfg.K, cfg.M)
    n_int = 2 * I
    n_slot = lay.size + I  # slot block then C(t+1)
    N = len(path)
    n = N * n_int + NT * n_slot
    asm = ConeAssembler(n)
    q = np.zeros(n)
    ar = np.arange(I)

    def e_cols(k):
        return k * n_int + ar

    def u_cols(k):
        return k * n_int + I + ar

    def slot0(t):
        return N * n_int + t * n_slot

    for k, iv in enumerate(path):
        s = iv.slow
        e, u = e_cols(k), u_cols(k)
        asm.add("nonneg", *lt_epigraph_rows(e, u, s, cfg))
        q[u] = 1.0
        for tau, fast in enumerate(iv.fast):
            t = k * T + tau
            c0 = slot0(t)
            add_slot_block(asm, c0, lay, fast, cfg, e_cols=e, e_scale=1.0 / T)
            q[c0 + lay.s:c0 + lay.s + I] = 1.0
            c_next = c0 + lay.size + ar
            pb = c0 + lay.pb + ar
            # C(t+1) - eta C(t) - P_b(t) = 0
            if t == 0:
                asm.add("zero", np.concatenate([ar, ar]), np.concatenate([c_next, pb]),
                        np.concatenate([np.ones(I), -np.ones(I)]), np.full(I, cfg.eta * cfg.c0))
            else:
                c_prev = slot0(t - 1) + lay.size + ar
                asm.add("zero", np.concatenate([ar, ar, ar]), np.concatenate([c_next, c_prev, pb]),
                        np.concatenate([np.ones(I), np.full(I, -cfg.eta), -np.ones(I)]), np.zeros(I))
            asm.add("nonneg", np.concatenate([ar, I + ar]), np.concatenate([c_next, c_next]),
                    np.concatenate([-np.ones(I), np.ones(I)]), np.concatenate([np.full(I, -cfg.c_min),
                                                                               np.full(I, cfg.c_max)]))
    A, b, cones = asm.build()
    sol = solve_conic(A, b, q, cones)
    x = sol.x
    E = np.array([np.clip(x[e_cols(k)], 0.0, cfg.E_cap) for k in range(N)])
    records = []
    C = np.full(I, float(cfg.c0))
    C_traj = [C.copy()]
    total = 0.0
    for k, iv in enumerate(path):
        s = iv.slow
        lt = cost_lt(E[k], s.A, s.alpha_lt, s.beta_lt) / T
        for tau, fast in enumerate(iv.fast):
            t = k * T + tau
            c0 = slot0(t)
            W = lay.unpack_w(x, c0)
            p_tx = np.abs(W) ** 2
            p_tx = p_tx.reshape(I, cfg.M, -1).sum(axis=(1, 2))
            P_b = np.clip(x[c0 + lay.pb:c0 + lay.pb + I], cfg.p_b_min, cfg.p_b_max)
            P = cfg.p_c + p_tx + P_b - E[k] / T
            phi = lt + cost_rt(P, fast.alpha_rt, fast.beta_rt)
            records.append(SlotRecord(
                t=t, n=k, E_share=E[k] / T, P=P, P_b=P_b, C=C.copy(), Q=np.full(I, np.nan), Phi=phi, A=s.A.copy(),
                alpha_lt=s.alpha_lt, beta_lt=s.beta_lt, alpha_rt=fast.alpha_rt, beta_rt=fast.beta_rt,
                sinr=sinr_all(fast.H, W, cfg.sigma2_vec), iterations=sol.report.iterations))
            total += float(np.sum(phi))
            C = battery_step(C, P_b, cfg.eta)
            C_traj.append(C.copy())
    return OfflineResult(cost=total, records=records, E=E, C=np.array(C_traj), report=sol.report)
