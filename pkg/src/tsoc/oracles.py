"""Quick self-checks against closed forms and independent recomputations.

Each check returns ``(name, passed, detail)``; ``run_all`` is what ``tsoc oracle`` prints.
"""
from __future__ import annotations

import numpy as np

from .config import reference_config
from .controller import SocClass, classify_soc, parameter_window
from .gap import gap_constants, min_gap
from .model import SlowState, sample_fast_state
from .planner import sampled_objective
from .records import phi_from_fields
from .sim import running_average
from .socp import RealtimeTemplate


def check_window() -> tuple:
    w = parameter_window(reference_config(eta=1.0), alpha_bar=4.6, beta_under=0.3, V=1.0)
    got = (w.Gamma_min, w.Gamma_max, w.V_max)
    ok = bool(np.allclose(got, (-70.3, -14.6, 60.0 / 4.3), atol=1e-9))
    return "parameter window at eta=1", ok, f"Gamma in [{got[0]:.4f}, {got[1]:.4f}], V_max={got[2]:.4f}"


def check_thresholds() -> tuple:
    dis = classify_soc(np.array([75.0]), 1.0, -70.3, 4.6, 0.3)[0]
    chg = classify_soc(np.array([10.0]), 1.0, -70.3, 4.6, 0.3)[0]
    ok = dis is SocClass.FORCE_DISCHARGE and chg is SocClass.FORCE_CHARGE
    return "forced-action thresholds", ok, f"C=75 -> {dis.value}, C=10 -> {chg.value}"


def check_gap_limit() -> tuple:
    cfg = reference_config(eta=1.0)
    M = gap_constants(-50.0, 1.0, cfg).M
    near = gap_constants(-50.0, 1.0, cfg.with_(eta=1 - 1e-8)).M
    ok = M == 20.0 and abs(near - M) <= 1e-4 * M
    return "gap constant at eta=1 and its limit", ok, f"M={M!r}, M(1-1e-8)={near:.8f}"


def check_gap_refine() -> tuple:
    cfg = reference_config(eta=0.95)
    w = parameter_window(cfg, check=False)
    opt = min_gap(w.V_max, cfg, n_grid=200)
    rel = (opt.grid_min - opt.G_min) / opt.G_min
    return "gap grid vs refined", bool(-1e-9 <= rel), f"refined {opt.G_min:.6g}, grid {opt.grid_min:.6g}"


def check_single_user(n: int = 20, seed: int = 0) -> tuple:
    """One BS, one user: the minimum transmit power is gamma*sigma^2/|h|^2."""
    cfg = reference_config(I=1, K=1, M=4, sigma2=0.1, gamma=1.0)
    rng = np.random.default_rng(seed)
    tmpl = RealtimeTemplate(cfg, V=1.0)
    worst = 0.0
    for _ in range(n):
        fast = sample_fast_state(rng, cfg)
        dec, _ = tmpl.solve(fast, np.zeros(1), np.zeros(1))
        ref = 1.0 * 0.1 / float(np.sum(np.abs(fast.H) ** 2))
        worst = max(worst, abs(dec.p_tx[0] - ref) / ref)
    return "single-user closed-form power", bool(worst <= 1e-6), f"max rel error {worst:.2e}"


def check_subgradient(seed: int = 0, pairs: int = 20) -> tuple:
    cfg = reference_config(I=2, K=2, M=2, sigma2=0.1)
    rng = np.random.default_rng(seed)
    tmpl = RealtimeTemplate(cfg, V=5.0)
    slow = SlowState(1.1, 0.99, np.array([20.0, 35.0]))
    fast = sample_fast_state(rng, cfg)
    Q = np.array([-40.0, -60.0])
    worst = np.inf
    for _ in range(pairs):
        x, y = rng.uniform(0, 150, 2), rng.uniform(0, 150, 2)
        fx, gx = sampled_objective(x, slow, fast, Q, cfg, 5.0, tmpl)
        fy, _ = sampled_objective(y, slow, fast, Q, cfg, 5.0, tmpl)
        worst = min(worst, (fy - fx - gx @ (y - x)) / max(1.0, abs(fy)))
    return "planner subgradient inequality", bool(worst >= -1e-6), f"min relative slack {worst:.3e}"


def check_running_average() -> tuple:
    got = running_average([2.0, 4.0])
    return "running average", bool(np.array_equal(got, [2.0, 3.0])), f"[2, 4] -> {got.tolist()}"


def check_phi() -> tuple:
    # hand value: E=30 vs A=20 buys 10 at 1.2 -> 12/5 per slot; P=3 at 2.0 -> 6
    phi = phi_from_fields(np.array([6.0]), np.array([3.0]), np.array([20.0]), 1.2, 1.0, 2.0, 0.6, 5)
    return "slot cost from record fields", bool(np.allclose(phi, 8.4, rtol=0, atol=1e-12)), f"{phi.tolist()}"


CHECKS = (check_window, check_thresholds, check_gap_limit, check_gap_refine, check_single_user,
          check_subgradient, check_running_average, check_phi)


def run_all() -> list[tuple]:
    out = []
    for fn in CHECKS:
        try:
            out.append(fn())
        except Exception as exc:  # report, do not abort the remaining checks
            out.append((fn.__name__, False, f"raised {type(exc).__name__}: {exc}"))
    return out
