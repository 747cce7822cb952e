import numpy as np
import pytest

from tsoc.config import BoundsError, ConfigError, reference_config
from tsoc.controller import (EmptyWindowError, SocClass, TSOCController, case_chain, classify_soc, parameter_window,
                             select_parameters)
from tsoc.gap import gap_constants, min_gap
from tsoc.model import cost_lt, cost_rt, sample_path

from conftest import small_cfg


def quick(**kw):
    base = dict(plan_iters=20)
    base.update(kw)
    return small_cfg(**base)


# --- window ---------------------------------------------------------------------

def test_window_example_eta_one():
    w = parameter_window(reference_config(eta=1.0), alpha_bar=4.6, beta_under=0.3, V=1.0)
    assert w.Gamma_min == pytest.approx(-70.3, abs=1e-12)
    assert w.Gamma_max == pytest.approx(-14.6, abs=1e-12)
    assert w.V_max == pytest.approx(60.0 / 4.3, rel=1e-12)
    assert w.V_max == pytest.approx(13.95, abs=5e-3)


@pytest.mark.parametrize("eta", [0.9, 0.95, 1.0])
def test_window_at_v_max_is_tight_for_the_binding_tau(eta):
    cfg = reference_config(eta=eta, c_max=120.0)
    ab, bu = cfg.alpha_bar, cfg.beta_under
    w = parameter_window(cfg, check=False)
    taus = np.arange(1, cfg.T + 1)
    et = eta ** taus
    g = taus.astype(float) if eta == 1 else (1 - et) / (1 - eta)
    a = (g * cfg.p_b_max - cfg.c_max) / et
    b = (g * cfg.p_b_min - cfg.c_min) / et
    span = (cfg.c_max - cfg.c_min - g * (cfg.p_b_max - cfg.p_b_min)) / (et * (ab - bu))
    k = int(np.argmin(span))
    # at V_max the binding tau's own lower and upper terms meet
    assert (b[k] - w.V_max * ab) - (a[k] - w.V_max * bu) >= -1e-9
    assert (b[k] - w.V_max * ab) - (a[k] - w.V_max * bu) == pytest.approx(0.0, abs=1e-9)
    # across all tau the window closes at V_eff <= V_max
    assert w.V_eff <= w.V_max * (1 + 1e-12)
    at = parameter_window(cfg, V=w.V_eff)
    assert at.Gamma_max - at.Gamma_min == pytest.approx(0.0, abs=1e-9)


def test_empty_window_is_typed():
    cfg = reference_config(eta=1.0)
    with pytest.raises(EmptyWindowError, match="V"):
        parameter_window(cfg, V=100.0)


def test_invalid_config_rejected_before_window():
    with pytest.raises(BoundsError):
        parameter_window(reference_config(c0=500.0))


# --- thresholds -------------------------------------------------------------------

def test_classify_examples():
    assert classify_soc(75.0, 1.0, -70.3, 4.6, 0.3) is SocClass.FORCE_DISCHARGE
    assert classify_soc(10.0, 1.0, -70.3, 4.6, 0.3) is SocClass.FORCE_CHARGE
    assert classify_soc(68.0, 1.0, -70.3, 4.6, 0.3) is SocClass.INTERIOR


def test_thresholds_themselves_are_interior():
    hi = -1.0 * 0.3 + 70.3
    lo = -1.0 * 4.6 + 70.3
    got = classify_soc(np.array([hi, lo]), 1.0, -70.3, 4.6, 0.3)
    assert all(c is SocClass.INTERIOR for c in got)
    nudged = classify_soc(np.array([np.nextafter(hi, np.inf), np.nextafter(lo, -np.inf)]), 1.0, -70.3, 4.6, 0.3)
    assert nudged[0] is SocClass.FORCE_DISCHARGE and nudged[1] is SocClass.FORCE_CHARGE


# --- parameter choice ----------------------------------------------------------------

def test_select_parameters_two_pass_eta_one():
    cfg = reference_config(eta=1.0, price_cap_rt=4.6)
    Gamma, V, w = select_parameters(cfg)
    base = parameter_window(cfg, check=False)
    assert V == pytest.approx(min(base.V_max, base.V_eff))
    again = parameter_window(cfg, V=V)
    assert Gamma == pytest.approx(again.midpoint)
    assert w.Gamma_min - 1e-9 <= Gamma <= w.Gamma_max + 1e-9


def test_override_inside_window_passes_through():
    cfg = reference_config(eta=1.0)
    w = parameter_window(cfg, V=1.0)
    G = w.Gamma_min + 0.25 * (w.Gamma_max - w.Gamma_min)
    assert select_parameters(cfg, V=1.0, Gamma=G)[:2] == (G, 1.0)


def test_override_outside_window_raises():
    cfg = reference_config(eta=1.0)
    w = parameter_window(cfg, V=1.0)
    with pytest.raises(EmptyWindowError):
        select_parameters(cfg, V=1.0, Gamma=w.Gamma_max + 1.0)
    with pytest.raises(EmptyWindowError):
        select_parameters(cfg, V=2 * w.V_max)


def test_gap_optimal_rule_uses_the_gap_minimiser():
    cfg = reference_config(eta=0.9, c_max=120.0, param_rule="gap-optimal")
    Gamma, V, w = select_parameters(cfg)
    opt = min_gap(parameter_window(cfg, check=False).V_max, cfg)
    assert V == pytest.approx(opt.V, rel=1e-12)
    assert w.Gamma_min - 1e-9 <= Gamma <= w.Gamma_max + 1e-9
    assert gap_constants(Gamma, V, cfg).gap == pytest.approx(opt.G_min, rel=1e-6)
    # the midpoint rule at V_max never beats it
    G_mid, V_mid, _ = select_parameters(cfg.with_(param_rule="midpoint"))
    assert gap_constants(G_mid, V_mid, cfg).gap >= opt.G_min * (1 - 1e-9)


# --- case chains ---------------------------------------------------------------------

def test_case_chain_classifies_and_checks_links():
    cfg = reference_config(eta=1.0)
    G, V = -40.0, 1.0
    lo, hi = -V * cfg.alpha_bar - G, -V * cfg.beta_under - G
    traj = np.array([lo - 3 + 2 * k for k in range(1, 6)])
    res = case_chain(lo - 3, traj, V, G, cfg, cfg.alpha_bar, cfg.beta_under)
    assert res["case"] == "c1" and all(res["links"].values())
    res = case_chain(hi + 1, [hi + 1 - 2], V, G, cfg, cfg.alpha_bar, cfg.beta_under)
    assert res["case"] == "c3"
    # a trajectory that overshoots the bound breaks a link
    bad = case_chain(lo - 3, [cfg.c_max + 5], V, G, cfg, cfg.alpha_bar, cfg.beta_under)
    assert not all(bad["links"].values())


# --- the interval loop ----------------------------------------------------------------

def test_queue_identity_and_cost_accounting():
    cfg = quick(eta=0.95)
    path = sample_path(np.random.default_rng(0), cfg, 6)
    ctl = TSOCController(cfg, rng=np.random.default_rng(1))
    recs = ctl.run(path)
    assert len(recs) == 6 * cfg.T
    total = 0.0
    for r, (iv, tau) in zip(recs, [(iv, k) for iv in path for k in range(cfg.T)]):
        assert np.all(np.abs(r.Q - r.C - ctl.Gamma) <= 1e-12 * max(1.0, abs(ctl.Gamma)))
        f = iv.fast[tau]
        E = r.E_share * cfg.T
        want = cost_lt(E, iv.slow.A, iv.slow.alpha_lt, iv.slow.beta_lt) / cfg.T + cost_rt(r.P, f.alpha_rt, f.beta_rt)
        assert np.allclose(r.Phi, want, rtol=0, atol=1e-9)
        total += float(np.sum(want))
    assert ctl.state.cumulative_cost == pytest.approx(total, abs=1e-9)
    # plan refreshed only at interval starts
    for n in range(6):
        shares = np.array([r.E_share for r in recs[n * cfg.T:(n + 1) * cfg.T]])
        assert np.all(shares == shares[0])


def test_soc_follows_the_battery_recursion():
    cfg = quick(eta=0.9, c_max=120.0)
    path = sample_path(np.random.default_rng(2), cfg, 4)
    recs = TSOCController(cfg, rng=np.random.default_rng(3)).run(path)
    for a, b in zip(recs, recs[1:]):
        assert np.allclose(b.C, cfg.eta * a.C + a.P_b, rtol=0, atol=1e-12)
    assert all(np.all((r.C >= cfg.c_min) & (r.C <= cfg.c_max)) for r in recs)


def test_battery_free_config_keeps_soc_constant():
    cfg = quick(eta=1.0, p_b_min=0.0, p_b_max=0.0)
    path = sample_path(np.random.default_rng(4), cfg, 3)
    with pytest.raises(ConfigError):
        TSOCController(cfg)  # no V to derive without a battery window
    recs = TSOCController(cfg, V=2.0, rng=np.random.default_rng(5)).run(path)
    assert all(np.array_equal(r.C, recs[0].C) for r in recs)
    assert all(np.all(r.P_b == 0) for r in recs)


def test_forced_discharge_uses_the_full_rate():
    # V=1 and Gamma at the window top put the discharge threshold at 14.3, below c0 = 40
    cfg = quick(eta=1.0, I=1, c0=40.0)
    w = parameter_window(cfg, V=1.0)
    ctl = TSOCController(cfg, Gamma=w.Gamma_max, V=1.0, rng=np.random.default_rng(6), diagnostics=True)
    assert classify_soc(cfg.c0, 1.0, w.Gamma_max, w.alpha_bar, w.beta_under) is SocClass.FORCE_DISCHARGE
    recs = ctl.run(sample_path(np.random.default_rng(7), cfg, 8))
    first = recs[:cfg.T]
    assert all(abs(r.P_b[0] - cfg.p_b_min) <= 1e-6 for r in first)
    for log in ctl.interval_log:
        block = recs[log.n * cfg.T:(log.n + 1) * cfg.T]
        for i, cls in enumerate(log.soc_class):
            if cls is SocClass.FORCE_DISCHARGE:
                assert all(abs(r.P_b[i] - cfg.p_b_min) <= 1e-6 for r in block)
            elif cls is SocClass.FORCE_CHARGE:
                assert all(abs(r.P_b[i] - cfg.p_b_max) <= 1e-6 for r in block)
    assert ctl.stats.forced_intervals >= 1 and ctl.stats.forced_failures == 0


def test_step_interval_checks_its_input():
    cfg = quick()
    ctl = TSOCController(cfg, rng=np.random.default_rng(0))
    iv = sample_path(np.random.default_rng(0), cfg, 1)[0]
    with pytest.raises(ValueError):
        ctl.step_interval(iv.slow, iv.fast[:-1])
    with pytest.raises(ValueError):
        TSOCController(cfg, plan_mode="oracle")


def test_seeded_runs_repeat_exactly():
    cfg = quick()
    path = sample_path(np.random.default_rng(8), cfg, 3)
    a = TSOCController(cfg, rng=np.random.default_rng(9)).run(path)
    b = TSOCController(cfg, rng=np.random.default_rng(9)).run(path)
    assert all(np.array_equal(x.Phi, y.Phi) and np.array_equal(x.P_b, y.P_b) for x, y in zip(a, b))
