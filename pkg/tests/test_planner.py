import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsoc.model import FastState, SlowState, sample_fast_state
from tsoc.planner import (ColdStartError, HistoryBuffer, SubgradientSchedule, finite_support_objective, inner_solve,
                          plan, plan_exact_finite_support, sampled_objective, subgrad_lt, subgrad_psi)
from tsoc.socp import RealtimeTemplate

from conftest import small_cfg

V = 10.0
Q = np.array([-50.0])


def one_bs(**kw):
    return small_cfg(I=1, **kw)


def atoms(cfg, n, seed=0):
    rng = np.random.default_rng(seed)
    return [sample_fast_state(rng, cfg) for _ in range(n)]


# ahead prices above any real-time sell price (0.3 * 4.6), so buying ahead to resell never pays
SLOW = SlowState(1.5, 1.35, np.array([10.0]))


# --- subgradient formulas -----------------------------------------------------

def test_subgrad_lt_examples():
    assert subgrad_lt(10.0, 4.0, 1.2, 1.08) == 1.2
    assert subgrad_lt(3.0, 4.0, 1.2, 1.08) == 1.08
    assert subgrad_lt(4.0, 4.0, 1.2, 1.08) == 1.2


def test_subgrad_psi_examples():
    assert subgrad_psi(60.0, 10.0, 2.3, 0.69, 5) == pytest.approx(-0.138)
    assert subgrad_psi(40.0, 10.0, 2.3, 0.69, 5) == pytest.approx(-0.46)
    assert subgrad_psi(50.0, 10.0, 2.3, 0.69, 5) == pytest.approx(-0.46)
    assert subgrad_psi(50.0, 10.0, 2.3, 0.69, 5, tie=-0.3) == pytest.approx(-0.3)


def test_schedule_is_diminishing_and_non_summable():
    s = SubgradientSchedule(mu0=2.0, J=100)
    mus = np.array([s.step(j) for j in range(10_000)])
    assert mus[0] == 2.0 and mus[3] == pytest.approx(1.0)
    assert np.all(np.diff(mus) < 0)
    assert mus.sum() > 100 * mus[0]  # partial sums grow like sqrt(J)


# --- history -------------------------------------------------------------------

def test_history_ring_buffer_and_uniform_sampling():
    cfg = one_bs()
    h = HistoryBuffer(4)
    with pytest.raises(ColdStartError):
        h.sample(np.random.default_rng(0))
    fs = atoms(cfg, 6)
    h.extend(fs)
    assert len(h) == 4 and h[0] is fs[2]
    rng = np.random.default_rng(1)
    counts = np.zeros(4)
    for _ in range(40_000):
        f = h.sample(rng)
        counts[[i for i in range(4) if h[i] is f][0]] += 1
    assert np.all(np.abs(counts / 40_000 - 0.25) < 0.01)
    assert HistoryBuffer.for_config(cfg).capacity == cfg.history_intervals * cfg.T


def test_plan_refuses_empty_history():
    cfg = one_bs()
    with pytest.raises(ColdStartError):
        plan(HistoryBuffer(3), SLOW, Q, cfg, V=V)


# --- subgradient validity ----------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_sampled_subgradient_inequality(seed):
    cfg = small_cfg()
    rng = np.random.default_rng(seed)
    fast = sample_fast_state(rng, cfg)
    slow = SlowState(1.1, 0.99, rng.uniform(0, 60, cfg.I))
    Qs = rng.uniform(-80, 0, cfg.I)
    tmpl = RealtimeTemplate(cfg, V=5.0)
    x, y = rng.uniform(0, 150, cfg.I), rng.uniform(0, 150, cfg.I)
    fx, gx = sampled_objective(x, slow, fast, Qs, cfg, 5.0, tmpl)
    fy, _ = sampled_objective(y, slow, fast, Qs, cfg, 5.0, tmpl)
    assert fy >= fx + gx @ (y - x) - 1e-6 * max(1.0, abs(fy))


def test_subgradient_at_the_kink_uses_dual_price():
    cfg = one_bs()
    fast = atoms(cfg, 1)[0]
    tmpl = RealtimeTemplate(cfg, V=V)
    inner = inner_solve(tmpl, fast, [0.0], Q)
    E_k = cfg.T * inner.delta  # supply exactly meets demand
    at = inner_solve(tmpl, fast, E_k, Q)
    assert abs(at.P[0]) < 1e-6
    lo, hi = -fast.alpha_rt / cfg.T, -fast.beta_rt / cfg.T
    assert lo - 1e-12 <= at.psi_grad[0] <= hi + 1e-12


# --- planner vs exact oracles -----------------------------------------------

def test_single_support_matches_grid_oracle():
    cfg = one_bs(plan_iters=2000)
    fast = atoms(cfg, 1, seed=3)[0]
    support = [(fast, 1.0)]
    oracle = plan_exact_finite_support(support, SLOW, Q, cfg, V=V, method="grid")
    conic = plan_exact_finite_support(support, SLOW, Q, cfg, V=V, method="conic")
    assert conic.E[0] == pytest.approx(oracle.E[0], abs=2e-3)
    h = HistoryBuffer(1)
    h.push(fast)
    got = plan(h, SLOW, Q, cfg, rng=np.random.default_rng(0), V=V)
    f = lambda e: finite_support_objective(e, support, SLOW, Q, cfg, V)
    f_star = f(oracle.E)
    assert abs(f(got.E) - f_star) <= 0.02 * abs(f_star)
    assert got.E[0] == pytest.approx(oracle.E[0], rel=0.02)


def test_expensive_ahead_market_buys_nothing():
    cfg = one_bs(plan_iters=300)
    fs = atoms(cfg, 5, seed=4)
    slow = SlowState(50.0, 45.0, np.zeros(1))  # far above any real-time price
    h = HistoryBuffer(5)
    h.extend(fs)
    got = plan(h, slow, Q, cfg, rng=np.random.default_rng(0), V=V)
    assert got.E[0] <= 0.5
    oracle = plan_exact_finite_support([(f, 0.2) for f in fs], slow, Q, cfg, V=V, method="conic")
    assert oracle.E[0] <= 1e-6


def test_price_scaling_leaves_argmin_unchanged():
    cfg = one_bs(plan_iters=2000)
    fast = atoms(cfg, 1, seed=5)[0]
    c = 3.0
    fast_c = FastState(c * fast.alpha_rt, c * fast.beta_rt, fast.H)
    slow_c = SlowState(c * SLOW.alpha_lt, c * SLOW.beta_lt, SLOW.A)
    # queues are prices times V in the drift-plus-penalty objective, so they scale too
    a = plan_exact_finite_support([(fast, 1.0)], SLOW, Q, cfg, V=V, method="conic")
    b = plan_exact_finite_support([(fast_c, 1.0)], slow_c, c * Q, cfg, V=V, method="conic")
    assert b.E[0] == pytest.approx(a.E[0], rel=1e-4)
    ha, hb = HistoryBuffer(1), HistoryBuffer(1)
    ha.push(fast)
    hb.push(fast_c)
    pa = plan(ha, SLOW, Q, cfg, rng=np.random.default_rng(0), V=V)
    pb = plan(hb, slow_c, c * Q, cfg, rng=np.random.default_rng(0), V=V)
    assert pb.E[0] == pytest.approx(pa.E[0], rel=0.02)


def test_two_point_support_and_bracketing():
    cfg = one_bs()
    f1, f2 = atoms(cfg, 2, seed=6)
    # make the second state much cheaper so the optimum follows its demand
    cheap = FastState(0.3 * f2.alpha_rt, 0.3 * f2.beta_rt, f2.H)
    tmpl = RealtimeTemplate(cfg, V=V)
    e1 = plan_exact_finite_support([(f1, 1.0), (cheap, 0.0)], SLOW, Q, cfg, V=V, method="conic").E[0]
    e2 = plan_exact_finite_support([(f1, 0.0), (cheap, 1.0)], SLOW, Q, cfg, V=V, method="conic").E[0]
    mix = plan_exact_finite_support([(f1, 0.5), (cheap, 0.5)], SLOW, Q, cfg, V=V, method="grid").E[0]
    assert min(e1, e2) - 1e-3 <= mix <= max(e1, e2) + 1e-3
    # the conic oracle agrees with a dense grid on the mixed problem
    conic_mix = plan_exact_finite_support([(f1, 0.5), (cheap, 0.5)], SLOW, Q, cfg, V=V, method="conic").E[0]
    assert conic_mix == pytest.approx(mix, abs=2e-3)
    # single-atom optimum sits where supply meets that atom's demand, or at A
    d1 = inner_solve(tmpl, f1, [e1], Q).delta[0] * cfg.T
    assert e1 == pytest.approx(d1, abs=1e-3) or e1 == pytest.approx(SLOW.A[0], abs=1e-3)


def test_unbiased_sampled_subgradient():
    cfg = one_bs()
    fs = atoms(cfg, 3, seed=7)
    freq = [1, 2, 3]
    support = [(f, k / 6) for f, k in zip(fs, freq)]
    h = HistoryBuffer(6)
    for f, k in zip(fs, freq):
        h.extend([f] * k)
    tmpl = RealtimeTemplate(cfg, V=V)
    E = np.array([30.0])
    per_atom = [sampled_objective(E, SLOW, f, Q, cfg, V, tmpl)[1][0] for f in fs]
    exact = sum(p * g for (_, p), g in zip(support, per_atom))
    rng = np.random.default_rng(8)
    n = 3000
    index = {id(f): i for i, f in enumerate(fs)}
    draws = np.array([per_atom[index[id(h.sample(rng))]] for _ in range(n)])
    assert abs(draws.mean() - exact) <= 3 * draws.std() / np.sqrt(n) + 1e-12


def test_iterates_stay_in_the_box_and_converge():
    cfg = one_bs(plan_iters=2000)
    fs = atoms(cfg, 3, seed=9)
    support = [(f, 1 / 3) for f in fs]
    h = HistoryBuffer(3)
    h.extend(fs)
    got = plan(h, SLOW, Q, cfg, rng=np.random.default_rng(2), V=V, keep_trace=True)
    assert got.trace.shape == (2001, 1)
    assert np.all(got.trace >= 0) and np.all(got.trace <= cfg.E_cap)
    f = lambda e: finite_support_objective(e, support, SLOW, Q, cfg, V)
    f_star = f(plan_exact_finite_support(support, SLOW, Q, cfg, V=V, method="conic").E)
    # tail averages of growing prefixes approach the optimum
    gaps = []
    for j in (250, 1000, 2000):
        avg = got.trace[j // 2:j + 1].mean(axis=0)
        gaps.append(f(avg) - f_star)
    assert gaps[-1] <= 0.02 * abs(f_star)
    assert min(gaps) >= -1e-6 * abs(f_star)
