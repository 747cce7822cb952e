"""Ahead-of-time energy planning by projected stochastic subgradient.

Each iteration draws one stored fast-state realisation, solves the slot problem at
the current iterate and steps along

    g_i = V * (dG_lt(E_i) + T * dPsi_rt(E_i)),

then projects onto the box 0 <= E <= E_cap. The cap keeps the problem bounded
when an ahead-of-time price falls below real-time selling prices. The returned
plan is the average of the last half of the iterates.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .config import SystemConfig
from .model import FastState, SlowState, cost_lt, sample_fast_state
from .socp import ConeAssembler, Layout, RealtimeTemplate, add_slot_block, resolved_V, solve_conic


class ColdStartError(RuntimeError):
    pass


class HistoryBuffer:
    """Ring buffer of past fast states (capacity L*T slots), sampled uniformly."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._buf: deque = deque(maxlen=capacity)

    @classmethod
    def for_config(cls, cfg: SystemConfig) -> "HistoryBuffer":
        return cls(cfg.history_intervals * cfg.T)

    def push(self, fast: FastState) -> None:
        self._buf.append(fast)

    def extend(self, states) -> None:
        for f in states:
            self._buf.append(f)

    def __len__(self) -> int:
        return len(self._buf)

    def __getitem__(self, i) -> FastState:
        return self._buf[i]

    def sample(self, rng: np.random.Generator) -> FastState:
        if not self._buf:
            raise ColdStartError("history is empty; fill it (e.g. fill_synthetic) before planning")
        return self._buf[int(rng.integers(len(self._buf)))]

    def fill_synthetic(self, rng: np.random.Generator, cfg: SystemConfig, n: Optional[int] = None) -> None:
        """Cold start: draw fast states from the configured generators."""
        for _ in range(self.capacity if n is None else n):
            self.push(sample_fast_state(rng, cfg))


@dataclass
class SubgradientSchedule:
    mu0: float = 1.0
    J: int = 2000
    tail: float = 0.5  # fraction of final iterates averaged

    def step(self, j: int) -> float:
        return self.mu0 / np.sqrt(j + 1.0)

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "SubgradientSchedule":
        return cls(mu0=cfg.plan_mu0, J=cfg.plan_iters)


@dataclass
class PlanDecision:
    E: np.ndarray  # kWh per interval, per BS
    iterations_used: int
    final_step: float
    trace: Optional[np.ndarray] = field(default=None, repr=False)  # (J+1, I) iterates


# --- subgradients -------------------------------------------------------------

def subgrad_lt(E, A, alpha_lt: float, beta_lt: float):
    """alpha above A, beta below; alpha at the kink."""
    return np.where(np.asarray(E, dtype=float) < A, beta_lt, alpha_lt)


def subgrad_psi(E, Delta, alpha_rt: float, beta_rt: float, T: int, tie=None):
    """Partial subgradient of the real-time cost in E.

    ``tie`` is the value used where E/T equals Delta (default -alpha_rt/T). Any
    value in [-alpha_rt/T, -beta_rt/T] is a subgradient of the cost itself; the
    planner passes the dual-derived price there so that the step is also a
    subgradient of the inner optimal value.
    """
    e = np.asarray(E, dtype=float) / T
    Delta = np.asarray(Delta, dtype=float)
    if tie is None:
        tie = -alpha_rt / T
    return np.where(e > Delta, -beta_rt / T, np.where(e < Delta, -alpha_rt / T, tie))


@dataclass
class InnerResult:
    value: float  # sum_i V*G_rt(P_i) + Q_i*P_b,i
    delta: np.ndarray
    P: np.ndarray
    P_b: np.ndarray
    psi_grad: np.ndarray  # dPsi/dE per BS, kink resolved by the dual price


def inner_solve(template: RealtimeTemplate, fast: FastState, E, Q, kink_tol: float = 1e-9) -> InnerResult:
    cfg = template.cfg
    dec, _ = template.solve(fast, E, Q)
    delta = cfg.p_c + dec.p_tx + dec.P_b
    E = np.asarray(E, dtype=float)
    kink = np.abs(dec.P) <= kink_tol * np.maximum(1.0, np.abs(delta))
    # away from the kink the piecewise rule; at it the balance-row multiplier
    g = subgrad_psi(E, delta, fast.alpha_rt, fast.beta_rt, cfg.T)
    g = np.where(kink, -dec.price / cfg.T, g)
    return InnerResult(value=dec.objective_value, delta=delta, P=dec.P, P_b=dec.P_b, psi_grad=g)


def sampled_objective(E, slow: SlowState, fast: FastState, Q, cfg: SystemConfig, V: Optional[float] = None,
                      template: Optional[RealtimeTemplate] = None) -> tuple[float, np.ndarray]:
    """One-realisation planning objective and its subgradient in E.

    f(E) = sum_i V*G_lt(E_i) + T * min_{P_b, w} sum_i [V*G_rt(P_i) + Q_i*P_b,i].
    """
    V = resolved_V(cfg) if V is None else float(V)
    template = template or RealtimeTemplate(cfg, V)
    E = np.asarray(E, dtype=float)
    inner = inner_solve(template, fast, E, Q)
    f = float(np.sum(V * cost_lt(E, slow.A, slow.alpha_lt, slow.beta_lt))) + cfg.T * inner.value
    g = V * (subgrad_lt(E, slow.A, slow.alpha_lt, slow.beta_lt) + cfg.T * inner.psi_grad)
    return f, g


# --- planner ----------------------------------------------------------------

def plan(history: HistoryBuffer, slow: SlowState, Q_frozen, cfg: SystemConfig,
         sched: Optional[SubgradientSchedule] = None, rng: Optional[np.random.Generator] = None,
         V: Optional[float] = None, template: Optional[RealtimeTemplate] = None,
         E0=None, keep_trace: bool = False, A_override=None) -> PlanDecision:
    """Projected stochastic subgradient over the stored realisations.

    ``A_override`` replaces the RES amounts seen by the planner (the battery- and
    RES-free baseline plans with A = 0).
    """
    if len(history) == 0:
        raise ColdStartError("history is empty; fill it (e.g. fill_synthetic) before planning")
    V = resolved_V(cfg) if V is None else float(V)
    sched = sched or SubgradientSchedule.from_config(cfg)
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    template = template or RealtimeTemplate(cfg, V)
    Q = np.asarray(Q_frozen, dtype=float)
    A = slow.A if A_override is None else np.asarray(A_override, dtype=float)
    E = np.full(cfg.I, cfg.T * cfg.p_c) if E0 is None else np.array(E0, dtype=float)
    J = sched.J
    n_tail = max(1, int(np.ceil(J * sched.tail)))
    acc = np.zeros(cfg.I)
    trace = [E.copy()] if keep_trace else None
    mu = sched.step(0)
    for j in range(J):
        fast = history.sample(rng)
        inner = inner_solve(template, fast, E, Q)
        g = V * (subgrad_lt(E, A, slow.alpha_lt, slow.beta_lt) + cfg.T * inner.psi_grad)
        mu = sched.step(j)
        E = np.clip(E - mu * g, 0.0, cfg.E_cap)
        if j >= J - n_tail:
            acc += E
        if keep_trace:
            trace.append(E.copy())
    return PlanDecision(E=acc / n_tail, iterations_used=J, final_step=mu,
                        trace=np.array(trace) if keep_trace else None)


# --- finite-support oracle --------------------------------------------------

def finite_support_objective(E, support: Sequence[tuple[FastState, float]], slow: SlowState, Q, cfg: SystemConfig,
                             V: Optional[float] = None, template: Optional[RealtimeTemplate] = None) -> float:
    """Exact expectation of the planning objective over a finite support."""
    V = resolved_V(cfg) if V is None else float(V)
    template = template or RealtimeTemplate(cfg, V)
    E = np.asarray(E, dtype=float)
    val = float(np.sum(V * cost_lt(E, slow.A, slow.alpha_lt, slow.beta_lt)))
    for fast, prob in support:
        if prob > 0:
            val += cfg.T * prob * inner_solve(template, fast, E, Q).value
    return val


def _golden(f, lo: float, hi: float, tol: float) -> float:
    inv = (np.sqrt(5.0) - 1) / 2
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def plan_exact_finite_support(support: Sequence[tuple[FastState, float]], slow: SlowState, Q_frozen,
                              cfg: SystemConfig, V: Optional[float] = None, method: str = "auto",
                              grid_step: float = 0.05, tol: float = 1e-3) -> PlanDecision:
    """Test oracle: minimise the exact expected planning objective.

    ``grid`` (single BS only) scans E in [0, E_cap] and refines the best cell by
    golden section to ``tol``. ``conic`` solves the extensive form, one slot block
    per support atom, as a single cone program.
    """
    probs = np.array([p for _, p in support], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("support probabilities must be nonnegative and sum to 1")
    V = resolved_V(cfg) if V is None else float(V)
    if method == "auto":
        method = "grid" if cfg.I == 1 else "conic"
    if method == "grid":
        if cfg.I != 1:
            raise ValueError("grid oracle handles a single BS; use method='conic'")
        template = RealtimeTemplate(cfg, V)

        def f(e):
            return finite_support_objective([e], support, slow, Q_frozen, cfg, V, template)

        grid = np.arange(0.0, cfg.E_cap + 0.5 * grid_step, grid_step)
        vals = np.array([f(e) for e in grid])
        m = int(np.argmin(vals))
        lo, hi = grid[max(m - 1, 0)], grid[min(m + 1, len(grid) - 1)]
        e_star = _golden(f, lo, hi, tol)
        if f(e_star) > vals[m]:
            e_star = grid[m]
        return PlanDecision(E=np.array([e_star]), iterations_used=len(grid), final_step=0.0)
    if method == "conic":
        E = _extensive_form(support, slow, Q_frozen, cfg, V)
        return PlanDecision(E=E, iterations_used=1, final_step=0.0)
    raise ValueError(f"unknown method {method!r}")


def lt_epigraph_rows(e_cols, u_cols, slow: SlowState, cfg: SystemConfig):
    """Rows for u >= alpha_lt (E - A), u >= beta_lt (E - A) and 0 <= E <= E_cap."""
    I = len(e_cols)
    ar = np.arange(I)
    rows = np.concatenate([ar, ar, I + ar, I + ar, 2 * I + ar, 3 * I + ar])
    cols = np.concatenate([u_cols, e_cols, u_cols, e_cols, e_cols, e_cols])
    vals = np.concatenate([-np.ones(I), np.full(I, slow.alpha_lt), -np.ones(I), np.full(I, slow.beta_lt),
                           -np.ones(I), np.ones(I)])
    b = np.concatenate([slow.alpha_lt * slow.A, slow.beta_lt * slow.A, np.zeros(I), np.full(I, cfg.E_cap)])
    return rows, cols, vals, b


def _extensive_form(support, slow: SlowState, Q, cfg: SystemConfig, V: float) -> np.ndarray:
    lay = Layout(cfg.I, cfg.K, cfg.M)
    I = cfg.I
    atoms = [(f, p) for f, p in support if p > 0]
    n_e = 2 * I  # E (I) then the ahead-of-time cost epigraph u (I)
    n = n_e + len(atoms) * lay.size
    asm = ConeAssembler(n)
    q = np.zeros(n)
    e_cols = np.arange(I)
    u_cols = I + np.arange(I)
    q[u_cols] = V
    asm.add("nonneg", *lt_epigraph_rows(e_cols, u_cols, slow, cfg))
    Q = np.asarray(Q, dtype=float)
    for a, (fast, p) in enumerate(atoms):
        col0 = n_e + a * lay.size
        add_slot_block(asm, col0, lay, fast, cfg, e_cols=e_cols, e_scale=1.0 / cfg.T)
        q[col0 + lay.s:col0 + lay.s + I] = cfg.T * p * V
        q[col0 + lay.pb:col0 + lay.pb + I] = cfg.T * p * Q
    A_mat, b_vec, cones = asm.build()
    sol = solve_conic(sp.csc_matrix(A_mat), b_vec, q, cones)
    return np.clip(sol.x[e_cols], 0.0, cfg.E_cap)
