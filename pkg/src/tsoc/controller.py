"""Two-scale online controller: parameter window, (Gamma, V) choice and the interval loop."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import ConfigError, SystemConfig, geometric_sum, validate_config
from .model import BatteryState, FastState, SlowState, battery_step, cost_lt, cost_rt
from .planner import HistoryBuffer, PlanDecision, SubgradientSchedule, plan
from .records import SlotRecord
from .socp import RealtimeTemplate


class EmptyWindowError(ConfigError):
    """No Gamma satisfies both window bounds at the requested V."""


class FeasibilityViolation(AssertionError):
    pass


@dataclass(frozen=True)
class ParameterWindow:
    Gamma_min: float
    Gamma_max: float
    V_max: float
    V_eff: float  # largest V whose Gamma window is nonempty
    alpha_bar: float
    beta_under: float
    V: float

    @property
    def empty(self) -> bool:
        return self.Gamma_min > self.Gamma_max + 1e-9 * max(1.0, abs(self.Gamma_max))

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.Gamma_min + self.Gamma_max)


def _window_terms(cfg: SystemConfig):
    """Per-tau constants a_tau, b_tau with Gamma_min = max(a) - V*beta, Gamma_max = min(b) - V*alpha."""
    taus = np.arange(1, cfg.T + 1)
    g = np.array([geometric_sum(cfg.eta, int(t)) for t in taus])
    eta_t = cfg.eta ** taus
    a = (g * cfg.p_b_max - cfg.c_max) / eta_t
    b = (g * cfg.p_b_min - cfg.c_min) / eta_t
    return a, b, g, eta_t


def parameter_window(cfg: SystemConfig, alpha_bar: Optional[float] = None, beta_under: Optional[float] = None,
                     V: Optional[float] = None, check: bool = True) -> ParameterWindow:
    validate_config(cfg)
    ab = cfg.alpha_bar if alpha_bar is None else float(alpha_bar)
    bu = cfg.beta_under if beta_under is None else float(beta_under)
    if not ab > bu:
        raise ConfigError(f"need alpha_bar > beta_under, got {ab} <= {bu}")
    a, b, g, eta_t = _window_terms(cfg)
    span = cfg.c_max - cfg.c_min - g * (cfg.p_b_max - cfg.p_b_min)
    V_max = float(np.min(span / (eta_t * (ab - bu))))
    V_eff = float((np.min(b) - np.max(a)) / (ab - bu))
    if V is None:
        V = min(V_max, V_eff)
    w = ParameterWindow(Gamma_min=float(np.max(a) - V * bu), Gamma_max=float(np.min(b) - V * ab), V_max=V_max,
                        V_eff=V_eff, alpha_bar=ab, beta_under=bu, V=float(V))
    if check and w.empty:
        raise EmptyWindowError(
            f"Gamma window empty at V={V:.6g}: Gamma_min={w.Gamma_min:.6g} > Gamma_max={w.Gamma_max:.6g} "
            f"(V_max={V_max:.6g}, largest admissible V={V_eff:.6g})"
        )
    return w


def select_parameters(cfg: SystemConfig, window: Optional[ParameterWindow] = None, V: Optional[float] = None,
                      Gamma: Optional[float] = None) -> tuple[float, float, ParameterWindow]:
    """Return (Gamma, V, window at V).

    V defaults to cfg.V, else to V_max capped at the largest V with a nonempty
    Gamma window; Gamma defaults to cfg.Gamma, else to the window midpoint.
    With ``cfg.param_rule == "gap-optimal"`` and neither value fixed, the pair
    minimising the gap bound is used instead.
    """
    V = cfg.V if V is None else V
    Gamma = cfg.Gamma if Gamma is None else Gamma
    base = window or parameter_window(cfg, check=False)
    if V is None and Gamma is None and cfg.param_rule == "gap-optimal":
        from .gap import min_gap  # gap imports this module

        opt = min_gap(base.V_max, cfg, base.alpha_bar, base.beta_under)
        V = opt.V
        w = parameter_window(cfg, base.alpha_bar, base.beta_under, V=V)
        Gamma = float(np.clip(opt.Gamma, w.Gamma_min, w.Gamma_max))
    if V is None:
        V = min(base.V_max, base.V_eff)
    if not 0 < V <= base.V_max * (1 + 1e-12):
        raise EmptyWindowError(f"V={V:.6g} outside (0, V_max={base.V_max:.6g}]")
    w = parameter_window(cfg, base.alpha_bar, base.beta_under, V=V)
    if Gamma is None:
        Gamma = w.midpoint
    tol = 1e-9 * max(1.0, abs(Gamma))
    if not w.Gamma_min - tol <= Gamma <= w.Gamma_max + tol:
        raise EmptyWindowError(f"Gamma={Gamma:.6g} outside [{w.Gamma_min:.6g}, {w.Gamma_max:.6g}] at V={V:.6g}")
    return float(Gamma), float(V), w


class SocClass(enum.Enum):
    FORCE_CHARGE = "force-charge"
    FORCE_DISCHARGE = "force-discharge"
    INTERIOR = "interior"


def classify_soc(C, V: float, Gamma: float, alpha_bar: float, beta_under: float):
    """Forced-action regions of the interval-start SoC; thresholds themselves count as interior."""
    C = np.asarray(C, dtype=float)
    out = np.full(C.shape, SocClass.INTERIOR, dtype=object)
    out[C > -V * beta_under - Gamma] = SocClass.FORCE_DISCHARGE
    out[C < -V * alpha_bar - Gamma] = SocClass.FORCE_CHARGE
    return out if out.ndim else out.item()


def case_chain(C_start: float, C_traj, V: float, Gamma: float, cfg: SystemConfig, alpha_bar: float,
               beta_under: float, tol: float = 1e-9) -> dict:
    """Evaluate each link of the per-case bound chains for one BS over one interval.

    ``C_traj`` holds C(nT+1..nT+T). Returns {'case', 'links', 'upper_threshold_inside'}.
    The window guarantees C_min <= -V*alpha_bar - Gamma; the matching upper claim
    -V*beta_under - Gamma <= C_max needs (1 - eta) C_max <= P_b_max and is only
    reported (when it fails the discharge region c3 is empty).
    """
    lo = -V * alpha_bar - Gamma
    hi = -V * beta_under - Gamma
    links = {"premise-lo": cfg.c_min - tol <= lo, "premise-order": lo < hi}
    if C_start < lo:
        case = "c1"
    elif C_start > hi:
        case = "c3"
    else:
        case = "c2"
    ok = {}
    for k, C_t in enumerate(np.asarray(C_traj, dtype=float), start=1):
        e, g = cfg.eta ** k, geometric_sum(cfg.eta, k)
        if case == "c1":
            chain_lo = [C_t, e * cfg.c_min + g * cfg.p_b_max, cfg.c_min]
            chain_hi = [C_t, e * lo + g * cfg.p_b_max, e * hi + g * cfg.p_b_max, cfg.c_max]
        elif case == "c2":
            chain_lo = [C_t, e * lo + g * cfg.p_b_min, cfg.c_min]
            chain_hi = [C_t, e * hi + g * cfg.p_b_max, cfg.c_max]
        else:
            chain_lo = [C_t, e * hi + g * cfg.p_b_min, e * lo + g * cfg.p_b_min, cfg.c_min]
            chain_hi = [C_t, e * cfg.c_max + g * cfg.p_b_min, cfg.c_max]
        # chain_lo must be nonincreasing, chain_hi nondecreasing
        for j in range(len(chain_lo) - 1):
            name = f"{case}-i-{j}"
            ok[name] = ok.get(name, True) and chain_lo[j] >= chain_lo[j + 1] - tol
        for j in range(len(chain_hi) - 1):
            name = f"{case}-ii-{j}"
            ok[name] = ok.get(name, True) and chain_hi[j] <= chain_hi[j + 1] + tol
    links.update(ok)
    return {"case": case, "links": links, "upper_threshold_inside": hi <= cfg.c_max + tol}


# --- controller -------------------------------------------------------------

@dataclass
class ControllerState:
    battery: BatteryState
    plan: Optional[PlanDecision]
    n: int
    tau: int
    cumulative_cost: float
    history: HistoryBuffer


@dataclass
class IntervalDiagnostics:
    n: int
    soc_class: list  # SocClass per BS at the interval start
    forced_ok: bool  # forced BSs used the forced action in every slot
    cases: list  # case_chain result per BS
    plan: PlanDecision


@dataclass
class ControllerStats:
    soc_violations: int = 0
    forced_intervals: int = 0
    forced_failures: int = 0
    case_counts: dict = field(default_factory=lambda: {"c1": 0, "c2": 0, "c3": 0})
    chain_failures: int = 0
    max_sinr_shortfall: float = 0.0
    max_balance_residual: float = 0.0


class TSOCController:
    """Runs the two-scale loop; the same machinery hosts the online baselines.

    ``plan_mode`` is "subgradient" (the planner), "zero" (E = 0: nothing bought
    ahead, all RES sold ahead) or "res" (E = A: RES used on site, no ahead trade).
    ``ignore_res`` plans and accounts with A = 0; a config whose (dis)charge box is
    [0, 0] removes the battery. ``live_queue`` solves each slot with Q(t) instead of Q(nT); it
    carries no optimality guarantee.
    """

    def __init__(self, cfg: SystemConfig, Gamma: Optional[float] = None, V: Optional[float] = None,
                 rng: Optional[np.random.Generator] = None, *, plan_mode: str = "subgradient", ignore_res: bool = False,
                 live_queue: Optional[bool] = None, strict: bool = True, diagnostics: bool = False,
                 sched: Optional[SubgradientSchedule] = None):
        self.cfg = cfg
        if cfg.has_battery:
            validate_config(cfg)
            self.Gamma, self.V, self.window = select_parameters(cfg, V=V, Gamma=Gamma)
        else:
            validate_config(cfg, require_battery=False)
            self.V = float(V if V is not None else cfg.V) if (V is not None or cfg.V is not None) else None
            if self.V is None:
                raise ConfigError("a battery-free controller needs an explicit V")
            self.Gamma = float(Gamma if Gamma is not None else (cfg.Gamma or 0.0))
            self.window = None
        if plan_mode not in ("subgradient", "zero", "res"):
            raise ValueError(f"unknown plan_mode {plan_mode!r}")
        self.plan_mode = plan_mode
        self.ignore_res = ignore_res
        self.live_queue = (not cfg.frozen_queue) if live_queue is None else live_queue
        self.strict = strict and not self.live_queue
        self.diagnostics = diagnostics
        self.rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
        self.sched = sched or SubgradientSchedule.from_config(cfg)
        self.template = RealtimeTemplate(cfg, self.V)
        self.state = ControllerState(
            battery=BatteryState(np.full(cfg.I, float(cfg.c0)), self.Gamma), plan=None, n=0, tau=0,
            cumulative_cost=0.0, history=HistoryBuffer.for_config(cfg))
        self.stats = ControllerStats()
        self.interval_log: list[IntervalDiagnostics] = []

    # planning
    def _plan(self, slow: SlowState, Q: np.ndarray) -> PlanDecision:
        cfg = self.cfg
        if self.plan_mode == "zero":
            return PlanDecision(E=np.zeros(cfg.I), iterations_used=0, final_step=0.0)
        if self.plan_mode == "res":
            A = np.zeros(cfg.I) if self.ignore_res else np.asarray(slow.A, dtype=float)
            return PlanDecision(E=np.minimum(A, cfg.E_cap), iterations_used=0, final_step=0.0)
        hist = self.state.history
        if len(hist) == 0:
            hist.fill_synthetic(self.rng, cfg, n=cfg.T)
        A = np.zeros(cfg.I) if self.ignore_res else None
        return plan(hist, slow, Q, cfg, self.sched, rng=self.rng, V=self.V, template=self.template, A_override=A)

    def step_interval(self, slow: SlowState, fast_seq) -> list[SlotRecord]:
        cfg, st = self.cfg, self.state
        if st.tau != 0:
            raise RuntimeError("step_interval must start at an interval boundary")
        if len(fast_seq) != cfg.T:
            raise ValueError(f"expected {cfg.T} fast states, got {len(fast_seq)}")
        bat = st.battery
        C_start = bat.C.copy()
        Q_frozen = bat.Q.copy()
        decision = self._plan(slow, Q_frozen)
        st.plan = decision
        E = decision.E
        A_cost = np.zeros(cfg.I) if self.ignore_res else slow.A
        lt = cost_lt(E, A_cost, slow.alpha_lt, slow.beta_lt) / cfg.T
        if self.window is not None:
            cls = classify_soc(C_start, self.V, self.Gamma, self.window.alpha_bar, self.window.beta_under)
        else:
            cls = np.full(cfg.I, SocClass.INTERIOR, dtype=object)
        forced = np.array([c is not SocClass.INTERIOR for c in cls])
        target = np.where(np.array([c is SocClass.FORCE_CHARGE for c in cls]), cfg.p_b_max, cfg.p_b_min)
        forced_ok = True
        records = []
        traj = []
        for tau, fast in enumerate(fast_seq):
            t = st.n * cfg.T + tau
            Q_use = bat.Q if self.live_queue else Q_frozen
            dec, rep = self.template.solve(fast, E, Q_use)
            if forced.any() and not self.live_queue:
                if np.any(np.abs(dec.P_b[forced] - target[forced]) > 1e-6):
                    forced_ok = False
            phi = lt + cost_rt(dec.P, fast.alpha_rt, fast.beta_rt)
            self._check_slot(dec, fast, E)
            records.append(SlotRecord(
                t=t, n=st.n, E_share=E / cfg.T, P=dec.P, P_b=dec.P_b, C=bat.C.copy(),
                Q=bat.Q.copy() if cfg.has_battery else np.full(cfg.I, np.nan), Phi=phi, A=A_cost.copy(),
                alpha_lt=slow.alpha_lt, beta_lt=slow.beta_lt, alpha_rt=fast.alpha_rt, beta_rt=fast.beta_rt,
                sinr=dec.sinr, iterations=rep.iterations))
            bat.C = battery_step(bat.C, dec.P_b, cfg.eta)
            traj.append(bat.C.copy())
            self._check_soc(bat.C, t + 1)
            st.cumulative_cost += float(np.sum(phi))
            st.tau = tau + 1
        st.history.extend(fast_seq)
        if self.window is not None and not self.live_queue:
            self._log_interval(C_start, np.array(traj), cls, forced, forced_ok, decision)
        st.n += 1
        st.tau = 0
        return records

    def _check_slot(self, dec, fast: FastState, E) -> None:
        cfg = self.cfg
        short = float(np.max(cfg.gamma_vec - dec.sinr))
        self.stats.max_sinr_shortfall = max(self.stats.max_sinr_shortfall, short)
        bal = float(np.max(np.abs(cfg.p_c + dec.p_tx + dec.P_b - np.asarray(E) / cfg.T - dec.P)))
        self.stats.max_balance_residual = max(self.stats.max_balance_residual, bal)
        if short > 1e-6 or bal > 1e-7:
            raise FeasibilityViolation(f"slot decision infeasible: SINR shortfall {short:.3g}, balance {bal:.3g}")

    def _check_soc(self, C, t: int) -> None:
        cfg = self.cfg
        tol = 1e-9 * max(1.0, cfg.c_max)
        bad = (C < cfg.c_min - tol) | (C > cfg.c_max + tol)
        if np.any(bad):
            self.stats.soc_violations += int(np.sum(bad))
            if self.strict:
                raise FeasibilityViolation(f"SoC {C} left [{cfg.c_min}, {cfg.c_max}] at t={t}")

    def _log_interval(self, C_start, traj, cls, forced, forced_ok, decision) -> None:
        w, stats = self.window, self.stats
        cases = []
        for i in range(self.cfg.I):
            res = case_chain(C_start[i], traj[:, i], self.V, self.Gamma, self.cfg, w.alpha_bar, w.beta_under)
            stats.case_counts[res["case"]] += 1
            if not all(res["links"].values()):
                stats.chain_failures += 1
            cases.append(res)
        if forced.any():
            stats.forced_intervals += 1
            if not forced_ok:
                stats.forced_failures += 1
        if self.diagnostics:
            self.interval_log.append(IntervalDiagnostics(self.state.n, list(cls), forced_ok, cases, decision))

    def run(self, path) -> list[SlotRecord]:
        out = []
        for iv in path:
            out += self.step_interval(iv.slow, iv.fast)
        return out
