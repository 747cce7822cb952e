"""Optimality-gap constants and the gap-minimisation over (V, Gamma)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .config import ConfigError, SystemConfig, geometric_sum, validate_config
from .controller import _window_terms, parameter_window


@dataclass(frozen=True)
class GapConstants:
    M_B: float
    M_C: float
    M1: float
    M2: float
    M3: float
    V: float

    @property
    def M(self) -> float:
        return self.M1 + self.M2 + self.M3

    @property
    def gap(self) -> float:
        return self.M / self.V


def gap_coefficients(eta: float, T: int, I: int) -> tuple[float, float, float]:
    """(c1, c2, c3) with M1 = c1*M_B, M2 = c2*M_B, M3 = c3*M_C.

    Written with geometric sums g_n = sum_{s<n} eta^s, which equal the displayed
    ratios for eta < 1 and give the eta -> 1 limits without cancellation.
    """
    gT = geometric_sum(eta, T)
    c1 = I * T / (2.0 * eta * gT)
    c2 = I * sum(geometric_sum(eta, k) for k in range(1, T)) / gT
    c3 = I * (1.0 - eta)
    return c1, c2, c3


def gap_constants(Gamma: float, V: float, cfg: SystemConfig) -> GapConstants:
    if not 0.0 < cfg.eta <= 1.0:
        raise ConfigError("eta must lie in (0, 1]")
    if V <= 0:
        raise ConfigError("V must be positive")
    d = 1.0 - cfg.eta
    M_B = max((d * Gamma + cfg.p_b_min) ** 2, (d * Gamma + cfg.p_b_max) ** 2)
    M_C = max((Gamma + cfg.c_min) ** 2, (Gamma + cfg.c_max) ** 2)
    c1, c2, c3 = gap_coefficients(cfg.eta, cfg.T, cfg.I)
    return GapConstants(M_B=M_B, M_C=M_C, M1=c1 * M_B, M2=c2 * M_B, M3=c3 * M_C, V=float(V))


def gap_constants_displayed(Gamma: float, V: float, cfg: SystemConfig) -> GapConstants:
    """The ratio forms as displayed (eta < 1 only); used to cross-check the stable forms."""
    eta, T, I = cfg.eta, cfg.T, cfg.I
    if eta >= 1.0:
        raise ValueError("displayed ratios are undefined at eta = 1")
    d = 1.0 - eta
    M_B = max((d * Gamma + cfg.p_b_min) ** 2, (d * Gamma + cfg.p_b_max) ** 2)
    M_C = max((Gamma + cfg.c_min) ** 2, (Gamma + cfg.c_max) ** 2)
    M1 = I * T * d / (2 * eta * (1 - eta ** T)) * M_B
    M2 = I * (T * d - (1 - eta ** T)) / (d * (1 - eta ** T)) * M_B
    M3 = I * d * M_C
    return GapConstants(M_B, M_C, M1, M2, M3, float(V))


@dataclass(frozen=True)
class GapOptimum:
    G_min: float
    V: float
    Gamma: float
    grid_min: float  # best value on the certification grid


def _gamma_bounds(cfg: SystemConfig, V, alpha_bar: float, beta_under: float):
    a, b, _, _ = _window_terms(cfg)
    return np.max(a) - V * beta_under, np.min(b) - V * alpha_bar


def _best_gamma(cfg: SystemConfig, V: float, alpha_bar: float, beta_under: float) -> tuple[float, float]:
    lo, hi = _gamma_bounds(cfg, V, alpha_bar, beta_under)
    if hi - lo <= 1e-12 * max(1.0, abs(lo)):
        G = 0.5 * (lo + hi)
        return gap_constants(G, V, cfg).M, G
    res = minimize_scalar(lambda g: gap_constants(g, V, cfg).M, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10 * max(1.0, abs(hi - lo))})
    # M is convex in Gamma, so the bounded search finds the minimum; also compare the ends
    cands = [(res.fun, res.x), (gap_constants(lo, V, cfg).M, lo), (gap_constants(hi, V, cfg).M, hi)]
    return min(cands)


def min_gap(V_max: float, cfg: SystemConfig, alpha_bar: Optional[float] = None, beta_under: Optional[float] = None,
            n_grid: int = 200) -> GapOptimum:
    """Minimise M(Gamma)/V over 0 < V <= V_max with Gamma inside its V-dependent window.

    Dense grid first, then nested bounded scalar searches (the objective is jointly
    convex, so the partial minimum over Gamma is convex in V).
    """
    w = parameter_window(cfg, alpha_bar, beta_under, V=min(V_max, 1.0), check=False)
    ab, bu = w.alpha_bar, w.beta_under
    V_hi = min(V_max, w.V_eff)
    if V_hi <= 0:
        raise ConfigError("Gamma window is empty for every V > 0")
    # grid
    Vs = np.linspace(V_hi / n_grid, V_hi, n_grid)
    grid_best = np.inf
    for V in Vs:
        lo, hi = _gamma_bounds(cfg, V, ab, bu)
        for G in np.linspace(lo, hi, n_grid):
            grid_best = min(grid_best, gap_constants(G, V, cfg).gap)

    def h(V):
        return _best_gamma(cfg, V, ab, bu)[0] / V

    res = minimize_scalar(h, bounds=(V_hi * 1e-6, V_hi), method="bounded",
                          options={"xatol": 1e-10 * V_hi})
    V_star, val = float(res.x), float(res.fun)
    if h(V_hi) <= val:
        V_star, val = V_hi, h(V_hi)
    _, G_star = _best_gamma(cfg, V_star, ab, bu)
    return GapOptimum(G_min=val, V=V_star, Gamma=float(G_star), grid_min=float(grid_best))


@dataclass
class CurveRow:
    eta: float
    C_max: float
    V_max: float
    G_min: float
    V: float
    Gamma: float
    ok: bool
    reason: str = ""


def gap_vs_capacity_curve(cfg: SystemConfig, C_max_list: Sequence[float], eta_list: Sequence[float],
                          alpha_bar: Optional[float] = None, beta_under: Optional[float] = None,
                          n_grid: int = 60) -> list[CurveRow]:
    rows = []
    for eta in eta_list:
        for cm in C_max_list:
            c = cfg.with_(eta=float(eta), c_max=float(cm), c0=min(cfg.c0, float(cm)))
            try:
                validate_config(c)
                w = parameter_window(c, alpha_bar, beta_under, check=False)
                opt = min_gap(w.V_max, c, alpha_bar, beta_under, n_grid=n_grid)
            except ConfigError as exc:
                rows.append(CurveRow(float(eta), float(cm), np.nan, np.nan, np.nan, np.nan, False, str(exc)))
                continue
            rows.append(CurveRow(float(eta), float(cm), w.V_max, opt.G_min, opt.V, opt.Gamma, True))
    return rows


def curve_minimizer(C_values, G_values, rtol: float = 1e-6) -> float:
    """Location of a curve's minimum, as the midpoint of its near-optimal set.

    Curves with a flat bottom have many capacities within ``rtol`` of the minimum;
    the midpoint of that set is a stable summary of where the bottom sits.
    """
    C = np.asarray(C_values, dtype=float)
    G = np.asarray(G_values, dtype=float)
    ok = np.isfinite(G)
    C, G = C[ok], G[ok]
    g0 = G.min()
    near = C[G <= g0 + rtol * abs(g0)]
    return 0.5 * (near.min() + near.max())
