"""Random states, samplers and the closed-form cost / physics formulas.

Channels are numpy complex arrays of shape (M*I, K); column k is h_k and rows
(i*M, ..., (i+1)*M - 1) belong to BS i. Where complex data crosses into real
solver layouts it is stored as interleaved (re, im) pairs; see ``socp``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.stats import norm

from .config import SystemConfig


@dataclass(frozen=True)
class SlowState:
    """Per-interval realisation: ahead-of-time prices and RES per BS."""

    alpha_lt: float
    beta_lt: float
    A: np.ndarray


@dataclass(frozen=True)
class FastState:
    """Per-slot realisation: real-time prices and the channel matrix."""

    alpha_rt: float
    beta_rt: float
    H: np.ndarray


@dataclass
class BatteryState:
    C: np.ndarray
    Gamma: float

    @property
    def Q(self) -> np.ndarray:
        return self.C + self.Gamma

    def copy(self) -> "BatteryState":
        return BatteryState(self.C.copy(), self.Gamma)


# --- sampling ---------------------------------------------------------------

def folded_normal(rng: np.random.Generator, mean: float, scale: float, size=None):
    return np.abs(rng.normal(mean, scale, size=size))


def folded_normal_mean(mu: float, s: float) -> float:
    """E|X| for X ~ N(mu, s^2)."""
    if s == 0:
        return abs(mu)
    return s * np.sqrt(2.0 / np.pi) * np.exp(-mu * mu / (2 * s * s)) + mu * (1 - 2 * norm.cdf(-mu / s))


def sample_slow_state(rng: np.random.Generator, cfg: SystemConfig) -> SlowState:
    m = cfg.price_lt_mean
    alpha = float(folded_normal(rng, m, cfg.price_spread * m))
    A = folded_normal(rng, cfg.res_mean, cfg.res_scale, size=cfg.I)
    return SlowState(alpha_lt=alpha, beta_lt=cfg.sell_ratio_lt * alpha, A=A)


def sample_channel(rng: np.random.Generator, cfg: SystemConfig) -> np.ndarray:
    shape = (cfg.N, cfg.K)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_fast_state(rng: np.random.Generator, cfg: SystemConfig) -> FastState:
    m = cfg.price_rt_mean
    alpha = float(np.clip(folded_normal(rng, m, cfg.price_spread * m), cfg.alpha_floor, cfg.alpha_bar))
    H = sample_channel(rng, cfg)
    return FastState(alpha_rt=alpha, beta_rt=cfg.sell_ratio_rt * alpha, H=H)


@dataclass(frozen=True)
class Interval:
    slow: SlowState
    fast: tuple  # T FastStates


def sample_path(rng: np.random.Generator, cfg: SystemConfig, n_intervals: int) -> list[Interval]:
    """A matched sample path: each interval draws its slow state then T fast states."""
    out = []
    for _ in range(n_intervals):
        slow = sample_slow_state(rng, cfg)
        fast = tuple(sample_fast_state(rng, cfg) for _ in range(cfg.T))
        out.append(Interval(slow, fast))
    return out


def iter_slots(path: list[Interval]) -> Iterator[tuple[int, int, SlowState, FastState]]:
    T = len(path[0].fast) if path else 0
    for n, iv in enumerate(path):
        for tau, fast in enumerate(iv.fast):
            yield n * T + tau, n, iv.slow, fast


# --- formulas ---------------------------------------------------------------

def battery_step(C, P_b, eta: float):
    """Leaky battery update eta*C + P_b (elementwise)."""
    return eta * C + P_b


def cost_lt(E, A, alpha_lt: float, beta_lt: float):
    """Ahead-of-time transaction cost: buy the shortage, sell the surplus."""
    d = np.asarray(E, dtype=float) - A
    return alpha_lt * np.maximum(d, 0.0) - beta_lt * np.maximum(-d, 0.0)


def cost_lt_max(E, A, alpha_lt: float, beta_lt: float):
    d = np.asarray(E, dtype=float) - A
    return np.maximum(alpha_lt * d, beta_lt * d)


def cost_rt(P, alpha_rt: float, beta_rt: float):
    """Real-time transaction cost; positive P buys, negative P sells."""
    P = np.asarray(P, dtype=float)
    return alpha_rt * np.maximum(P, 0.0) - beta_rt * np.maximum(-P, 0.0)


def cost_rt_max(P, alpha_rt: float, beta_rt: float):
    P = np.asarray(P, dtype=float)
    return np.maximum(alpha_rt * P, beta_rt * P)


def slot_cost(E_interval, P, slow: SlowState, fast: FastState, A, T: int):
    """Per-slot, per-BS cost: 1/T of the interval's ahead-of-time cost plus the real-time cost."""
    return cost_lt(E_interval, A, slow.alpha_lt, slow.beta_lt) / T + cost_rt(P, fast.alpha_rt, fast.beta_rt)


def bs_power(W: np.ndarray, I: int, M: int) -> np.ndarray:
    """Transmit power per BS, sum_k w_k^H B_i w_k, for W of shape (M*I, K)."""
    mag = np.abs(W) ** 2
    return mag.reshape(I, M, -1).sum(axis=(1, 2))


def sinr(H: np.ndarray, W: np.ndarray, sigma2, k: int) -> float:
    G = np.abs(H[:, k].conj() @ W) ** 2
    sig = np.broadcast_to(np.asarray(sigma2, dtype=float), (W.shape[1],))
    return float(G[k] / (G.sum() - G[k] + sig[k]))


def sinr_all(H: np.ndarray, W: np.ndarray, sigma2) -> np.ndarray:
    G = np.abs(H.conj().T @ W) ** 2  # G[k, l] = |h_k^H w_l|^2
    sig = np.broadcast_to(np.asarray(sigma2, dtype=float), (W.shape[1],))
    own = np.diag(G)
    return own / (G.sum(axis=1) - own + sig)
