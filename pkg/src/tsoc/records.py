"""Per-slot record shared by the controller, the baselines and the CSV writer."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import cost_lt, cost_rt


@dataclass
class SlotRecord:
    t: int
    n: int
    E_share: np.ndarray  # E_i[n] / T
    P: np.ndarray
    P_b: np.ndarray
    C: np.ndarray  # SoC at the start of slot t
    Q: np.ndarray  # C + Gamma at the start of slot t (nan when no queue exists)
    Phi: np.ndarray
    A: np.ndarray  # RES seen by the cost accounting (0 for the RES-free baseline)
    alpha_lt: float
    beta_lt: float
    alpha_rt: float
    beta_rt: float
    sinr: np.ndarray
    iterations: int

    @staticmethod
    def columns(I: int, K: int) -> list[str]:
        cols = ["t", "n"]
        for name in ("E_share", "P", "P_b", "C", "Q", "Phi", "A"):
            cols += [f"{name}_{i}" for i in range(I)]
        cols += ["alpha_lt", "beta_lt", "alpha_rt", "beta_rt"]
        cols += [f"sinr_{k}" for k in range(K)]
        cols.append("iterations")
        return cols

    def row(self) -> list:
        out = [self.t, self.n]
        for arr in (self.E_share, self.P, self.P_b, self.C, self.Q, self.Phi, self.A):
            out += list(np.asarray(arr, dtype=float))
        out += [self.alpha_lt, self.beta_lt, self.alpha_rt, self.beta_rt]
        out += list(np.asarray(self.sinr, dtype=float))
        out.append(self.iterations)
        return out

    @property
    def total_cost(self) -> float:
        return float(np.sum(self.Phi))


def phi_from_fields(E_share, P, A, alpha_lt, beta_lt, alpha_rt, beta_rt, T: int):
    """Per-slot cost rebuilt from record fields: G_lt(T * share)/T + G_rt(P)."""
    E = T * np.asarray(E_share, dtype=float)
    return cost_lt(E, A, alpha_lt, beta_lt) / T + cost_rt(P, alpha_rt, beta_rt)
