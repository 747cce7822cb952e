"""System configuration, validation and config-file I/O.

Field names are snake_case versions of the usual symbols:
``p_c`` static power, ``p_g_max`` per-BS consumption cap, ``p_b_min``/``p_b_max``
(dis)charge bounds, ``c_min``/``c_max``/``c0`` battery levels, ``eta`` storage
efficiency. All energies are kWh per slot unless noted.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np


class ConfigError(ValueError):
    """Base class for invalid configurations."""


class BoundsError(ConfigError):
    pass


class LeakageCompensationError(ConfigError):
    """P_b_max >= (1 - eta) * C_min does not hold."""


class CapacityRangeError(ConfigError):
    """C_max - C_min >= ((1 - eta^T) / (1 - eta)) (P_b_max - P_b_min) does not hold."""


class PriceOrderError(ConfigError):
    pass


def geometric_sum(eta: float, n: int) -> float:
    """sum_{s=0}^{n-1} eta^s, i.e. (1 - eta^n) / (1 - eta) with the eta -> 1 limit n."""
    if eta == 1.0:
        return float(n)
    # explicit sum avoids cancellation for eta close to 1
    return float(np.sum(eta ** np.arange(n)))


@dataclass(frozen=True)
class SystemConfig:
    # network shape
    I: int = 2
    K: int = 3
    M: int = 2
    T: int = 5
    # power / battery (kWh per slot)
    p_c: float = 10.0
    p_g_max: float = 50.0
    p_b_min: float = -2.0
    p_b_max: float = 2.0
    c_min: float = 0.0
    c_max: float = 80.0
    c0: float = 0.0
    eta: float = 0.95
    # QoS, scalars broadcast to all users
    gamma: Any = 1.0
    sigma2: Any = 1.0
    # markets
    price_lt_mean: float = 1.15
    price_rt_mean: float = 2.3
    price_spread: float = 0.25  # underlying normal scale = spread * mean
    sell_ratio_lt: float = 0.9
    sell_ratio_rt: float = 0.3
    price_cap_rt: Optional[float] = None  # default 2 * price_rt_mean
    price_floor_rt: Optional[float] = None  # default 0.1 * price_rt_mean
    # renewables, per interval per BS (kWh)
    res_mean: float = 40.0
    res_scale: float = 10.0
    # Lyapunov parameters; None -> automatic selection
    V: Optional[float] = None
    Gamma: Optional[float] = None
    # automatic (Gamma, V): "midpoint" (V at its cap, Gamma mid-window) or
    # "gap-optimal" (the pair minimising the optimality-gap bound)
    param_rule: str = "midpoint"
    # ahead-of-time planner
    plan_iters: int = 2000
    plan_mu0: float = 1.0
    history_intervals: int = 20
    # cap on ahead-of-time energy per interval; None -> T * P_g_max
    e_max: Optional[float] = None
    # real-time solve uses the interval-start queue (True) or the live queue
    frozen_queue: bool = True
    # clairvoyant benchmark horizon cap (slots)
    offline_max_slots: int = 100
    rng_seed: int = 0

    @property
    def N(self) -> int:
        """Total transmit antennas across the cluster."""
        return self.M * self.I

    @property
    def gamma_vec(self) -> np.ndarray:
        return _per_user(self.gamma, self.K, "gamma")

    @property
    def sigma2_vec(self) -> np.ndarray:
        return _per_user(self.sigma2, self.K, "sigma2")

    @property
    def alpha_bar(self) -> float:
        """Largest possible real-time purchase price (generator cap)."""
        return 2.0 * self.price_rt_mean if self.price_cap_rt is None else float(self.price_cap_rt)

    @property
    def alpha_floor(self) -> float:
        return 0.1 * self.price_rt_mean if self.price_floor_rt is None else float(self.price_floor_rt)

    @property
    def beta_under(self) -> float:
        """Smallest possible real-time selling price."""
        return self.sell_ratio_rt * self.alpha_floor

    @property
    def E_cap(self) -> float:
        """Upper end of the planning box [0, E_cap]; keeps the plan bounded when
        alpha_lt drops below real-time selling prices."""
        return self.T * self.p_g_max if self.e_max is None else float(self.e_max)

    @property
    def has_battery(self) -> bool:
        return self.p_b_min < self.p_b_max

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("gamma", "sigma2"):
            if isinstance(d[key], np.ndarray):
                d[key] = d[key].tolist()
            elif isinstance(d[key], tuple):
                d[key] = list(d[key])
        return d


def _per_user(value, K: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(K, float(arr))
    if arr.shape != (K,):
        raise ConfigError(f"{name} must be a scalar or have length K={K}, got shape {arr.shape}")
    return arr.copy()


def validate_config(cfg: SystemConfig, *, require_battery: bool = True) -> SystemConfig:
    """Return ``cfg`` unchanged if every invariant holds, else raise a ConfigError.

    ``require_battery=False`` admits the collapsed box P_b_min = P_b_max = 0 used
    by the battery-free baseline.
    """
    for name in ("I", "K", "M", "T"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be >= 1")
    if not 0.0 < cfg.eta <= 1.0:
        raise ConfigError(f"eta must lie in (0, 1], got {cfg.eta}")
    if require_battery:
        if not cfg.p_b_min < 0.0 < cfg.p_b_max:
            raise BoundsError(f"need P_b_min < 0 < P_b_max, got [{cfg.p_b_min}, {cfg.p_b_max}]")
    elif not cfg.p_b_min <= 0.0 <= cfg.p_b_max:
        raise BoundsError(f"need P_b_min <= 0 <= P_b_max, got [{cfg.p_b_min}, {cfg.p_b_max}]")
    if not cfg.c_min <= cfg.c0 <= cfg.c_max:
        raise BoundsError(f"need C_min <= C0 <= C_max, got {cfg.c_min} <= {cfg.c0} <= {cfg.c_max}")
    if cfg.p_c <= 0 or cfg.p_g_max <= cfg.p_c:
        raise BoundsError(f"need 0 < P_c < P_g_max, got P_c={cfg.p_c}, P_g_max={cfg.p_g_max}")
    if np.any(cfg.gamma_vec <= 0) or np.any(cfg.sigma2_vec <= 0):
        raise ConfigError("gamma and sigma2 must be positive")
    if require_battery or cfg.has_battery:
        if cfg.p_b_max < (1.0 - cfg.eta) * cfg.c_min:
            raise LeakageCompensationError(
                f"P_b_max >= (1 - eta) C_min violated: {cfg.p_b_max} < {(1.0 - cfg.eta) * cfg.c_min}"
            )
        need = geometric_sum(cfg.eta, cfg.T) * (cfg.p_b_max - cfg.p_b_min)
        if cfg.c_max - cfg.c_min < need:
            raise CapacityRangeError(
                "C_max - C_min >= ((1 - eta^T)/(1 - eta)) (P_b_max - P_b_min) violated: "
                f"{cfg.c_max - cfg.c_min:.6g} < {need:.6g}"
            )
    for name, ratio in (("sell_ratio_lt", cfg.sell_ratio_lt), ("sell_ratio_rt", cfg.sell_ratio_rt)):
        if not 0.0 < ratio < 1.0:
            raise PriceOrderError(f"{name} must lie in (0, 1) so that selling < purchase, got {ratio}")
    if cfg.price_lt_mean <= 0 or cfg.price_rt_mean <= 0 or cfg.price_spread < 0:
        raise PriceOrderError("price means must be positive and the spread nonnegative")
    if not 0.0 < cfg.alpha_floor < cfg.alpha_bar:
        raise PriceOrderError(
            f"need 0 < real-time price floor < cap, got floor={cfg.alpha_floor}, cap={cfg.alpha_bar}"
        )
    if cfg.res_mean < 0 or cfg.res_scale < 0:
        raise ConfigError("RES parameters must be nonnegative")
    if cfg.plan_iters < 1 or cfg.plan_mu0 <= 0 or cfg.history_intervals < 1:
        raise ConfigError("planner settings must be positive")
    if cfg.E_cap <= 0:
        raise ConfigError("e_max must be positive")
    if cfg.param_rule not in ("midpoint", "gap-optimal"):
        raise ConfigError(f"param_rule must be 'midpoint' or 'gap-optimal', got {cfg.param_rule!r}")
    if cfg.V is not None and cfg.V <= 0:
        raise ConfigError("V must be positive")
    return cfg


# --- config files -----------------------------------------------------------

_FIELD_NAMES = {f.name for f in fields(SystemConfig)}


def config_from_dict(data: dict, base: Optional[SystemConfig] = None) -> SystemConfig:
    unknown = set(data) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    values = dict(data)
    for key in ("gamma", "sigma2"):
        if isinstance(values.get(key), list):
            values[key] = tuple(float(v) for v in values[key])
    return replace(base or SystemConfig(), **values)


def load_config(path: str | Path, base: Optional[SystemConfig] = None) -> SystemConfig:
    """Read a JSON or YAML file with one key per SystemConfig field.

    Missing keys keep the values of ``base`` (the defaults when omitted).
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data, base)


def dump_config(cfg: SystemConfig, path: str | Path, extra: Optional[dict] = None) -> None:
    payload = {"config": cfg.to_dict()}
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable))


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def reference_config(**overrides) -> SystemConfig:
    """The reference parameter table (kWh): P_c=10, P_g_max=50, P_b=+-2, C in [0, 80], C0=0."""
    return SystemConfig(**overrides)
