"""Named experiment configurations shared by the scripts and the acceptance tests.

The reference table fixes powers, battery bounds and mean prices but not the
spread of the RES process, so the RES scale below is a calibration choice.
"""
from __future__ import annotations

from .config import SystemConfig, reference_config

# RES per interval per BS: folded normal with mean RES_MEAN and scale RES_MEAN / 4
RES_MEAN = 16.5
PLAN_ITERS = 50


def cost_comparison(**kw) -> SystemConfig:
    """500-slot comparison of TS-OC, the two online baselines and the offline bound."""
    base = dict(res_mean=RES_MEAN, res_scale=RES_MEAN / 4, plan_iters=PLAN_ITERS, offline_max_slots=500)
    base.update(kw)
    return reference_config(**base)


def efficiency(eta: float, c_max: float = 120.0, **kw) -> SystemConfig:
    """Battery-efficiency sweep; (Gamma, V) minimise the gap bound at each point."""
    base = dict(res_mean=RES_MEAN, res_scale=RES_MEAN / 4, plan_iters=PLAN_ITERS, eta=eta, c_max=c_max,
                param_rule="gap-optimal")
    base.update(kw)
    return reference_config(**base)


def large_battery_moves(**kw) -> SystemConfig:
    """(Dis)charge bounds of +-5 kWh per slot, the setting used for the battery schedule."""
    base = dict(res_mean=RES_MEAN, res_scale=RES_MEAN / 4, plan_iters=PLAN_ITERS, p_b_min=-5.0, p_b_max=5.0)
    base.update(kw)
    return reference_config(**base)


SCENARIOS = {"cost-comparison": cost_comparison, "large-battery-moves": large_battery_moves}
