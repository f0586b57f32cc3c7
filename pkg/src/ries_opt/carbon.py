"""Carbon quota allocation, emission accounting and tiered trading cost."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DT, CarbonMarketParams

N_TIERS = 5


def grid_purchase_emissions(p_buy: Sequence[float], f_grid: float) -> np.ndarray:
    p = np.asarray(p_buy, dtype=float)
    if np.any(p < 0):
        raise ValueError("purchases must be non-negative")
    return f_grid * p * DT


def allocate_quota(p_buy: Sequence[float], p_gb_heat: Sequence[float], m: CarbonMarketParams) -> float:
    """Free allowance (kg) earned by purchased electricity and boiler heat."""
    e = np.asarray(p_buy, dtype=float)
    h = np.asarray(p_gb_heat, dtype=float)
    if np.any(e < 0) or np.any(h < 0):
        raise ValueError("quota drivers must be non-negative")
    return float(m.lambda_e * e.sum() * DT + m.lambda_g * h.sum() * DT)


def tier_lines(m: CarbonMarketParams) -> list[tuple[float, float]]:
    """(slope, intercept) of each tier; the cost is the pointwise max of these lines."""
    lines = []
    for k in range(N_TIERS):
        slope = m.beta * (1 + k * m.zeta)
        # value at the tier's left edge k*l is beta*l*(k + zeta*k(k-1)/2)
        left = m.beta * m.tier_width * (k + m.zeta * k * (k - 1) / 2)
        lines.append((slope, left - slope * k * m.tier_width))
    return lines


def tiered_trading_cost(e: float, m: CarbonMarketParams) -> float:
    """Trading cost in yuan for ``e`` kg of emissions above quota."""
    if e <= 0:
        return 0.0
    b, z, l = m.beta, m.zeta, m.tier_width
    if e <= l:
        return b * e
    if e <= 2 * l:
        return b * (1 + z) * (e - l) + b * l
    if e <= 3 * l:
        return b * (1 + 2 * z) * (e - 2 * l) + b * (2 + z) * l
    if e <= 4 * l:
        return b * (1 + 3 * z) * (e - 3 * l) + b * (3 + 3 * z) * l
    return b * (1 + 4 * z) * (e - 4 * l) + b * (4 + 6 * z) * l


@dataclass(frozen=True)
class CarbonLedger:
    quota: float
    grid_purchase: float
    gas_turbine: float
    gas_boiler: float
    net_tradable: float
    cost: float
    trading_enabled: bool

    @property
    def direct(self) -> float:
        return self.gas_turbine + self.gas_boiler

    @property
    def actual(self) -> float:
        return self.grid_purchase + self.gas_turbine + self.gas_boiler

    def as_dict(self) -> dict:
        return {
            "quota_kg": self.quota,
            "grid_purchase_kg": self.grid_purchase,
            "gas_turbine_kg": self.gas_turbine,
            "gas_boiler_kg": self.gas_boiler,
            "actual_kg": self.actual,
            "net_tradable_kg": self.net_tradable,
            "cost": self.cost,
            "trading_enabled": self.trading_enabled,
        }


def carbon_cost(actual: float, quota: float, m: CarbonMarketParams, trading: bool) -> float:
    if not trading:
        return m.beta * actual if m.baseline_pricing == "flat_beta" else 0.0
    net = actual - quota
    if net >= 0:
        return tiered_trading_cost(net, m)
    return m.beta * net if m.surplus_credit == "flat_beta" else 0.0


def settle(
    p_buy: Sequence[float],
    gt_gas: Sequence[float],
    gb_gas: Sequence[float],
    gb_heat: Sequence[float],
    m: CarbonMarketParams,
    gas_factor_gt: float,
    gas_factor_gb: float,
    trading: bool,
) -> CarbonLedger:
    """Close the carbon books for one dispatch.

    Gas volumes are in Nm3 per slot. Without trading there is no quota and raw
    emissions are priced flat; with trading the tiered curve applies above the
    quota and any surplus is credited per ``m.surplus_credit``.
    """
    gt = np.asarray(gt_gas, dtype=float)
    gb = np.asarray(gb_gas, dtype=float)
    if np.any(gt < -1e-9) or np.any(gb < -1e-9):
        raise ValueError("gas volumes must be non-negative")
    e_buy = float(grid_purchase_emissions(np.maximum(p_buy, 0.0), m.f_grid).sum())
    e_gt = float(gas_factor_gt * gt.sum())
    e_gb = float(gas_factor_gb * gb.sum())
    quota = allocate_quota(np.maximum(p_buy, 0.0), np.maximum(gb_heat, 0.0), m) if trading else 0.0
    actual = e_buy + e_gt + e_gb
    return CarbonLedger(
        quota=quota,
        grid_purchase=e_buy,
        gas_turbine=e_gt,
        gas_boiler=e_gb,
        net_tradable=actual - quota,
        cost=carbon_cost(actual, quota, m, trading),
        trading_enabled=trading,
    )
