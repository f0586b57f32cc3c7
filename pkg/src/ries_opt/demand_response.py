"""Storage recursion, electric and thermal demand response, and indoor comfort."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import DT, HORIZON, ComfortParams, StorageParams, TouPriceSchedule

SOC_TOL = 1e-9


class StorageBoundError(ValueError):
    pass


def storage_step(q_prev: float, p_ch: float, p_dis: float, p: StorageParams) -> float:
    """Energy content after one slot of charging ``p_ch`` and discharging ``p_dis`` kW."""
    if p_ch < 0 or p_dis < 0:
        raise StorageBoundError("charge and discharge power must be non-negative")
    if p_ch > p.p_ch_max + SOC_TOL or p_dis > p.p_dis_max + SOC_TOL:
        raise StorageBoundError("power above charge/discharge rating")
    if p_ch > SOC_TOL and p_dis > SOC_TOL:
        raise StorageBoundError("simultaneous charge and discharge")
    q = q_prev + (p.eta_ch * p_ch - p_dis / p.eta_dis) * DT
    if q < -SOC_TOL or q > p.capacity + SOC_TOL:
        raise StorageBoundError(f"state of charge {q:.6g} outside [0, {p.capacity}]")
    return q


# --------------------------------------------------------------------------
# price-based electric DR
# --------------------------------------------------------------------------


def default_elasticity_matrix(
    schedule: TouPriceSchedule, self_e: float = -0.2, cross_e: float = 0.03
) -> np.ndarray:
    """Diagonal ``self_e``; ``cross_e`` between slots of different TOU classes, else 0."""
    periods = schedule.period_map
    m = np.zeros((HORIZON, HORIZON))
    for i in range(HORIZON):
        for s in range(HORIZON):
            if i == s:
                m[i, s] = self_e
            elif periods[i] != periods[s]:
                m[i, s] = cross_e
    return m


def pbdr_adjustment(
    base_load: Sequence[float],
    old_prices: Sequence[float],
    new_prices: Sequence[float],
    e: np.ndarray,
    eligible_share: float = 1.0,
) -> np.ndarray:
    """Per-slot load change from a price move, for the eligible share of load.

    The relative change in slot ``t`` is sum_s e[t, s] * dP_s / P_s; each
    relative price change is normalized by its own slot's old price.
    """
    base = np.asarray(base_load, dtype=float)
    old = np.asarray(old_prices, dtype=float)
    new = np.asarray(new_prices, dtype=float)
    if np.any(old <= 0):
        raise ValueError("old prices must be strictly positive")
    rel = (new - old) / old
    return eligible_share * base * (np.asarray(e, dtype=float) @ rel)


# --------------------------------------------------------------------------
# incentive-based electric DR
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OfferTier:
    price: float
    max_up: float
    max_down: float


@dataclass(frozen=True)
class IbdrOffer:
    contract_amount: float
    tiers: tuple[OfferTier, ...]

    def __post_init__(self) -> None:
        if not self.tiers:
            raise ValueError("an IBDR offer needs at least one tier")
        prices = [t.price for t in self.tiers]
        if any(a >= b for a, b in zip(prices, prices[1:])):
            raise ValueError("tier prices must be strictly increasing")


def ibdr_response(requested: float, offer: IbdrOffer) -> tuple[float, float]:
    """Fill tiers cheapest-first toward a signed load change ``requested``.

    Negative requests ask for load reduction, positive for load increase.
    Returns (delivered signed kWh, compensation yuan); the contract part is
    always delivered and carries no tier payment.
    """
    remaining = abs(requested)
    attr = "max_down" if requested < 0 else "max_up"
    filled = 0.0
    cost = 0.0
    for tier in offer.tiers:
        if remaining <= 0:
            break
        q = min(remaining, getattr(tier, attr))
        filled += q
        cost += q * tier.price
        remaining -= q
    sign = -1.0 if requested < 0 else 1.0
    return offer.contract_amount + sign * filled, cost


# --------------------------------------------------------------------------
# thermal comfort and building dynamics
# --------------------------------------------------------------------------


def _pmv_scale(c: ComfortParams) -> float:
    return 3.76 / (c.metabolic * (c.clothing + 0.1))


def pmv(t_in: float, c: ComfortParams) -> float:
    return 2.43 - _pmv_scale(c) * (c.t_s - t_in)


def temperature_for_pmv(level: float, c: ComfortParams) -> float:
    return c.t_s - (2.43 - level) / _pmv_scale(c)


def is_night_slot(slot: int) -> bool:
    # slot t ends at clock hour t+1; nights are hours 1-7 and 20-24
    hour = slot + 1
    return hour <= 7 or hour >= 20


def comfort_band(slot: int, c: ComfortParams, day_floor: float = -0.9) -> tuple[float, float]:
    """Indoor temperature interval (degC) keeping the comfort index in bounds."""
    if not 0 <= slot < HORIZON:
        raise ValueError(f"slot {slot} outside 0..{HORIZON - 1}")
    if is_night_slot(slot):
        lo, hi = -0.9, 0.9
    else:
        lo, hi = day_floor, 0.5
    return temperature_for_pmv(lo, c), temperature_for_pmv(hi, c)


def room_temperature_step(t_in: float, t_out: float, heat_power: float, c: ComfortParams) -> float:
    """Forward-Euler update of indoor air temperature over one slot."""
    return t_in + DT * (heat_power - (t_in - t_out) * c.kf) / c.heat_capacity


def room_temperature_path(
    shift: Sequence[float], curtail: Sequence[float], t_out: Sequence[float], c: ComfortParams
) -> np.ndarray:
    """Indoor temperatures at the end of each slot.

    The undisturbed heat load holds the room at ``t_set``; thermal DR adds
    ``shift - curtail`` on top of that steady heating.
    """
    t = c.t_set
    out = np.empty(len(shift))
    for i, (s, k, to) in enumerate(zip(shift, curtail, t_out)):
        steady = (c.t_set - to) * c.kf
        t = room_temperature_step(t, to, steady + s - k, c)
        out[i] = t
    return out


# --------------------------------------------------------------------------
# thermal DR
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ThermalDrBounds:
    shift_min: tuple[float, ...]
    shift_max: tuple[float, ...]
    curtail_max: tuple[float, ...]

    def __post_init__(self) -> None:
        n = len(self.shift_min)
        if len(self.shift_max) != n or len(self.curtail_max) != n:
            raise ValueError("bound vectors must share one length")
        if any(lo > hi for lo, hi in zip(self.shift_min, self.shift_max)):
            raise ValueError("shift_min must not exceed shift_max")
        if any(c < 0 for c in self.curtail_max):
            raise ValueError("curtailment caps must be non-negative")


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    violation: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def thermal_dr_feasible(
    shift: Sequence[float], curtail: Sequence[float], b: ThermalDrBounds, tol: float = 1e-6
) -> Feasibility:
    for t, (s, lo, hi) in enumerate(zip(shift, b.shift_min, b.shift_max)):
        if s < lo - tol or s > hi + tol:
            return Feasibility(False, f"shift bound at slot {t}: {s:.6g} not in [{lo:.6g}, {hi:.6g}]")
    for t, (k, cap) in enumerate(zip(curtail, b.curtail_max)):
        if k < -tol or k > cap + tol:
            return Feasibility(False, f"curtailment cap at slot {t}: {k:.6g} not in [0, {cap:.6g}]")
    total = float(np.sum(shift))
    if abs(total) > tol * max(1.0, len(shift)):
        return Feasibility(False, f"shift sum must be zero (got {total:.6g})")
    return Feasibility(True)
