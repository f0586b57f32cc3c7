"""Solve the dispatch LP and package the result with its cost and carbon books."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from ..carbon import CarbonLedger, settle
from ..core import DT, HORIZON, ScenarioFlags, SystemConfig
from ..demand_response import room_temperature_path
from .lp import (
    DispatchInfeasible,
    DispatchUnbounded,
    LpInstance,
    PriceInput,
    TIE_EMISSION,
    TIE_STORAGE,
    build_lp,
)


@dataclass(frozen=True)
class CostBreakdown:
    energy_purchase: float
    om: float
    carbon: float

    @property
    def total(self) -> float:
        return self.energy_purchase + self.om + self.carbon

    def as_dict(self) -> dict:
        return {
            "total_cost": self.total,
            "energy_purchase_cost": self.energy_purchase,
            "om_cost": self.om,
            "carbon_cost": self.carbon,
        }


@dataclass
class DispatchSolution:
    cfg: SystemConfig
    flags: ScenarioFlags
    horizon: int
    prices: np.ndarray
    raw: dict[str, np.ndarray]
    costs: CostBreakdown
    ledger: CarbonLedger
    residuals: dict[str, np.ndarray]
    lp_objective: float
    series: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def emissions(self) -> float:
        return self.ledger.actual

    @property
    def total_cost(self) -> float:
        return self.costs.total

    def summary(self) -> dict:
        return {
            "scenario": self.flags.scenario,
            "carbon_trading": self.flags.carbon_trading_enabled,
            "demand_response": self.flags.demand_response_enabled,
            **self.costs.as_dict(),
            "emissions_kg": self.emissions,
            "ledger": self.ledger.as_dict(),
            "max_residual": {k: float(np.max(np.abs(v), initial=0.0)) for k, v in self.residuals.items()},
        }

    def to_csv(self) -> str:
        names = list(self.series)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["slot", *names])
        for t in range(self.horizon):
            w.writerow([t, *(repr(float(self.series[k][t])) for k in names)])
        return buf.getvalue()


def _series(lp: LpInstance, v: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    cfg, d, n = lp.cfg, lp.data, lp.horizon
    lhv = d.lhv_kwh
    slopes = np.array([s for _, s in d.gb_segments])
    chp_fuel = v["chp_syngas"] + lhv * v["chp_biogas"]
    gb_heat = v["gb_seg"].sum(axis=1)
    zeros = np.zeros(n)
    if lp.flags.demand_response_enabled:
        ib = v["ibdr_up"].sum(axis=1) - v["ibdr_down"].sum(axis=1)
        pb = float(v["pbdr_u"]) * d.pbdr_delta
        sub = v["sub_to_elec"] - v["sub_to_heat"]
        shift, cut = v["th_shift"], v["th_curtail"]
        room = room_temperature_path(shift, cut, d.t_out, cfg.comfort)
    else:
        ib = pb = sub = shift = cut = zeros
        room = np.full(n, cfg.comfort.t_set)
    return {
        "price": d.prices,
        "load_e": d.load_e,
        "load_h": d.load_h,
        "wind": v["wind"],
        "pv": v["pv"],
        "wind_forecast": d.wind_forecast,
        "pv_forecast": d.pv_forecast,
        "chp_fuel": chp_fuel,
        "chp_syngas": v["chp_syngas"],
        "chp_biogas": v["chp_biogas"],
        "chp_e": cfg.chp.eta_e * chp_fuel,
        "chp_h": cfg.chp.eta_h * chp_fuel,
        "gt_gas": v["gt_gas"],
        "gt_e": cfg.gt.eta_e * lhv * v["gt_gas"],
        "gt_h": cfg.gt.eta_h * lhv * v["gt_gas"],
        "gb_heat": gb_heat,
        "gb_gas": d.gb_c * DT + v["gb_seg"] @ slopes,
        "eb_in": v["eb_in"],
        "eb_heat": cfg.eb.eta * v["eb_in"],
        "hp_in": v["hp_in"],
        "hp_heat": cfg.hp.cop * v["hp_in"],
        "grid_buy": v["grid_buy"],
        "gas_buy": v["gas_buy"],
        "b2g_gas": v["b2g_gas"],
        "b2g_e": cfg.biogas.b2g_kwh_per_nm3 * v["b2g_gas"],
        "p2g_e": zeros,
        "es_ch": v["es_ch"],
        "es_dis": v["es_dis"],
        "es_soc": v["es_soc"],
        "ts_ch": v["ts_ch"],
        "ts_dis": v["ts_dis"],
        "ts_soc": v["ts_soc"],
        "heat_vent": v["heat_vent"],
        "dr_pbdr": pb,
        "dr_ibdr": ib,
        "dr_substitution": sub,
        "dr_e": pb + ib + sub,
        "th_shift": shift,
        "th_curtail": cut,
        "room_temp": room,
        "digester_heat": d.digester_heat,
        "e_grid": v["e_buy"],
        "e_gt": v["e_gt"],
        "e_gb": v["e_gb"],
        "e_total": v["e_total"],
    }


def _costs(lp: LpInstance, v: dict[str, np.ndarray], s: dict[str, np.ndarray], ledger: CarbonLedger) -> CostBreakdown:
    cfg, om = lp.cfg, lp.cfg.om
    purchase = float(np.dot(s["price"], s["grid_buy"]) * DT + cfg.gas.price * s["gas_buy"].sum())
    o = (
        om.wind * s["wind"].sum() + om.pv * s["pv"].sum() + om.chp * s["chp_e"].sum()
        + om.gt * s["gt_e"].sum() + om.gb * s["gb_heat"].sum() + om.eb * s["eb_heat"].sum()
        + om.hp * s["hp_heat"].sum()
    ) * DT
    o += om.storage_e * (s["es_ch"] + s["es_dis"]).sum() * DT
    o += om.storage_t * (s["ts_ch"] + s["ts_dis"]).sum() * DT
    o += om.b2g * s["b2g_gas"].sum()
    if lp.flags.demand_response_enabled:
        tier_price = np.array([x.price for x in cfg.dr.ibdr_tiers])
        o += float(((v["ibdr_up"] + v["ibdr_down"]) @ tier_price).sum()) * DT
        o += cfg.dr.substitution_price * (v["sub_to_elec"] + v["sub_to_heat"]).sum() * DT
        o += cfg.dr.thermal.curtail_price * v["th_curtail"].sum() * DT
    return CostBreakdown(energy_purchase=purchase, om=float(o), carbon=ledger.cost)


def _residuals(lp: LpInstance, x: np.ndarray) -> dict[str, np.ndarray]:
    r = lp.a_eq @ x - lp.b_eq
    out: dict[str, list[float]] = {}
    for name, val in zip(lp.eq_names, r):
        family = name.split("[")[0]
        if family.startswith("balance_"):
            out.setdefault(family, []).append(val)
    return {k: np.array(v) for k, v in out.items()}


def _clean(lp: LpInstance, x: np.ndarray) -> np.ndarray:
    # solver noise can leave values a hair outside their boxes
    return np.minimum(np.maximum(x, lp.lb), lp.ub)


def _diagnose(lp: LpInstance, message: str) -> DispatchInfeasible:
    return DispatchInfeasible(
        "dispatch infeasible although every slot passes the capacity screen; "
        f"coupled ramp, storage or comfort limits conflict ({message})",
        slot=None, family="coupling",
    )


def solve_dispatch(lp: LpInstance) -> DispatchSolution:
    res = linprog(
        lp.c,
        A_ub=lp.a_ub if lp.a_ub.shape[0] else None,
        b_ub=lp.b_ub if lp.a_ub.shape[0] else None,
        A_eq=lp.a_eq,
        b_eq=lp.b_eq,
        bounds=[
            (None if np.isinf(lo) else lo, None if np.isinf(hi) else hi) for lo, hi in zip(lp.lb, lp.ub)
        ],
        method="highs",
        options={"presolve": True, "primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9},
    )
    if res.status == 2:
        raise _diagnose(lp, res.message)
    if res.status == 3:
        raise DispatchUnbounded(f"dispatch LP unbounded; check configuration ({res.message})")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    x = _clean(lp, res.x)
    v = lp.unpack(x)
    s = _series(lp, v)
    cfg = lp.cfg
    ledger = settle(
        s["grid_buy"], s["gt_gas"], s["gb_gas"], s["gb_heat"], cfg.carbon,
        cfg.gt.emission_factor, cfg.gb.emission_factor, lp.flags.carbon_trading_enabled,
    )
    return DispatchSolution(
        cfg=cfg,
        flags=lp.flags,
        horizon=lp.horizon,
        prices=lp.data.prices,
        raw=v,
        costs=_costs(lp, v, s, ledger),
        ledger=ledger,
        residuals=_residuals(lp, x),
        lp_objective=float(res.fun),
        series=s,
    )


def dispatch(
    cfg: SystemConfig,
    flags: ScenarioFlags,
    prices: PriceInput = None,
    horizon: int = HORIZON,
) -> DispatchSolution:
    """Build and solve in one call."""
    return solve_dispatch(build_lp(cfg, flags, prices, horizon))


def tie_break_weight(sol: DispatchSolution) -> float:
    """Objective share contributed by the secondary tie-break terms."""
    s = sol.series
    return (
        TIE_EMISSION * (s["e_total"].sum() + s["grid_buy"].sum())
        + TIE_STORAGE * (s["es_ch"] + s["es_dis"] + s["ts_ch"] + s["ts_dis"] + s["heat_vent"]).sum()
    )
