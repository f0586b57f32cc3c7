"""Independent feasibility audit of a dispatch result.

Everything here is recomputed from the per-slot decision series and the raw
configuration; the LP matrices are never consulted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..biomass import biogas_yield, digester_heat_input, pyrolysis_fuel, syngas_energy, upgrade_biogas
from ..carbon import settle
from ..core import DT, ScenarioFlags, SystemConfig
from ..demand_response import ThermalDrBounds, comfort_band, room_temperature_step, thermal_dr_feasible
from ..devices import gb_fuel_and_emissions, pv_output, wind_output
from .normal import inverse_normal_cdf

ABS_TOL = 1e-6


@dataclass(frozen=True)
class FamilyResult:
    passed: bool
    worst: float
    detail: str = ""


@dataclass
class VerifyReport:
    families: dict[str, FamilyResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.families.values())

    def failures(self) -> list[str]:
        return [f"{k}: {v.detail}" for k, v in self.families.items() if not v.passed]

    def as_dict(self) -> dict:
        return {
            k: {"passed": v.passed, "worst": v.worst, "detail": v.detail} for k, v in self.families.items()
        }


class _Family:
    def __init__(self, scale_tol: float = ABS_TOL) -> None:
        self.worst = 0.0
        self.detail = ""
        self.tol = scale_tol

    def check(self, violation: float, what: str) -> None:
        if violation > self.worst:
            self.worst = float(violation)
            if violation > self.tol:
                self.detail = f"{what} off by {violation:.3g}"

    def result(self) -> FamilyResult:
        return FamilyResult(self.worst <= self.tol, self.worst, self.detail)


def _over(value: np.ndarray, cap) -> np.ndarray:
    return np.maximum(np.asarray(value) - np.asarray(cap), 0.0)


def verify_solution(sol, cfg: SystemConfig, flags: ScenarioFlags) -> VerifyReport:
    s = sol.series
    n = sol.horizon
    pr = cfg.profiles
    lhv = cfg.gas_lhv_kwh
    report = VerifyReport()

    load_e = pr.load_electric.array()[:n]
    load_h = pr.load_thermal.array()[:n]
    t_out = pr.outdoor_temperature.array()[:n]
    dig = np.array([digester_heat_input(max(cfg.biogas.digester.t_opt - t, 0.0), cfg.biogas) for t in t_out])

    chp_e = cfg.chp.eta_e * (s["chp_syngas"] + lhv * s["chp_biogas"])
    chp_h = cfg.chp.eta_h * (s["chp_syngas"] + lhv * s["chp_biogas"])
    gt_e = cfg.gt.eta_e * lhv * s["gt_gas"]
    gt_h = cfg.gt.eta_h * lhv * s["gt_gas"]
    eb_h = cfg.eb.eta * s["eb_in"]
    hp_h = cfg.hp.cop * s["hp_in"]
    gb_gas = np.array([gb_fuel_and_emissions(min(h, cfg.gb.capacity), cfg.gb, lhv)[0] for h in np.maximum(s["gb_heat"], 0)])

    # balances
    fam = _Family()
    supply = s["wind"] + s["pv"] + chp_e + gt_e + s["grid_buy"] + s["es_dis"] - s["es_ch"]
    demand = load_e + s["dr_e"] + s["eb_in"] + s["hp_in"] + cfg.biogas.b2g_kwh_per_nm3 * s["b2g_gas"]
    for t in range(n):
        fam.check(abs(supply[t] - demand[t]), f"electric balance at slot {t}")
    report.families["balance_electric"] = fam.result()

    fam = _Family()
    gen = (1 - cfg.network.thermal_loss_rate) * (chp_h + gt_h + s["gb_heat"] + eb_h + hp_h)
    heat_sup = gen + s["ts_dis"] - s["ts_ch"]
    heat_dem = (
        load_h + dig + s["th_shift"] - s["th_curtail"] - cfg.dr.substitution_ratio * s["dr_substitution"]
        + s["heat_vent"]
    )
    for t in range(n):
        fam.check(abs(heat_sup[t] - heat_dem[t]), f"thermal balance at slot {t}")
    report.families["balance_thermal"] = fam.result()

    fam = _Family()
    # boiler gas is re-evaluated on the exact curve; segment interpolation of a
    # strictly convex curve may sit above it, so only shortfall counts
    gas_in = s["gas_buy"] + s["b2g_gas"]
    gas_out = s["gt_gas"] + s["chp_biogas"] + s["gb_gas"]
    for t in range(n):
        fam.check(abs(gas_in[t] - gas_out[t]), f"gas balance at slot {t}")
        fam.check(gb_gas[t] - s["gb_gas"][t] - ABS_TOL * max(1.0, gb_gas[t]), f"boiler gas below curve at slot {t}")
    report.families["balance_gas"] = fam.result()

    # device limits
    fam = _Family()
    wind_f = np.array([wind_output(v, cfg.wind) for v in pr.wind_speed.values[:n]])
    pv_f = np.array([pv_output(g, c, cfg.pv) for g, c in zip(pr.irradiance.values[:n], pr.cell_temperature.values[:n])])
    z = inverse_normal_cdf(1 - cfg.renewables.confidence)
    sf = cfg.renewables.sigma_fraction
    syngas = np.array([
        syngas_energy(pyrolysis_fuel(a, b, cfg.pyrolysis), cfg.chp.lhv_fuel, cfg.pyrolysis)
        for a, b in zip(pr.straw.values[:n], pr.garbage.values[:n])
    ])
    upg = np.array([
        upgrade_biogas(biogas_yield(a, b, cfg.biogas), cfg.biogas)
        for a, b in zip(pr.wastewater.values[:n], pr.wet_garbage.values[:n])
    ])
    limits = [
        ("wind", s["wind"], np.maximum(wind_f * (1 + sf * z), 0)),
        ("pv", s["pv"], np.maximum(pv_f * (1 + sf * z), 0)),
        ("chp syngas", s["chp_syngas"], syngas),
        ("chp biogas cap", s["chp_biogas"], cfg.chp.gas_max),
        ("chp biogas supply", s["chp_biogas"], s["b2g_gas"]),
        ("b2g supply", s["b2g_gas"], upg),
        ("chp rating", chp_e, cfg.chp.capacity * DT),
        ("gt rating", gt_e, cfg.gt.capacity * DT),
        ("gb rating", s["gb_heat"], cfg.gb.capacity),
        ("eb rating", eb_h, cfg.eb.capacity),
        ("hp rating", s["hp_in"], cfg.hp.capacity),
        ("grid import", s["grid_buy"], cfg.network.grid_import_max),
        ("heat vent", s["heat_vent"], (1 - cfg.network.thermal_loss_rate) * (chp_h + gt_h)),
    ]
    for name, val, cap in limits:
        fam.check(float(np.max(_over(val, cap), initial=0.0)), name)
    if cfg.gb.min_output > 0:
        fam.check(float(np.max(_over(cfg.gb.min_output, s["gb_heat"]), initial=0.0)), "gb minimum output")
    for key in ("wind", "pv", "chp_syngas", "chp_biogas", "gt_gas", "gb_heat", "eb_in", "hp_in",
                "grid_buy", "gas_buy", "b2g_gas", "es_ch", "es_dis", "ts_ch", "ts_dis", "th_curtail", "heat_vent"):
        fam.check(float(np.max(-s[key], initial=0.0)), f"{key} negative")
    report.families["bounds"] = fam.result()

    fam = _Family()
    for name, series, p in (("chp", chp_e, cfg.chp), ("gt", gt_e, cfg.gt), ("gb", s["gb_heat"], cfg.gb)):
        step = np.diff(series)
        fam.check(float(np.max(_over(step, p.ramp_up * DT), initial=0.0)), f"{name} ramp up")
        fam.check(float(np.max(_over(-step, p.ramp_down * DT), initial=0.0)), f"{name} ramp down")
    report.families["ramps"] = fam.result()

    # storage recursion, bounds, complementarity, cyclic end state
    fam = _Family()
    for key, p in (("es", cfg.storage.electric), ("ts", cfg.storage.thermal)):
        q = p.q0
        ch, dis, soc = s[f"{key}_ch"], s[f"{key}_dis"], s[f"{key}_soc"]
        for t in range(n):
            q = q + (p.eta_ch * ch[t] - dis[t] / p.eta_dis) * DT
            fam.check(abs(q - soc[t]), f"{key} recursion at slot {t}")
            fam.check(max(-soc[t], soc[t] - p.capacity, 0.0), f"{key} state of charge at slot {t}")
            fam.check(max(ch[t] - p.p_ch_max, dis[t] - p.p_dis_max, 0.0), f"{key} power at slot {t}")
            fam.check(min(ch[t], dis[t]), f"{key} simultaneous charge/discharge at slot {t}")
        fam.check(abs(soc[-1] - p.q0), f"{key} cyclic end state")
    report.families["storage"] = fam.result()

    # comfort and thermal DR
    fam = _Family()
    temp = cfg.comfort.t_set
    for t in range(n):
        steady = (cfg.comfort.t_set - t_out[t]) * cfg.comfort.kf
        temp = room_temperature_step(temp, t_out[t], steady + s["th_shift"][t] - s["th_curtail"][t], cfg.comfort)
        lo, hi = comfort_band(t, cfg.comfort)
        fam.check(max(lo - temp, temp - hi, 0.0), f"comfort band at slot {t}")
        fam.check(abs(temp - s["room_temp"][t]), f"reported room temperature at slot {t}")
    if flags.demand_response_enabled:
        th = cfg.dr.thermal
        bounds = ThermalDrBounds(
            tuple(-th.shift_frac * load_h), tuple(th.shift_frac * load_h), tuple(th.curtail_frac * load_h)
        )
        ok = thermal_dr_feasible(s["th_shift"], s["th_curtail"], bounds)
        if not ok:
            fam.check(1.0, ok.violation or "thermal DR")
    else:
        fam.check(float(np.max(np.abs(s["dr_e"]), initial=0.0)), "electric DR without DR flag")
        fam.check(float(np.max(np.abs(s["th_shift"]) + np.abs(s["th_curtail"]), initial=0.0)), "thermal DR without DR flag")
    report.families["comfort"] = fam.result()

    # carbon identities
    fam = _Family()
    e_grid = cfg.carbon.f_grid * s["grid_buy"] * DT
    e_gt = cfg.gt.emission_factor * s["gt_gas"]
    e_gb = cfg.gb.emission_factor * s["gb_gas"]
    for t in range(n):
        fam.check(abs(e_grid[t] - s["e_grid"][t]), f"grid emissions at slot {t}")
        fam.check(abs(e_gt[t] + e_gb[t] - s["e_gt"][t] - s["e_gb"][t]), f"direct emissions at slot {t}")
        fam.check(abs(s["e_total"][t] - s["e_grid"][t] - s["e_gt"][t] - s["e_gb"][t]), f"emission total at slot {t}")
    ledger = settle(
        s["grid_buy"], s["gt_gas"], s["gb_gas"], s["gb_heat"], cfg.carbon,
        cfg.gt.emission_factor, cfg.gb.emission_factor, flags.carbon_trading_enabled,
    )
    scale = max(1.0, abs(ledger.actual))
    fam.check(abs(ledger.actual - sol.ledger.actual) / scale, "ledger actual emissions")
    fam.check(abs(ledger.quota - sol.ledger.quota) / scale, "ledger quota")
    fam.check(abs(ledger.cost - sol.ledger.cost) / max(1.0, abs(ledger.cost)), "ledger cost")
    fam.check(abs(sol.ledger.actual - s["e_total"].sum()) / scale, "ledger vs per-slot emissions")
    report.families["carbon"] = fam.result()

    fam = _Family()
    c = sol.costs
    total = c.energy_purchase + c.om + c.carbon
    fam.check(abs(total - c.total) / max(1.0, abs(total)), "cost decomposition")
    report.families["costs"] = fam.result()
    return report
