"""Assemble the park's day-ahead dispatch as a sparse linear program.

Column layout is recorded in :class:`LpInstance.vars` so the solution and the
independent verifier can address decisions by name. Per-slot blocks are
length ``horizon``; segment and tier blocks are ``(horizon, k)`` row-major.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import sparse

from ..biomass import biogas_yield, digester_heat_input, pyrolysis_fuel, syngas_energy, upgrade_biogas
from ..carbon import tier_lines
from ..core import DT, HORIZON, ScenarioFlags, SystemConfig, TouPriceSchedule
from ..demand_response import comfort_band, default_elasticity_matrix, pbdr_adjustment
from ..devices import gb_fuel_coefficients, gb_segments, pv_output, wind_output
from .normal import inverse_normal_cdf

TIE_EMISSION = 1e-6
TIE_STORAGE = 1e-7

PriceInput = Union[None, TouPriceSchedule, Sequence[float], np.ndarray]


class DispatchInfeasible(RuntimeError):
    """The park cannot be balanced; ``slot`` names the first offending slot if known."""

    def __init__(self, message: str, slot: Optional[int] = None, family: Optional[str] = None):
        super().__init__(message)
        self.slot = slot
        self.family = family


class DispatchUnbounded(RuntimeError):
    pass


@dataclass(frozen=True)
class ParkData:
    """Exogenous per-slot inputs derived from the configuration."""

    horizon: int
    prices: np.ndarray
    load_e: np.ndarray
    load_h: np.ndarray
    wind_forecast: np.ndarray
    pv_forecast: np.ndarray
    wind_cap: np.ndarray
    pv_cap: np.ndarray
    syngas: np.ndarray  # kWh fuel energy available to the CHP
    biogas_upgradable: np.ndarray  # Nm3 pipeline-grade gas available
    digester_heat: np.ndarray  # kW drawn from the heat network
    pbdr_delta: np.ndarray  # kW full-activation price-based load change
    t_out: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    gb_c: float
    gb_segments: tuple[tuple[float, float], ...]
    lhv_kwh: float


def price_vector(prices: PriceInput, cfg: SystemConfig) -> np.ndarray:
    if prices is None:
        return cfg.tou.prices()
    if isinstance(prices, TouPriceSchedule):
        return prices.prices()
    arr = np.asarray(prices, dtype=float)
    if arr.shape != (HORIZON,):
        raise ValueError(f"price vector must have {HORIZON} entries")
    return arr


def renewable_cap(forecast: np.ndarray, sigma: np.ndarray, confidence: float) -> np.ndarray:
    """Chance-constrained dispatch ceiling, floored at zero."""
    return np.maximum(forecast + sigma * inverse_normal_cdf(1.0 - confidence), 0.0)


def elasticity_matrix(cfg: SystemConfig) -> np.ndarray:
    if cfg.dr.elasticity_matrix is not None:
        return np.asarray(cfg.dr.elasticity_matrix, dtype=float)
    return default_elasticity_matrix(cfg.tou, cfg.dr.self_elasticity, cfg.dr.cross_elasticity)


def prepare_inputs(cfg: SystemConfig, prices: PriceInput = None, horizon: int = HORIZON) -> ParkData:
    if not 1 <= horizon <= HORIZON:
        raise ValueError(f"horizon must lie in 1..{HORIZON}")
    n = horizon
    pr = cfg.profiles
    price = price_vector(prices, cfg)
    wind_f = np.array([wind_output(v, cfg.wind) for v in pr.wind_speed.values])
    pv_f = np.array(
        [pv_output(g, tc, cfg.pv) for g, tc in zip(pr.irradiance.values, pr.cell_temperature.values)]
    )
    sf = cfg.renewables.sigma_fraction
    conf = cfg.renewables.confidence
    fuel = np.array([pyrolysis_fuel(s, g, cfg.pyrolysis) for s, g in zip(pr.straw.values, pr.garbage.values)])
    syngas = np.array([syngas_energy(m, cfg.chp.lhv_fuel, cfg.pyrolysis) for m in fuel])
    biogas = np.array(
        [biogas_yield(w, g, cfg.biogas) for w, g in zip(pr.wastewater.values, pr.wet_garbage.values)]
    )
    upg = np.array([upgrade_biogas(b, cfg.biogas) for b in biogas])
    t_out = pr.outdoor_temperature.array()
    dig = np.array(
        [digester_heat_input(max(cfg.biogas.digester.t_opt - t, 0.0), cfg.biogas) for t in t_out]
    )
    load_e = pr.load_electric.array()
    e = elasticity_matrix(cfg)
    if cfg.dr.reference_price is None:
        ref = cfg.tou.prices()
    else:
        ref = np.full(HORIZON, cfg.dr.reference_price)
    pbdr = pbdr_adjustment(load_e[:n], ref[:n], price[:n], e[:n, :n], cfg.dr.shares.transferable)
    bands = [comfort_band(t, cfg.comfort) for t in range(HORIZON)]
    lhv = cfg.gas_lhv_kwh
    _, _, c = gb_fuel_coefficients(cfg.gb, lhv)
    return ParkData(
        horizon=n,
        prices=price[:n],
        load_e=load_e[:n],
        load_h=pr.load_thermal.array()[:n],
        wind_forecast=wind_f[:n],
        pv_forecast=pv_f[:n],
        wind_cap=renewable_cap(wind_f, sf * wind_f, conf)[:n],
        pv_cap=renewable_cap(pv_f, sf * pv_f, conf)[:n],
        syngas=syngas[:n],
        biogas_upgradable=upg[:n],
        digester_heat=dig[:n],
        pbdr_delta=pbdr,
        t_out=t_out[:n],
        band_lo=np.array([b[0] for b in bands])[:n],
        band_hi=np.array([b[1] for b in bands])[:n],
        gb_c=c,
        gb_segments=tuple(gb_segments(cfg.gb, lhv)),
        lhv_kwh=lhv,
    )


class _Columns:
    def __init__(self) -> None:
        self.slices: dict[str, slice] = {}
        self.shapes: dict[str, tuple[int, ...]] = {}
        self.lb: list[np.ndarray] = []
        self.ub: list[np.ndarray] = []
        self.n = 0

    def add(self, name: str, shape: tuple[int, ...], lb, ub) -> np.ndarray:
        size = int(np.prod(shape))
        self.slices[name] = slice(self.n, self.n + size)
        self.shapes[name] = shape
        self.lb.append(np.broadcast_to(np.asarray(lb, dtype=float), shape).ravel().copy())
        self.ub.append(np.broadcast_to(np.asarray(ub, dtype=float), shape).ravel().copy())
        idx = np.arange(self.n, self.n + size).reshape(shape)
        self.n += size
        return idx


class _Rows:
    def __init__(self) -> None:
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.vals: list[float] = []
        self.rhs: list[float] = []
        self.names: list[str] = []

    def add(self, name: str, terms: list[tuple[int, float]], rhs: float) -> None:
        r = len(self.rhs)
        for col, val in terms:
            if val != 0.0:
                self.rows.append(r)
                self.cols.append(int(col))
                self.vals.append(float(val))
        self.rhs.append(float(rhs))
        self.names.append(name)

    def matrix(self, ncols: int) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(len(self.rhs), ncols)
        )


@dataclass
class LpInstance:
    cfg: SystemConfig
    flags: ScenarioFlags
    data: ParkData
    c: np.ndarray
    a_eq: sparse.csr_matrix
    b_eq: np.ndarray
    eq_names: list[str]
    a_ub: sparse.csr_matrix
    b_ub: np.ndarray
    ub_names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    vars: dict[str, slice]
    shapes: dict[str, tuple[int, ...]]
    objective_constant: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return self.data.horizon

    @property
    def n_vars(self) -> int:
        return len(self.c)

    def describe(self) -> dict:
        per_slot = sum(
            int(np.prod(s[1:])) for s in self.shapes.values() if s and s[0] == self.horizon and len(s) >= 1
        )
        scalars = self.n_vars - per_slot * self.horizon
        return {
            "horizon": self.horizon,
            "variables": self.n_vars,
            "per_slot_variables": per_slot,
            "scalar_variables": scalars,
            "equality_rows": len(self.b_eq),
            "inequality_rows": len(self.b_ub),
            "blocks": {k: list(v) for k, v in self.shapes.items()},
        }

    def unpack(self, x: np.ndarray) -> dict[str, np.ndarray]:
        return {k: np.asarray(x[s]).reshape(self.shapes[k]) for k, s in self.vars.items()}


def _precheck(cfg: SystemConfig, flags: ScenarioFlags, d: ParkData) -> None:
    """Cheap per-slot capacity screen so gross infeasibility names a slot."""
    lhv = d.lhv_kwh
    for t in range(d.horizon):
        chp_fuel = d.syngas[t] + lhv * min(cfg.chp.gas_max, d.biogas_upgradable[t])
        chp_e = min(cfg.chp.capacity * DT, cfg.chp.eta_e * chp_fuel)
        chp_h = chp_e * cfg.chp.eta_h / cfg.chp.eta_e
        supply_e = (
            d.wind_cap[t] + d.pv_cap[t] + chp_e + cfg.gt.capacity
            + cfg.network.grid_import_max + cfg.storage.electric.p_dis_max
        )
        relief_e = 0.0
        if flags.demand_response_enabled:
            sh = cfg.dr.shares
            relief_e = d.load_e[t] * (
                sh.reducible * sum(x.down_frac for x in cfg.dr.ibdr_tiers) + sh.replaceable
            ) + max(-d.pbdr_delta[t], 0.0)
        if d.load_e[t] - relief_e > supply_e + 1e-9:
            raise DispatchInfeasible(
                f"slot {t}: electric load {d.load_e[t]:.6g} kW exceeds available supply {supply_e:.6g} kW",
                slot=t, family="electric",
            )
        gt_h = cfg.gt.capacity * cfg.gt.eta_h / cfg.gt.eta_e
        heat = (1 - cfg.network.thermal_loss_rate) * (
            chp_h + gt_h + cfg.gb.capacity + cfg.eb.capacity + cfg.hp.cop * cfg.hp.capacity
        ) + cfg.storage.thermal.p_dis_max
        need = d.load_h[t] + d.digester_heat[t]
        if flags.demand_response_enabled:
            th = cfg.dr.thermal
            need -= d.load_h[t] * (th.shift_frac + th.curtail_frac) + cfg.dr.substitution_ratio * (
                cfg.dr.shares.replaceable * d.load_e[t]
            )
        if need > heat + 1e-9:
            raise DispatchInfeasible(
                f"slot {t}: heat demand {need:.6g} kW exceeds available supply {heat:.6g} kW",
                slot=t, family="thermal",
            )


def build_lp(
    cfg: SystemConfig,
    flags: ScenarioFlags,
    prices: PriceInput = None,
    horizon: int = HORIZON,
) -> LpInstance:
    d = prepare_inputs(cfg, prices, horizon)
    _precheck(cfg, flags, d)
    n = d.horizon
    lhv = d.lhv_kwh
    cols = _Columns()
    eq, ub = _Rows(), _Rows()
    inf = np.inf

    wind = cols.add("wind", (n,), 0.0, d.wind_cap)
    pv = cols.add("pv", (n,), 0.0, d.pv_cap)
    chp_syn = cols.add("chp_syngas", (n,), 0.0, d.syngas)
    chp_bio = cols.add("chp_biogas", (n,), 0.0, cfg.chp.gas_max)
    gt_gas = cols.add("gt_gas", (n,), 0.0, cfg.gt.capacity * DT / (cfg.gt.eta_e * lhv))
    widths = np.array([w for w, _ in d.gb_segments])
    slopes = np.array([s for _, s in d.gb_segments])
    k_seg = len(widths)
    gb_seg = cols.add("gb_seg", (n, k_seg), 0.0, np.broadcast_to(widths, (n, k_seg)))
    eb_in = cols.add("eb_in", (n,), 0.0, cfg.eb.capacity / cfg.eb.eta)
    hp_in = cols.add("hp_in", (n,), 0.0, cfg.hp.capacity)
    grid = cols.add("grid_buy", (n,), 0.0, cfg.network.grid_import_max)
    gas_buy = cols.add("gas_buy", (n,), 0.0, inf)
    upg = cols.add("b2g_gas", (n,), 0.0, d.biogas_upgradable)
    es, ts = cfg.storage.electric, cfg.storage.thermal
    es_ch = cols.add("es_ch", (n,), 0.0, es.p_ch_max)
    es_dis = cols.add("es_dis", (n,), 0.0, es.p_dis_max)
    # cyclic storage: terminal content pinned to the initial content
    es_q = cols.add("es_soc", (n,), np.r_[np.zeros(n - 1), es.q0], np.r_[np.full(n - 1, es.capacity), es.q0])
    ts_ch = cols.add("ts_ch", (n,), 0.0, ts.p_ch_max)
    ts_dis = cols.add("ts_dis", (n,), 0.0, ts.p_dis_max)
    ts_q = cols.add("ts_soc", (n,), np.r_[np.zeros(n - 1), ts.q0], np.r_[np.full(n - 1, ts.capacity), ts.q0])
    # heat rejected to ambient; without it surplus co-generated heat could only
    # be destroyed by cycling the thermal store. Capped at CHP + GT heat so boiler
    # heat cannot be burned for quota credit and thrown away.
    vent = cols.add("heat_vent", (n,), 0.0, inf)
    e_buy = cols.add("e_buy", (n,), 0.0, inf)
    e_gt = cols.add("e_gt", (n,), 0.0, inf)
    e_gb = cols.add("e_gb", (n,), 0.0, inf)
    e_tot = cols.add("e_total", (n,), 0.0, inf)

    dr_on = flags.demand_response_enabled
    tiers = cfg.dr.ibdr_tiers
    if dr_on:
        sh = cfg.dr.shares
        reducible = sh.reducible * d.load_e
        u_pb = cols.add("pbdr_u", (), 0.0, 1.0)
        ib_up = cols.add(
            "ibdr_up", (n, len(tiers)), 0.0,
            np.outer(reducible, [x.up_frac for x in tiers]),
        )
        ib_dn = cols.add(
            "ibdr_down", (n, len(tiers)), 0.0,
            np.outer(reducible, [x.down_frac for x in tiers]),
        )
        sub_cap = sh.replaceable * d.load_e
        sub_p = cols.add("sub_to_elec", (n,), 0.0, sub_cap)
        sub_m = cols.add("sub_to_heat", (n,), 0.0, sub_cap)
        th = cfg.dr.thermal
        shift = cols.add("th_shift", (n,), -th.shift_frac * d.load_h, th.shift_frac * d.load_h)
        cut = cols.add("th_curtail", (n,), 0.0, th.curtail_frac * d.load_h)
        dtemp = cols.add(
            "room_dT", (n,), d.band_lo - cfg.comfort.t_set, d.band_hi - cfg.comfort.t_set
        )

    trading = flags.carbon_trading_enabled
    if trading:
        x_plus = cols.add("carbon_excess", (), 0.0, inf)
        x_minus = cols.add("carbon_surplus", (), 0.0, inf)
        cet = cols.add("carbon_cost", (), -inf, inf)

    chp, gt, gb, eb, hp = cfg.chp, cfg.gt, cfg.gb, cfg.eb, cfg.hp
    loss = cfg.network.thermal_loss_rate
    b2g = cfg.biogas.b2g_kwh_per_nm3
    ratio = cfg.dr.substitution_ratio

    for t in range(n):
        chp_fuel = [(chp_syn[t], 1.0), (chp_bio[t], lhv)]
        # electric balance
        terms = [(wind[t], 1.0), (pv[t], 1.0), (grid[t], 1.0), (es_dis[t], 1.0), (es_ch[t], -1.0),
                 (eb_in[t], -1.0), (hp_in[t], -1.0), (upg[t], -b2g), (gt_gas[t], gt.eta_e * lhv)]
        terms += [(col, chp.eta_e * w) for col, w in chp_fuel]
        if dr_on:
            terms.append((int(u_pb), -d.pbdr_delta[t]))
            terms += [(c, -1.0) for c in ib_up[t]] + [(c, 1.0) for c in ib_dn[t]]
            terms += [(sub_p[t], -1.0), (sub_m[t], 1.0)]
        eq.add(f"balance_e[{t}]", terms, d.load_e[t])
        # thermal balance; network losses apply to generated heat
        g = 1.0 - loss
        terms = [(gt_gas[t], g * gt.eta_h * lhv), (eb_in[t], g * eb.eta), (hp_in[t], g * hp.cop),
                 (ts_dis[t], 1.0), (ts_ch[t], -1.0), (vent[t], -1.0)]
        terms += [(col, g * chp.eta_h * w) for col, w in chp_fuel]
        terms += [(c, g) for c in gb_seg[t]]
        if dr_on:
            terms += [(shift[t], -1.0), (cut[t], 1.0), (sub_p[t], ratio), (sub_m[t], -ratio)]
        eq.add(f"balance_h[{t}]", terms, d.load_h[t] + d.digester_heat[t])
        # gas balance (Nm3)
        terms = [(gas_buy[t], 1.0), (upg[t], 1.0), (gt_gas[t], -1.0), (chp_bio[t], -1.0)]
        terms += [(c, -s) for c, s in zip(gb_seg[t], slopes)]
        eq.add(f"balance_g[{t}]", terms, d.gb_c * DT)
        # storage recursion
        for name, q, ch, dis, p in (("es", es_q, es_ch, es_dis, es), ("ts", ts_q, ts_ch, ts_dis, ts)):
            terms = [(q[t], 1.0), (ch[t], -p.eta_ch * DT), (dis[t], DT / p.eta_dis)]
            if t > 0:
                terms.append((q[t - 1], -1.0))
            eq.add(f"{name}_soc[{t}]", terms, p.q0 if t == 0 else 0.0)
        # emission bookkeeping
        eq.add(f"e_buy[{t}]", [(e_buy[t], 1.0), (grid[t], -cfg.carbon.f_grid * DT)], 0.0)
        eq.add(f"e_gt[{t}]", [(e_gt[t], 1.0), (gt_gas[t], -gt.emission_factor)], 0.0)
        eq.add(
            f"e_gb[{t}]",
            [(e_gb[t], 1.0)] + [(c, -gb.emission_factor * s) for c, s in zip(gb_seg[t], slopes)],
            gb.emission_factor * d.gb_c * DT,
        )
        eq.add(f"e_total[{t}]", [(e_tot[t], 1.0), (e_buy[t], -1.0), (e_gt[t], -1.0), (e_gb[t], -1.0)], 0.0)
        # the CHP burns upgraded biogas only, never purchased gas
        ub.add(f"chp_biogas[{t}]", [(chp_bio[t], 1.0), (upg[t], -1.0)], 0.0)
        ub.add(
            f"vent_cap[{t}]",
            [(vent[t], 1.0), (gt_gas[t], -g * gt.eta_h * lhv)] + [(col, -g * chp.eta_h * w) for col, w in chp_fuel],
            0.0,
        )
        # CHP electric rating
        ub.add(f"chp_cap[{t}]", [(col, chp.eta_e * w) for col, w in chp_fuel], chp.capacity * DT)
        if gb.min_output > 0:
            ub.add(f"gb_min[{t}]", [(c, -1.0) for c in gb_seg[t]], -gb.min_output)
        # ramps
        if t > 0:
            ramp_blocks = (
                ("chp", [(c, chp.eta_e * w) for c, w in chp_fuel],
                 [(chp_syn[t - 1], chp.eta_e), (chp_bio[t - 1], chp.eta_e * lhv)], chp),
                ("gt", [(gt_gas[t], gt.eta_e * lhv)], [(gt_gas[t - 1], gt.eta_e * lhv)], gt),
                ("gb", [(c, 1.0) for c in gb_seg[t]], [(c, 1.0) for c in gb_seg[t - 1]], gb),
            )
            for name, now, prev, p in ramp_blocks:
                up = now + [(c, -v) for c, v in prev]
                ub.add(f"ramp_up_{name}[{t}]", up, p.ramp_up * DT)
                ub.add(f"ramp_down_{name}[{t}]", [(c, -v) for c, v in up], p.ramp_down * DT)
        if dr_on:
            a = 1.0 - DT * cfg.comfort.kf / cfg.comfort.heat_capacity
            terms = [(dtemp[t], 1.0), (shift[t], -DT / cfg.comfort.heat_capacity),
                     (cut[t], DT / cfg.comfort.heat_capacity)]
            if t > 0:
                terms.append((dtemp[t - 1], -a))
            eq.add(f"room[{t}]", terms, 0.0)

    if dr_on:
        eq.add("shift_sum", [(c, 1.0) for c in shift], 0.0)

    m = cfg.carbon
    if trading:
        terms = [(c, 1.0) for c in e_tot] + [(c, -m.lambda_e * DT) for c in grid]
        terms += [(c, -m.lambda_g * DT) for c in gb_seg.ravel()]
        terms += [(int(x_plus), -1.0), (int(x_minus), 1.0)]
        eq.add("quota", terms, 0.0)
        for k, (slope, icpt) in enumerate(tier_lines(m)):
            ub.add(f"tier[{k}]", [(int(x_plus), slope), (int(cet), -1.0)], -icpt)

    # objective
    c = np.zeros(cols.n)
    om = cfg.om
    c[grid] += d.prices * DT
    c[gas_buy] += cfg.gas.price
    c[wind] += om.wind * DT
    c[pv] += om.pv * DT
    c[chp_syn] += om.chp * chp.eta_e
    c[chp_bio] += om.chp * chp.eta_e * lhv
    c[gt_gas] += om.gt * gt.eta_e * lhv
    c[gb_seg] += om.gb * DT
    c[eb_in] += om.eb * eb.eta * DT
    c[hp_in] += om.hp * hp.cop * DT
    for ch, dis, rate in ((es_ch, es_dis, om.storage_e), (ts_ch, ts_dis, om.storage_t)):
        c[ch] += rate * DT + TIE_STORAGE
        c[dis] += rate * DT + TIE_STORAGE
    c[upg] += om.b2g
    c[vent] += TIE_STORAGE
    if dr_on:
        c[ib_up] += np.array([x.price for x in tiers]) * DT
        c[ib_dn] += np.array([x.price for x in tiers]) * DT
        c[sub_p] += cfg.dr.substitution_price * DT
        c[sub_m] += cfg.dr.substitution_price * DT
        c[cut] += cfg.dr.thermal.curtail_price * DT
    if trading:
        c[cet] += 1.0
        if m.surplus_credit == "flat_beta":
            c[x_minus] -= m.beta
    elif m.baseline_pricing == "flat_beta":
        c[e_tot] += m.beta
    c[e_tot] += TIE_EMISSION
    c[grid] += TIE_EMISSION

    return LpInstance(
        cfg=cfg,
        flags=flags,
        data=d,
        c=c,
        a_eq=eq.matrix(cols.n),
        b_eq=np.array(eq.rhs),
        eq_names=eq.names,
        a_ub=ub.matrix(cols.n),
        b_ub=np.array(ub.rhs),
        ub_names=ub.names,
        lb=np.concatenate(cols.lb),
        ub=np.concatenate(cols.ub),
        vars=cols.slices,
        shapes=cols.shapes,
    )
