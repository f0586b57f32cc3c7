"""Independent reference computations used by the tests.

The toy dispatch oracle enumerates a 20-point grid of gas-turbine output per
slot; with grid purchase and boiler heat fixed by the two balances, each slot
has one degree of freedom. Instance data are multiples of the grid step so
every vertex of the LP lies on the grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ries_opt.core import HORIZON, TimeProfile, Unit, load_config, replace_path

GRID_POINTS = 20
STEP = 50.0  # kW of GT electric output between grid points
GT_ETA_E = 0.30
GT_ETA_H = 0.45  # heat = 1.5 x electric, so heat vertices sit on multiples of 75
GB_ETA = 0.90


@dataclass(frozen=True)
class ToyInstance:
    load_e: tuple[float, ...]
    load_h: tuple[float, ...]
    price: tuple[float, ...]
    gas_price: float
    grid_max: float
    gb_cap: float

    @property
    def n(self) -> int:
        return len(self.load_e)

    @property
    def gt_cap(self) -> float:
        return STEP * (GRID_POINTS - 1)


def _pad(values, fill=0.0):
    return tuple(list(values) + [fill] * (HORIZON - len(values)))


def toy_config(inst: ToyInstance):
    cfg = load_config()
    zeros = TimeProfile((0.0,) * HORIZON)
    prof = {
        "load_electric": TimeProfile(_pad(inst.load_e)),
        "load_thermal": TimeProfile(_pad(inst.load_h)),
        "wind_speed": TimeProfile((0.0,) * HORIZON, Unit.M_PER_S),
        "irradiance": TimeProfile((0.0,) * HORIZON, Unit.W_PER_M2),
        "cell_temperature": TimeProfile((25.0,) * HORIZON, Unit.CELSIUS),
        # digester set point reached without heating
        "outdoor_temperature": TimeProfile((cfg.biogas.digester.t_opt,) * HORIZON, Unit.CELSIUS),
        "straw": TimeProfile((0.0,) * HORIZON, Unit.KG),
        "garbage": TimeProfile((0.0,) * HORIZON, Unit.KG),
        "wastewater": TimeProfile((0.0,) * HORIZON, Unit.M3),
        "wet_garbage": TimeProfile((0.0,) * HORIZON, Unit.KG),
        "urban_load": zeros,
    }
    for k, v in prof.items():
        cfg = replace_path(cfg, f"profiles.{k}", v)
    edits = {
        "gt.capacity": inst.gt_cap,
        "gt.eta_e": GT_ETA_E,
        "gt.eta_h": GT_ETA_H,
        "gt.ramp_up": 1e6,
        "gt.ramp_down": 1e6,
        "gb.capacity": inst.gb_cap,
        "gb.eta_h": GB_ETA,
        "gb.fuel_a": 0.0,
        "gb.fuel_b": None,
        "gb.fuel_c": 0.0,
        "gb.min_output": 0.0,
        "gb.ramp_up": 1e6,
        "gb.ramp_down": 1e6,
        "eb.capacity": 0.0,
        "hp.capacity": 0.0,
        "storage.electric.capacity": 0.0,
        "storage.electric.p_ch_max": 0.0,
        "storage.electric.p_dis_max": 0.0,
        "storage.electric.q0": 0.0,
        "storage.thermal.capacity": 0.0,
        "storage.thermal.p_ch_max": 0.0,
        "storage.thermal.p_dis_max": 0.0,
        "storage.thermal.q0": 0.0,
        "network.thermal_loss_rate": 0.0,
        "network.grid_import_max": inst.grid_max,
        "gas.price": inst.gas_price,
        "tou.valley_price": 0.3,
        "tou.flat_price": 0.6,
        "tou.peak_price": 0.9,
    }
    for k, v in edits.items():
        cfg = replace_path(cfg, k, v)
    return cfg


def random_instance(rng: np.random.Generator) -> ToyInstance:
    n = int(rng.integers(1, 4))
    return ToyInstance(
        load_e=tuple(float(STEP * rng.integers(0, 30)) for _ in range(n)),
        load_h=tuple(float(75.0 * rng.integers(0, 30)) for _ in range(n)),
        price=tuple(float(round(rng.uniform(0.2, 1.2), 2)) for _ in range(n)),
        gas_price=float(round(rng.uniform(2.0, 4.5), 2)),
        grid_max=float(STEP * rng.integers(0, 25)),
        gb_cap=float(75.0 * rng.integers(0, 25)),
    )


def _slot_options(inst: ToyInstance, t: int, cfg) -> list[tuple[float, float, float, float]]:
    """Feasible (gt_e, grid, gb_heat, cost) points of slot ``t``; cost excludes the carbon term."""
    lhv = cfg.gas.lhv / 3.6
    om = cfg.om
    out = []
    for p in np.linspace(0.0, inst.gt_cap, GRID_POINTS):
        grid = inst.load_e[t] - p
        # surplus turbine heat is vented, so the boiler covers only the shortfall
        gb = max(inst.load_h[t] - GT_ETA_H / GT_ETA_E * p, 0.0)
        if grid < -1e-9 or grid > inst.grid_max + 1e-9 or gb > inst.gb_cap + 1e-9:
            continue
        grid, gb = max(grid, 0.0), max(gb, 0.0)
        gas = p / (GT_ETA_E * lhv) + gb / (GB_ETA * lhv)
        cost = inst.price[t] * grid + inst.gas_price * gas + om.gt * p + om.gb * gb
        out.append((p, grid, gb, cost))
    return out


def _emissions(p, grid, gb, cfg) -> float:
    lhv = cfg.gas.lhv / 3.6
    return (
        cfg.carbon.f_grid * grid
        + cfg.gt.emission_factor * p / (GT_ETA_E * lhv)
        + cfg.gb.emission_factor * gb / (GB_ETA * lhv)
    )


def tiered(e: float, beta: float, zeta: float, width: float) -> float:
    """Tiered cost by summing tier slices; shares no code with the package."""
    total, k = 0.0, 0
    while e > 0:
        piece = min(e, width) if k < 4 else e
        total += beta * (1 + k * zeta) * piece
        e -= piece
        k += 1
    return total


def brute_force(inst: ToyInstance, cfg, trading: bool = False) -> float | None:
    """Minimum total cost over the joint grid, or ``None`` when no grid point is feasible."""
    options = [_slot_options(inst, t, cfg) for t in range(inst.n)]
    if any(not o for o in options):
        return None
    m = cfg.carbon
    best = math.inf
    for combo in itertools.product(*options):
        base = sum(c[3] for c in combo)
        e = sum(_emissions(c[0], c[1], c[2], cfg) for c in combo)
        if trading:
            quota = m.lambda_e * sum(c[1] for c in combo) + m.lambda_g * sum(c[2] for c in combo)
            net = e - quota
            carbon = tiered(net, m.beta, m.zeta, m.tier_width) if net >= 0 else m.beta * net
        else:
            carbon = m.beta * e
        best = min(best, base + carbon)
    return best


def check_toy_solution(sol, inst: ToyInstance, tol: float = 1e-6) -> list[str]:
    """Feasibility of a dispatch result against the toy instance's own data."""
    s = sol.series
    errors = []
    for t in range(inst.n):
        gt_e, grid, gb = s["gt_e"][t], s["grid_buy"][t], s["gb_heat"][t]
        if abs(gt_e + grid - inst.load_e[t]) > tol * max(1.0, inst.load_e[t]):
            errors.append(f"electric balance slot {t}")
        vent = s["heat_vent"][t]
        if abs(GT_ETA_H / GT_ETA_E * gt_e + gb - vent - inst.load_h[t]) > tol * max(1.0, inst.load_h[t]):
            errors.append(f"heat balance slot {t}")
        if grid < -tol or grid > inst.grid_max + tol:
            errors.append(f"grid bound slot {t}")
        if vent < -tol:
            errors.append(f"negative vent slot {t}")
        if gb < -tol or gb > inst.gb_cap + tol:
            errors.append(f"boiler bound slot {t}")
        if gt_e < -tol or gt_e > inst.gt_cap + tol:
            errors.append(f"turbine bound slot {t}")
    return errors


def normal_quantile_bisect(p: float) -> float:
    """Quantile by bisection on erfc; slow but independent of the package."""
    if p > 0.5:
        # bisect on the upper tail so 1 - p keeps its precision
        return -normal_quantile_bisect(1.0 - p)
    lo, hi = -40.0, 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * math.erfc(-mid / math.sqrt(2.0)) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_root(f, lo: float, hi: float) -> float:
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def random_valid_config(rng: np.random.Generator, base):
    """Perturb the bundled config within ranges that keep the park feasible.

    Grid import is raised well above any perturbed load so every draw has a
    solution; everything else moves freely inside its physical range.
    """
    pr = base.profiles
    es, hs = rng.uniform(0.2, 1.2), rng.uniform(0.2, 1.2)
    cfg = replace_path(base, "profiles.load_electric", TimeProfile(tuple(es * pr.load_electric.array())))
    cfg = replace_path(cfg, "profiles.load_thermal", TimeProfile(tuple(hs * pr.load_thermal.array())))
    cfg = replace_path(
        cfg, "profiles.wind_speed", TimeProfile(tuple(rng.uniform(0.5, 1.5) * pr.wind_speed.array()), Unit.M_PER_S)
    )
    cfg = replace_path(
        cfg, "profiles.outdoor_temperature",
        TimeProfile(tuple(pr.outdoor_temperature.array() + rng.uniform(-5, 5)), Unit.CELSIUS),
    )
    ranges = {
        "gt.eta_e": (0.25, 0.40),
        "gt.eta_h": (0.38, 0.46),
        "gb.eta_h": (0.70, 0.95),
        "eb.eta": (0.90, 0.99),
        "pyrolysis.eta_pf": (0.6, 0.95),
        "pyrolysis.eta_pg": (0.6, 0.95),
        "carbon.f_grid": (0.1, 0.9),
        "carbon.lambda_e": (0.5, 0.9),
        "carbon.lambda_g": (0.2, 0.5),
        "carbon.beta": (0.1, 0.6),
        "carbon.zeta": (0.0, 0.5),
        "carbon.tier_width": (500.0, 5000.0),
        "network.thermal_loss_rate": (0.0, 0.1),
        "gas.price": (2.5, 4.5),
        "storage.electric.eta_ch": (0.8, 0.98),
        "storage.electric.eta_dis": (0.8, 0.98),
        "dr.thermal.shift_frac": (0.0, 0.15),
        "dr.thermal.curtail_frac": (0.0, 0.15),
        "dr.self_elasticity": (-0.4, 0.0),
        "dr.cross_elasticity": (0.0, 0.05),
        "renewables.confidence": (0.5, 0.99),
    }
    for path, (lo, hi) in ranges.items():
        cfg = replace_path(cfg, path, float(rng.uniform(lo, hi)))
    cfg = replace_path(cfg, "network.grid_import_max", 40000.0)
    cfg = replace_path(cfg, "gb.capacity", 20000.0)
    return cfg
