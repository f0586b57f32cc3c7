"""Shared domain types, configuration schema and loading for the RIES toolkit.

Conventions used everywhere in the package:

* horizon of 24 hourly slots, slot 0 = 00:00-01:00, ``DT`` = 1 h
* power in kW, energy in kWh, gas in Nm3, money in yuan, emissions in kgCO2
* configuration is a YAML document with nested sections; 24-slot series are
  referenced as ``slot,value`` CSV files relative to the YAML file
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import io
import math
import typing
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

HORIZON = 24
DT = 1.0  # h


class ConfigError(ValueError):
    """Raised when a configuration file cannot be parsed or validated."""


class Unit(str, Enum):
    KW = "kW"
    KWH = "kWh"
    NM3 = "Nm3"
    CELSIUS = "degC"
    YUAN_PER_KWH = "yuan/kWh"
    KG_CO2 = "kgCO2"
    M_PER_S = "m/s"
    W_PER_M2 = "W/m2"
    KG = "kg"
    M3 = "m3"


@dataclass(frozen=True)
class TimeProfile:
    """A 24-slot hourly series in a declared unit."""

    values: tuple[float, ...]
    unit: Unit = Unit.KW

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "unit", Unit(self.unit))
        if len(vals) != HORIZON:
            raise ConfigError(f"profile must have exactly {HORIZON} entries, got {len(vals)}")
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("profile entries must be finite")
        if self.unit is not Unit.CELSIUS and min(vals) < 0:
            raise ConfigError(f"profile in {self.unit.value} must be non-negative")

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)


class Period(str, Enum):
    VALLEY = "Valley"
    FLAT = "Flat"
    PEAK = "Peak"


@dataclass(frozen=True)
class TouPriceSchedule:
    valley_price: float = 0.2988
    flat_price: float = 0.5855
    peak_price: float = 0.8882
    period_map: tuple[Period, ...] = tuple(
        Period(p)
        for p in ["Valley"] * 7 + ["Flat"] * 3 + ["Peak"] * 5 + ["Flat"] * 3
        + ["Peak"] * 3 + ["Flat"] * 2 + ["Valley"]
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "period_map", tuple(Period(p) for p in self.period_map))

    def price_of(self, period: Period) -> float:
        return {
            Period.VALLEY: self.valley_price,
            Period.FLAT: self.flat_price,
            Period.PEAK: self.peak_price,
        }[period]

    def prices(self) -> np.ndarray:
        return np.array([self.price_of(p) for p in self.period_map])


def period_of(slot: int, schedule: TouPriceSchedule) -> Period:
    if not 0 <= slot < HORIZON:
        raise ValueError(f"slot {slot} outside 0..{HORIZON - 1}")
    return schedule.period_map[slot]


@dataclass(frozen=True)
class ScenarioFlags:
    carbon_trading_enabled: bool = False
    demand_response_enabled: bool = False

    @classmethod
    def from_scenario(cls, number: int) -> "ScenarioFlags":
        table = {
            1: cls(False, False),
            2: cls(False, True),
            3: cls(True, False),
            4: cls(True, True),
        }
        if number not in table:
            raise ValueError(f"scenario must be 1..4, got {number}")
        return table[number]

    @property
    def scenario(self) -> int:
        return 1 + int(self.demand_response_enabled) + 2 * int(self.carbon_trading_enabled)


# --------------------------------------------------------------------------
# device and subsystem parameter bundles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WindParams:
    v_in: float = 3.0
    v_star: float = 12.0
    v_out: float = 25.0
    p_star: float = 3000.0


@dataclass(frozen=True)
class PvParams:
    p_max: float = 2500.0
    g_nominal: float = 1000.0
    temp_coeff: float = -0.0045
    t_ref: float = 25.0


@dataclass(frozen=True)
class ChpParams:
    capacity: float = 4000.0
    eta_e: float = 0.30
    eta_h: float = 0.50
    lhv_fuel: float = 15.0  # MJ/kg pyrolysis fuel
    gas_max: float = 600.0  # Nm3/h biogas fed to the CHP
    ramp_up: float = 2000.0
    ramp_down: float = 2000.0


@dataclass(frozen=True)
class GtParams:
    capacity: float = 4000.0
    eta_e: float = 0.29
    eta_h: float = 0.42
    emission_factor: float = 2.162  # kgCO2/Nm3
    ramp_up: float = 2000.0
    ramp_down: float = 2000.0


@dataclass(frozen=True)
class GbParams:
    capacity: float = 1000.0
    eta_h: float = 0.88
    min_output: float = 0.0
    fuel_a: float = 0.0
    fuel_b: Optional[float] = None  # None -> 1/(eta_h * LHV)
    fuel_c: float = 0.0
    emission_factor: float = 2.162  # kgCO2/Nm3
    ramp_up: float = 1000.0
    ramp_down: float = 1000.0
    segments: int = 8


@dataclass(frozen=True)
class EbParams:
    capacity: float = 400.0  # thermal kW
    eta: float = 0.95


@dataclass(frozen=True)
class HpParams:
    capacity: float = 400.0  # electric kW
    cop: float = 3.0


@dataclass(frozen=True)
class P2gParams:
    capacity: float = 0.0
    specific_consumption: float = 0.0


@dataclass(frozen=True)
class StorageParams:
    capacity: float = 2000.0
    eta_ch: float = 0.90
    eta_dis: float = 0.90
    p_ch_max: float = 500.0
    p_dis_max: float = 500.0
    q0: float = 1000.0


@dataclass(frozen=True)
class StorageFleet:
    electric: StorageParams = StorageParams()
    thermal: StorageParams = StorageParams(
        capacity=3000.0, eta_ch=0.85, eta_dis=0.85, p_ch_max=750.0, p_dis_max=750.0, q0=1500.0
    )


@dataclass(frozen=True)
class PyrolysisParams:
    beta_straw: float = 0.80
    beta_garbage: float = 0.60
    beta_straw_r2f: float = 0.75
    beta_garbage_r2f: float = 0.70
    eta_pf: float = 0.82
    eta_pg: float = 0.85


@dataclass(frozen=True)
class DigesterParams:
    area: float = 2000.0  # m2
    alpha1: float = 8.7  # W/(m2 K)
    alpha2: float = 23.0
    phi1: float = 0.24  # m
    phi2: float = 0.10
    theta1: float = 0.81  # W/(m K)
    theta2: float = 0.04
    eta_eq: float = 0.95
    eta_thermal: float = 0.90
    t_opt: float = 35.0


@dataclass(frozen=True)
class BiogasParams:
    beta_st: float = 0.02
    eta_ab: float = 0.70
    beta_sludge: float = 0.80
    rho_sludge: float = 1050.0
    beta_bg: float = 0.05
    eta_b2g: float = 0.90
    b2g_kwh_per_nm3: float = 0.2
    digester: DigesterParams = DigesterParams()


@dataclass(frozen=True)
class GasParams:
    price: float = 3.45  # yuan/Nm3
    lhv: float = 35.486  # MJ/Nm3


@dataclass(frozen=True)
class NetworkParams:
    thermal_loss_rate: float = 0.05
    grid_import_max: float = 12000.0


@dataclass(frozen=True)
class RenewableParams:
    confidence: float = 0.9
    sigma_fraction: float = 0.10


@dataclass(frozen=True)
class CarbonMarketParams:
    beta: float = 0.3
    zeta: float = 0.25
    tier_width: float = 2000.0
    lambda_e: float = 0.728
    lambda_g: float = 0.367
    f_grid: float = 0.42
    surplus_credit: str = "flat_beta"
    baseline_pricing: str = "flat_beta"


@dataclass(frozen=True)
class OmCosts:
    wind: float = 0.005
    pv: float = 0.005
    chp: float = 0.02
    gt: float = 0.02
    gb: float = 0.01
    eb: float = 0.005
    hp: float = 0.008
    storage_e: float = 0.01
    storage_t: float = 0.005
    b2g: float = 0.05  # per Nm3 upgraded


@dataclass(frozen=True)
class DrShares:
    fixed: float = 0.40
    transferable: float = 0.35
    reducible: float = 0.20
    replaceable: float = 0.05


@dataclass(frozen=True)
class IbdrTier:
    price: float
    up_frac: float
    down_frac: float


@dataclass(frozen=True)
class ThermalDrParams:
    shift_frac: float = 0.10
    curtail_frac: float = 0.10
    curtail_price: float = 0.05


@dataclass(frozen=True)
class DrParams:
    shares: DrShares = DrShares()
    reference_price: Optional[float] = None  # None -> the standing TOU tariff
    self_elasticity: float = -0.2
    cross_elasticity: float = 0.03
    elasticity_matrix: Optional[tuple[tuple[float, ...], ...]] = None
    ibdr_contract: float = 0.0
    ibdr_tiers: tuple[IbdrTier, ...] = (
        IbdrTier(0.30, 0.0, 0.25),
        IbdrTier(0.50, 0.0, 0.25),
        IbdrTier(0.80, 0.0, 0.50),
    )
    substitution_ratio: float = 1.0
    substitution_price: float = 0.02
    thermal: ThermalDrParams = ThermalDrParams()


@dataclass(frozen=True)
class ComfortParams:
    t_s: float = 33.5
    metabolic: float = 80.0
    clothing: float = 0.11
    kf: float = 40.0  # kW/degC
    alpha_air: float = 1.005  # kJ/(kg degC)
    rho_air: float = 1.2  # kg/m3
    volume: float = 600000.0  # m3
    t_set: float = 22.0

    @property
    def heat_capacity(self) -> float:
        """Room air heat capacity in kWh/degC."""
        return self.alpha_air * self.rho_air * self.volume / 3600.0


@dataclass(frozen=True)
class CoalUnit:
    a: float
    b: float
    c: float
    capacity: float
    emission_factor: float


@dataclass(frozen=True)
class GasUnit:
    q: float
    capacity: float
    emission_factor: float


@dataclass(frozen=True)
class GridParams:
    coal_units: tuple[CoalUnit, ...] = (
        CoalUnit(2.0e-6, 0.24, 300.0, 30000.0, 0.95),
        CoalUnit(4.0e-6, 0.27, 200.0, 20000.0, 0.98),
    )
    gas_units: tuple[GasUnit, ...] = (GasUnit(0.55, 25000.0, 0.40),)
    coal_cost_scale: float = 1.0
    curtailment_penalty: float = 0.30
    carbon_price: float = 0.3
    price_floor: float = 0.2
    price_cap: float = 1.2


@dataclass(frozen=True)
class GaConfig:
    population: int = 20
    generations: int = 50
    mutation_rate: float = 0.2
    crossover_rate: float = 0.8
    tolerance: float = 1e-6
    patience: int = 10
    seed: int = 42


@dataclass(frozen=True)
class Profiles:
    load_electric: TimeProfile
    load_thermal: TimeProfile
    wind_speed: TimeProfile
    irradiance: TimeProfile
    cell_temperature: TimeProfile
    outdoor_temperature: TimeProfile
    straw: TimeProfile
    garbage: TimeProfile
    wastewater: TimeProfile
    wet_garbage: TimeProfile
    urban_load: TimeProfile


PROFILE_UNITS = {
    "load_electric": Unit.KW,
    "load_thermal": Unit.KW,
    "wind_speed": Unit.M_PER_S,
    "irradiance": Unit.W_PER_M2,
    "cell_temperature": Unit.CELSIUS,
    "outdoor_temperature": Unit.CELSIUS,
    "straw": Unit.KG,
    "garbage": Unit.KG,
    "wastewater": Unit.M3,
    "wet_garbage": Unit.KG,
    "urban_load": Unit.KW,
}


@dataclass(frozen=True)
class SystemConfig:
    profiles: Profiles
    seed: int = 42
    tou: TouPriceSchedule = TouPriceSchedule()
    gas: GasParams = GasParams()
    wind: WindParams = WindParams()
    pv: PvParams = PvParams()
    chp: ChpParams = ChpParams()
    gt: GtParams = GtParams()
    gb: GbParams = GbParams()
    eb: EbParams = EbParams()
    hp: HpParams = HpParams()
    p2g: P2gParams = P2gParams()
    storage: StorageFleet = StorageFleet()
    pyrolysis: PyrolysisParams = PyrolysisParams()
    biogas: BiogasParams = BiogasParams()
    network: NetworkParams = NetworkParams()
    renewables: RenewableParams = RenewableParams()
    carbon: CarbonMarketParams = CarbonMarketParams()
    om: OmCosts = OmCosts()
    dr: DrParams = DrParams()
    comfort: ComfortParams = ComfortParams()
    grid: GridParams = GridParams()
    ga: GaConfig = GaConfig()

    @property
    def gas_lhv_kwh(self) -> float:
        return self.gas.lhv / 3.6

    def with_value(self, path: str, value: Any) -> "SystemConfig":
        """Return a copy with the dotted field ``path`` replaced by ``value``."""
        return replace_path(self, path, value)


def replace_path(obj: Any, path: str, value: Any) -> Any:
    head, _, rest = path.partition(".")
    if not dataclasses.is_dataclass(obj) or head not in {f.name for f in dataclasses.fields(obj)}:
        raise KeyError(f"unknown config field {path!r}")
    if rest:
        value = replace_path(getattr(obj, head), rest, value)
    return dataclasses.replace(obj, **{head: value})


def get_path(obj: Any, path: str) -> Any:
    for part in path.split("."):
        obj = getattr(obj, part)
    return obj


# --------------------------------------------------------------------------
# CSV profiles
# --------------------------------------------------------------------------


def read_profile_csv(path: str | Path, unit: Unit = Unit.KW) -> TimeProfile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read profile {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["slot", "value"]:
        raise ConfigError(f"{path}: header must be 'slot,value'")
    data = [r for r in rows[1:] if r]
    if len(data) != HORIZON:
        raise ConfigError(f"{path}: expected {HORIZON} data rows, got {len(data)}")
    values = []
    for i, row in enumerate(data):
        try:
            slot, value = int(row[0]), float(row[1])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"{path}: malformed row {i + 2}") from exc
        if slot != i:
            raise ConfigError(f"{path}: slots must run 0..23 in order (row {i + 2})")
        values.append(value)
    return TimeProfile(tuple(values), unit)


def write_profile_csv(path: str | Path, values: typing.Iterable[float]) -> None:
    lines = ["slot,value"]
    lines += [f"{i},{float(v)!r}" for i, v in enumerate(values)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_table_csv(path: str | Path, header: typing.Sequence[str], rows: typing.Iterable[typing.Sequence[Any]]) -> None:
    """Write a header plus rows; floats keep full precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue())


def read_table_csv(path: str | Path) -> dict[str, list]:
    """Columns of a headed CSV; cells that parse as numbers come back as floats."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from exc
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ConfigError(f"{path}: empty table")
    header = rows[0]
    cols: dict[str, list] = {h: [] for h in header}
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ConfigError(f"{path}: row {i} has {len(row)} cells, header has {len(header)}")
        for h, cell in zip(header, row):
            try:
                cols[h].append(float(cell))
            except ValueError:
                cols[h].append(cell)
    return cols


def read_matrix_csv(path: str | Path) -> tuple[tuple[float, ...], ...]:
    try:
        arr = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read matrix {path}: {exc}") from exc
    if arr.shape != (HORIZON, HORIZON):
        raise ConfigError(f"{path}: elasticity matrix must be {HORIZON}x{HORIZON}")
    return tuple(tuple(float(x) for x in row) for row in arr)


# --------------------------------------------------------------------------
# dict <-> dataclass conversion
# --------------------------------------------------------------------------


def _convert(tp: Any, data: Any, where: str) -> Any:
    origin = typing.get_origin(tp)
    if origin is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        return None if data is None else _convert(args[0], data, where)
    if dataclasses.is_dataclass(tp):
        if not isinstance(data, dict):
            raise ConfigError(f"{where}: expected a mapping")
        return _build(tp, data, where)
    if origin is tuple:
        args = typing.get_args(tp)
        if not isinstance(data, (list, tuple)):
            raise ConfigError(f"{where}: expected a list")
        return tuple(_convert(args[0], x, f"{where}[{i}]") for i, x in enumerate(data))
    if isinstance(tp, type) and issubclass(tp, Enum):
        try:
            return tp(data)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    if tp is bool:
        if not isinstance(data, bool):
            raise ConfigError(f"{where}: expected true/false")
        return data
    if tp in (int, float):
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {data!r}")
        if tp is int and float(data) != int(data):
            raise ConfigError(f"{where}: expected an integer")
        return tp(data)
    if tp is str:
        return str(data)
    return data


def _build(cls: type, data: dict, where: str) -> Any:
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where or 'config'}: unknown keys {sorted(unknown)}")
    kwargs = {
        k: _convert(hints[k], v, f"{where}.{k}" if where else k) for k, v in data.items()
    }
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where or 'config'}: {exc}") from exc


def _to_plain(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, tuple):
        return [_to_plain(x) for x in obj]
    return obj


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _bundled_dir() -> Path:
    return Path(str(resources.files("ries_opt") / "data"))


def default_config_path() -> Path:
    return _bundled_dir() / "default.yaml"


def _read_yaml(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def _resolve_paths(doc: dict, base: Path) -> dict:
    doc = copy.deepcopy(doc)
    profiles = doc.get("profiles")
    if isinstance(profiles, dict):
        for key, value in profiles.items():
            if isinstance(value, str):
                profiles[key] = str((base / value).resolve())
    dr = doc.get("dr")
    if isinstance(dr, dict) and isinstance(dr.get("elasticity_matrix"), str):
        dr["elasticity_matrix"] = str((base / dr["elasticity_matrix"]).resolve())
    return doc


def load_config(path: str | Path | None = None) -> SystemConfig:
    """Load, default-fill and validate a configuration file.

    Keys omitted from ``path`` fall back to the bundled default dataset.
    ``path=None`` loads the bundled default itself.
    """
    default = default_config_path()
    merged = _resolve_paths(_read_yaml(default), default.parent)
    if path is not None:
        path = Path(path)
        merged = _deep_merge(merged, _resolve_paths(_read_yaml(path), path.parent))
    return config_from_dict(merged)


def config_from_dict(doc: dict) -> SystemConfig:
    doc = copy.deepcopy(doc)
    raw_profiles = doc.pop("profiles", None)
    if not isinstance(raw_profiles, dict):
        raise ConfigError("profiles: expected a mapping of name -> CSV path")
    missing = set(PROFILE_UNITS) - set(raw_profiles)
    if missing:
        raise ConfigError(f"profiles: missing {sorted(missing)}")
    unknown = set(raw_profiles) - set(PROFILE_UNITS)
    if unknown:
        raise ConfigError(f"profiles: unknown keys {sorted(unknown)}")
    profiles = {}
    for name, ref in raw_profiles.items():
        if isinstance(ref, str):
            profiles[name] = read_profile_csv(ref, PROFILE_UNITS[name])
        elif isinstance(ref, (list, tuple)):
            profiles[name] = TimeProfile(tuple(ref), PROFILE_UNITS[name])
        else:
            raise ConfigError(f"profiles.{name}: expected a CSV path")
    dr = doc.get("dr")
    if isinstance(dr, dict) and isinstance(dr.get("elasticity_matrix"), str):
        dr["elasticity_matrix"] = read_matrix_csv(dr["elasticity_matrix"])
    hints = typing.get_type_hints(SystemConfig)
    unknown_top = set(doc) - {f.name for f in dataclasses.fields(SystemConfig)}
    if unknown_top:
        raise ConfigError(f"config: unknown keys {sorted(unknown_top)}")
    kwargs = {k: _convert(hints[k], v, k) for k, v in doc.items()}
    cfg = SystemConfig(profiles=Profiles(**profiles), **kwargs)
    validate(cfg)
    return cfg


def dump_config(cfg: SystemConfig, directory: str | Path, name: str = "config.yaml") -> Path:
    """Write ``cfg`` as YAML plus one CSV per profile; returns the YAML path."""
    directory = Path(directory)
    (directory / "profiles").mkdir(parents=True, exist_ok=True)
    doc = _to_plain(cfg)
    refs = {}
    for f in dataclasses.fields(Profiles):
        rel = f"profiles/{f.name}.csv"
        write_profile_csv(directory / rel, getattr(cfg.profiles, f.name).values)
        refs[f.name] = rel
    doc["profiles"] = refs
    out = directory / name
    out.write_text(yaml.safe_dump(doc, sort_keys=False))
    return out


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _fraction(value: float, name: str) -> None:
    _check(0.0 < value <= 1.0, f"{name} must lie in (0, 1], got {value}")


def validate(cfg: SystemConfig) -> None:
    """Raise :class:`ConfigError` naming the first violated invariant."""
    tou = cfg.tou
    _check(len(tou.period_map) == HORIZON, "tou.period_map must have 24 entries")
    _check(
        0 < tou.valley_price <= tou.flat_price <= tou.peak_price,
        "tou prices must satisfy 0 < valley <= flat <= peak",
    )
    shares = cfg.dr.shares
    total = shares.fixed + shares.transferable + shares.reducible + shares.replaceable
    _check(abs(total - 1.0) <= 1e-9, f"dr.shares must sum to 1.0 (got {total:.6g})")
    _check(
        min(shares.fixed, shares.transferable, shares.reducible, shares.replaceable) >= 0,
        "dr.shares must be non-negative",
    )
    for name in (
        "chp.eta_e", "chp.eta_h", "gt.eta_e", "gt.eta_h", "gb.eta_h", "eb.eta",
        "storage.electric.eta_ch", "storage.electric.eta_dis",
        "storage.thermal.eta_ch", "storage.thermal.eta_dis",
        "pyrolysis.beta_straw", "pyrolysis.beta_garbage", "pyrolysis.beta_straw_r2f",
        "pyrolysis.beta_garbage_r2f", "pyrolysis.eta_pf", "pyrolysis.eta_pg",
        "biogas.eta_ab", "biogas.eta_b2g", "biogas.digester.eta_eq",
        "biogas.digester.eta_thermal",
    ):
        _fraction(get_path(cfg, name), name)
    _check(cfg.chp.eta_e + cfg.chp.eta_h <= 1.0, "chp.eta_e + chp.eta_h must not exceed 1")
    _check(cfg.gt.eta_e + cfg.gt.eta_h <= 1.0, "gt.eta_e + gt.eta_h must not exceed 1")
    _check(cfg.hp.cop > 0, "hp.cop must be positive")
    w = cfg.wind
    _check(0 < w.v_in < w.v_star < w.v_out, "wind speeds must satisfy 0 < v_in < v_star < v_out")
    _check(w.p_star > 0, "wind.p_star must be positive")
    _check(cfg.pv.p_max > 0 and cfg.pv.g_nominal > 0, "pv.p_max and pv.g_nominal must be positive")
    for name in ("chp.capacity", "gt.capacity"):
        _check(get_path(cfg, name) > 0, f"{name} must be positive")
    for name in ("gb.capacity", "eb.capacity", "hp.capacity", "p2g.capacity"):
        _check(get_path(cfg, name) >= 0, f"{name} must be >= 0")
    _check(cfg.gb.fuel_a >= 0, "gb.fuel_a must be >= 0 (convex fuel curve)")
    _check(0 <= cfg.gb.min_output <= cfg.gb.capacity, "gb.min_output must lie in [0, capacity]")
    _check(cfg.gb.segments >= 1, "gb.segments must be >= 1")
    for kind in ("electric", "thermal"):
        st = getattr(cfg.storage, kind)
        _check(
            st.capacity >= 0 and st.p_ch_max >= 0 and st.p_dis_max >= 0,
            f"storage.{kind} sizes must be non-negative",
        )
        _check(0 <= st.q0 <= st.capacity, f"storage.{kind}.q0 must lie in [0, capacity]")
    _check(cfg.gas.price >= 0 and cfg.gas.lhv > 0, "gas.price >= 0 and gas.lhv > 0 required")
    _check(0 <= cfg.network.thermal_loss_rate < 1, "network.thermal_loss_rate must lie in [0, 1)")
    _check(0 < cfg.renewables.confidence < 1, "renewables.confidence must lie in (0, 1)")
    _check(cfg.renewables.sigma_fraction >= 0, "renewables.sigma_fraction must be >= 0")
    c = cfg.carbon
    _check(c.beta > 0 and c.zeta >= 0 and c.tier_width > 0, "carbon: beta > 0, zeta >= 0, tier_width > 0")
    _check(c.lambda_e >= 0 and c.lambda_g >= 0 and c.f_grid >= 0, "carbon factors must be >= 0")
    _check(c.surplus_credit in ("none", "flat_beta"), "carbon.surplus_credit must be none|flat_beta")
    _check(c.baseline_pricing in ("none", "flat_beta"), "carbon.baseline_pricing must be none|flat_beta")
    _check(min(dataclasses.astuple(cfg.om)) >= 0, "om costs must be non-negative")
    dr = cfg.dr
    _check(dr.reference_price is None or dr.reference_price > 0, "dr.reference_price must be positive")
    _check(dr.self_elasticity <= 0 <= dr.cross_elasticity, "elasticities: self <= 0 <= cross")
    if dr.elasticity_matrix is not None:
        m = np.asarray(dr.elasticity_matrix)
        _check(m.shape == (HORIZON, HORIZON), "dr.elasticity_matrix must be 24x24")
        off = m[~np.eye(HORIZON, dtype=bool)]
        _check(np.all(np.diag(m) <= 0) and np.all(off >= 0), "elasticity matrix: diagonal <= 0, off-diagonal >= 0")
    prices = [t.price for t in dr.ibdr_tiers]
    _check(len(prices) >= 1, "dr.ibdr_tiers needs at least one tier")
    _check(all(a < b for a, b in zip(prices, prices[1:])), "dr.ibdr_tiers prices must be strictly increasing")
    _check(all(t.up_frac >= 0 and t.down_frac >= 0 for t in dr.ibdr_tiers), "ibdr tier sizes must be >= 0")
    th = dr.thermal
    _check(th.shift_frac >= 0 and th.curtail_frac >= 0 and th.curtail_price >= 0, "dr.thermal values must be >= 0")
    cf = cfg.comfort
    _check(
        min(cf.metabolic, cf.clothing + 0.1, cf.kf, cf.alpha_air, cf.rho_air, cf.volume) > 0,
        "comfort physical constants must be positive",
    )
    g = cfg.grid
    _check(0 < g.price_floor < g.price_cap, "grid price bounds must satisfy 0 < floor < cap")
    _check(all(u.a >= 0 and u.capacity > 0 for u in g.coal_units), "coal units need a >= 0 and capacity > 0")
    _check(all(u.capacity > 0 for u in g.gas_units), "gas units need capacity > 0")
    ga = cfg.ga
    _check(ga.population >= 4, "ga.population must be >= 4")
    _check(ga.generations >= 1, "ga.generations must be >= 1")
    _check(0 <= ga.mutation_rate <= 1 and 0 <= ga.crossover_rate <= 1, "ga rates must lie in [0, 1]")
    _check(0 <= cfg.seed < 2**64, "seed must be a 64-bit unsigned integer")


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Deterministic generator derived from ``seed`` and integer stream keys."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))
