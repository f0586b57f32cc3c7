"""One-at-a-time carbon sensitivity sweeps over 27 model parameters."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import ConfigError, ScenarioFlags, SystemConfig, get_path
from .dispatch import DispatchInfeasible, DispatchUnbounded, dispatch, verify_solution

HIGH_SPREAD_SHARE = 0.55


@dataclass(frozen=True)
class SweepSpec:
    param: str
    path: str
    label: str
    lo: float
    hi: float
    n: int = 11

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"{self.param}: range must satisfy lo < hi")
        if self.n < 3:
            raise ValueError(f"{self.param}: need at least 3 samples")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    def normalized(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def with_samples(self, n: int) -> "SweepSpec":
        return SweepSpec(self.param, self.path, self.label, self.lo, self.hi, n)


# id, config field, label, low, high
_TABLE = (
    ("F1", "gt.eta_e", "gas turbine electrical efficiency", 0.25, 0.40),
    ("F2", "gb.eta_h", "gas boiler thermal efficiency", 0.70, 0.95),
    ("F3", "pyrolysis.eta_pf", "pyrolysis gasifier efficiency", 0.65, 0.90),
    ("F4", "pyrolysis.eta_pg", "pyrolysis power efficiency", 0.70, 0.95),
    ("F5", "carbon.f_grid", "grid emission factor", 0.206, 0.306),
    ("F6", "network.thermal_loss_rate", "thermal loss rate", 0.03, 0.07),
    ("F7", "gt.eta_h", "gas turbine heat recovery efficiency", 0.38, 0.46),
    ("F8", "storage.electric.eta_ch", "storage charging efficiency", 0.85, 0.95),
    ("F9", "storage.electric.eta_dis", "storage discharge efficiency", 0.85, 0.95),
    ("F10", "eb.eta", "electric boiler efficiency", 0.90, 0.99),
    ("F11", "pv.temp_coeff", "PV temperature coefficient", -0.0050, -0.0035),
    ("F12", "biogas.eta_b2g", "biogas upgrading efficiency", 0.85, 0.95),
    ("F13", "carbon.lambda_e", "electricity carbon allowance", 0.65, 0.80),
    ("F14", "carbon.lambda_g", "heat carbon allowance", 0.33, 0.40),
    ("F15", "grid.coal_cost_scale", "coal price coefficient", 0.8, 1.2),
    ("F16", "gas.price", "gas price", 3.0, 3.9),
    ("F17", "biogas.beta_st", "wastewater coefficient", 0.015, 0.025),
    ("F18", "biogas.eta_ab", "fermentable organics fraction", 0.60, 0.80),
    ("F19", "biogas.beta_sludge", "sludge conversion coefficient", 0.70, 0.90),
    ("F20", "biogas.beta_bg", "biogas production coefficient", 0.04, 0.06),
    ("F21", "grid.curtailment_penalty", "PV curtailment penalty", 0.2, 0.4),
    ("F22", "biogas.digester.alpha1", "digester inner wall heat transfer", 7.0, 10.0),
    ("F23", "biogas.digester.alpha2", "digester outer wall heat transfer", 18.0, 28.0),
    ("F24", "biogas.digester.theta1", "digester wall conductivity", 0.6, 1.0),
    ("F25", "biogas.digester.theta2", "digester insulation conductivity", 0.03, 0.05),
    ("F26", "biogas.digester.eta_thermal", "digester heating efficiency", 0.85, 0.95),
    ("F27", "biogas.digester.eta_eq", "digester electric-to-heat efficiency", 0.90, 0.99),
)

PARAMETERS: dict[str, SweepSpec] = {row[0]: SweepSpec(*row) for row in _TABLE}


def parse_params(text: str) -> list[SweepSpec]:
    """``"all"`` or a comma list such as ``"F1,F5"``."""
    if text.strip().lower() == "all":
        return list(PARAMETERS.values())
    out = []
    for token in text.split(","):
        key = token.strip().upper()
        if key not in PARAMETERS:
            raise ConfigError(f"unknown sensitivity parameter {token.strip()!r}")
        out.append(PARAMETERS[key])
    return out


@dataclass(frozen=True)
class Sample:
    normalized: float
    value: float
    emissions: Optional[float]  # None when the dispatch was infeasible
    verified: Optional[bool] = None


def _solve(cfg: SystemConfig, flags: ScenarioFlags, check: bool) -> tuple[Optional[float], Optional[bool]]:
    try:
        sol = dispatch(cfg, flags)
    except (DispatchInfeasible, DispatchUnbounded, ConfigError):
        return None, None
    return sol.emissions, (verify_solution(sol, cfg, flags).passed if check else None)


def sweep(
    spec: SweepSpec,
    base: SystemConfig,
    flags: ScenarioFlags = ScenarioFlags.from_scenario(4),
    workers: int = 1,
    check: bool = False,
) -> list[Sample]:
    """Re-solve the dispatch at each sample of ``spec`` with everything else held at ``base``.

    Prices stay at the configured TOU schedule. ``check`` runs the independent
    feasibility audit on every solved sample.
    """
    get_path(base, spec.path)  # fail early on a bad mapping
    cfgs = [base.with_value(spec.path, float(v)) for v in spec.values()]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda c: _solve(c, flags, check), cfgs))
    else:
        results = [_solve(c, flags, check) for c in cfgs]
    return [
        Sample(float(x), float(v), e, ok)
        for x, v, (e, ok) in zip(spec.normalized(), spec.values(), results)
    ]


def pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Product-moment correlation, or ``None`` when either side has zero variance."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size:
        raise ValueError("x and y must have the same length")
    if x.size < 3:
        raise ValueError("need at least 3 samples")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    # relative guard so solver noise on a flat response reads as degenerate
    if sx == 0.0 or sy <= 1e-9 * max(1.0, float(np.abs(y).max())) * math.sqrt(y.size):
        return None
    return max(-1.0, min(1.0, float(dx @ dy) / (sx * sy)))


@dataclass(frozen=True)
class ParameterResult:
    spec: SweepSpec
    samples: tuple[Sample, ...]
    r: Optional[float]
    spread: float
    sensitivity: str = "Low"
    rank: int = 0

    @property
    def missing(self) -> int:
        return sum(s.emissions is None for s in self.samples)

    def as_dict(self) -> dict:
        return {
            "param": self.spec.param,
            "path": self.spec.path,
            "label": self.spec.label,
            "range": [self.spec.lo, self.spec.hi],
            "pearson_r": self.r,
            "degenerate": self.r is None,
            "spread_kg": self.spread,
            "sensitivity": self.sensitivity,
            "rank": self.rank,
            "missing_samples": self.missing,
        }


def summarize(spec: SweepSpec, samples: Iterable[Sample]) -> ParameterResult:
    samples = tuple(samples)
    ok = [s for s in samples if s.emissions is not None]
    if len(ok) >= 3:
        ys = [s.emissions for s in ok]
        r = pearson([s.normalized for s in ok], ys)
        spread = float(max(ys) - min(ys)) if r is not None else 0.0
    else:
        r, spread = None, 0.0
    return ParameterResult(spec, samples, r, spread)


@dataclass(frozen=True)
class SensitivityReport:
    results: tuple[ParameterResult, ...]  # ordered by rank

    def by_param(self) -> dict[str, ParameterResult]:
        return {r.spec.param: r for r in self.results}

    def high(self) -> list[str]:
        return [r.spec.param for r in self.results if r.sensitivity == "High"]

    def as_dict(self) -> dict:
        return {"parameters": [r.as_dict() for r in self.results]}


def classify_and_rank(results: Iterable[ParameterResult], high_share: float = HIGH_SPREAD_SHARE) -> SensitivityReport:
    """Order by emission spread and mark the High cohort.

    High means a spread above ``high_share`` of the largest spread.
    """
    results = list(results)
    # ties broken by |r| then by parameter number so the order is total
    key = lambda p: (-p.spread, -abs(p.r or 0.0), int(p.spec.param[1:]))
    ordered = sorted(results, key=key)
    top = ordered[0].spread if ordered else 0.0
    out = []
    for i, p in enumerate(ordered, start=1):
        cls = "High" if top > 0 and p.spread > high_share * top else "Low"
        out.append(ParameterResult(p.spec, p.samples, p.r, p.spread, cls, i))
    return SensitivityReport(tuple(out))


def run_sensitivity(
    base: SystemConfig,
    specs: Optional[Sequence[SweepSpec]] = None,
    samples: int = 11,
    flags: ScenarioFlags = ScenarioFlags.from_scenario(4),
    workers: int = 1,
    check: bool = False,
) -> SensitivityReport:
    specs = [s.with_samples(samples) for s in (PARAMETERS.values() if specs is None else specs)]
    return classify_and_rank(summarize(s, sweep(s, base, flags, workers, check)) for s in specs)
