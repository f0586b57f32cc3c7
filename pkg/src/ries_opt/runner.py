"""Run scenarios, the pricing GA and sensitivity sweeps, and write their data files."""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .bilevel import EvolveResult, evolve
from .core import GaConfig, ScenarioFlags, SystemConfig, write_profile_csv, write_table_csv
from .dispatch import DispatchInfeasible, DispatchSolution, DispatchUnbounded, dispatch, verify_solution
from .sensitivity import SensitivityReport, SweepSpec, run_sensitivity

TABLE_COLUMNS = ("total_cost", "energy_purchase_cost", "om_cost", "carbon_cost", "emissions_kg")


class ScenarioError(RuntimeError):
    def __init__(self, scenario: int, cause: Exception):
        super().__init__(f"scenario {scenario}: {cause}")
        self.scenario = scenario
        self.cause = cause


def fmt6(x: float) -> str:
    return f"{x:.6g}"


def run_dir(root: str | Path, command: str, stamp: Optional[str] = None) -> Path:
    stamp = stamp or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    path = Path(root) / stamp / command
    path.mkdir(parents=True, exist_ok=True)
    return path


@dataclass
class RunManifest:
    command: str
    config_path: Optional[str]
    flags: dict
    seed: int
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    files: list[str] = field(default_factory=list)
    ok: bool = True

    def write(self, directory: Path) -> Path:
        missing = [f for f in self.files if not (directory / f).is_file()]
        if missing:
            raise FileNotFoundError(f"manifest lists files that were not written: {missing}")
        doc = {
            "command": self.command,
            "config_path": self.config_path,
            "flags": self.flags,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "ok": self.ok,
            "versions": {
                "ries_opt": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "files": sorted(self.files),
        }
        path = directory / "manifest.json"
        path.write_text(json.dumps(doc, indent=2) + "\n")
        return path


def _dump(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# scenarios
# --------------------------------------------------------------------------


@dataclass
class ScenarioRun:
    solutions: dict[int, DispatchSolution]
    verified: dict[int, bool]
    files: list[str]

    @property
    def ok(self) -> bool:
        return all(self.verified.values())

    def table(self) -> list[dict]:
        return [{"scenario": k, **_row(sol)} for k, sol in sorted(self.solutions.items())]


def _row(sol: DispatchSolution) -> dict:
    c = sol.costs
    return {
        "total_cost": c.total,
        "energy_purchase_cost": c.energy_purchase,
        "om_cost": c.om,
        "carbon_cost": c.carbon,
        "emissions_kg": sol.emissions,
    }


def format_table(rows: Sequence[dict]) -> str:
    header = ("scenario", *TABLE_COLUMNS)
    cells = [header] + [(str(r["scenario"]), *(fmt6(r[k]) for k in TABLE_COLUMNS)) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells)


def solve_scenarios(cfg: SystemConfig, scenarios: Sequence[int] = (1, 2, 3, 4)) -> dict[int, DispatchSolution]:
    out = {}
    for k in scenarios:
        try:
            out[k] = dispatch(cfg, ScenarioFlags.from_scenario(k))
        except (DispatchInfeasible, DispatchUnbounded) as exc:
            raise ScenarioError(k, exc) from exc
    return out


def run_scenarios(cfg: SystemConfig, out: Path, scenarios: Sequence[int] = (1, 2, 3, 4)) -> ScenarioRun:
    sols = solve_scenarios(cfg, scenarios)
    files, verified = [], {}
    for k, sol in sols.items():
        report = verify_solution(sol, cfg, sol.flags)
        verified[k] = report.passed
        (out / f"scenario_{k}_dispatch.csv").write_text(sol.to_csv())
        _dump(out / f"scenario_{k}_summary.json", {**sol.summary(), "verify": report.as_dict()})
        files += [f"scenario_{k}_dispatch.csv", f"scenario_{k}_summary.json"]
    run = ScenarioRun(sols, verified, files)
    rows = run.table()
    write_table_csv(out / "comparison.csv", ("scenario", *TABLE_COLUMNS), [[r["scenario"], *(r[k] for k in TABLE_COLUMNS)] for r in rows])
    (out / "comparison.txt").write_text(format_table(rows) + "\n")
    files += ["comparison.csv", "comparison.txt"]
    return run


# --------------------------------------------------------------------------
# bilevel
# --------------------------------------------------------------------------


@dataclass
class BilevelRun:
    result: EvolveResult
    verified: bool
    files: list[str]

    @property
    def ok(self) -> bool:
        return self.verified


def run_bilevel(cfg: SystemConfig, out: Path, ga: GaConfig, flags: ScenarioFlags) -> BilevelRun:
    res = evolve(ga, cfg, flags)
    verified = verify_solution(res.park, cfg, flags).passed
    write_profile_csv(out / "prices.csv", res.best_prices)
    write_table_csv(
        out / "chromosome.csv", ("segment", "start_slot", "price"),
        [[i, s, p] for i, (s, p) in enumerate(zip(res.best.starts, res.best.prices))],
    )
    write_table_csv(out / "convergence.csv", ("generation", "best_fitness"), [[i, f] for i, f in enumerate(res.trace)])
    (out / "park_dispatch.csv").write_text(res.park.to_csv())
    _dump(out / "summary.json", {
        "best_grid_cost": res.best_cost.as_dict(),
        "baseline_grid_cost": res.baseline_cost,
        "generations": len(res.trace),
        "evaluations": res.evaluations,
        "park": res.park.summary(),
        "verified": verified,
    })
    files = ["prices.csv", "chromosome.csv", "convergence.csv", "park_dispatch.csv", "summary.json"]
    return BilevelRun(res, verified, files)


# --------------------------------------------------------------------------
# sensitivity
# --------------------------------------------------------------------------


@dataclass
class SensitivityRun:
    report: SensitivityReport
    files: list[str]

    @property
    def ok(self) -> bool:
        return all(s.verified is not False for r in self.report.results for s in r.samples)


def run_sensitivity_files(
    cfg: SystemConfig,
    out: Path,
    specs: Optional[Sequence[SweepSpec]] = None,
    samples: int = 11,
    workers: int = 1,
) -> SensitivityRun:
    report = run_sensitivity(cfg, specs, samples, workers=workers, check=True)
    rows = []
    for r in sorted(report.results, key=lambda r: int(r.spec.param[1:])):
        for s in r.samples:
            rows.append([r.spec.param, s.normalized, "" if s.emissions is None else s.emissions])
    write_table_csv(out / "samples.csv", ("param", "normalized_value", "emissions_kg"), rows)
    _dump(out / "report.json", report.as_dict())
    return SensitivityRun(report, ["samples.csv", "report.json"])
