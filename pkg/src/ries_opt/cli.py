"""Command line entry point ``ries-opt``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bilevel import AllPenalizedError, GridCapacityError
from .core import ConfigError, ScenarioFlags, load_config, validate
from .runner import (
    RunManifest,
    ScenarioError,
    format_table,
    fmt6,
    run_bilevel,
    run_dir,
    run_scenarios,
    run_sensitivity_files,
)
from .sensitivity import parse_params


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ries-opt", description="Rural integrated energy system dispatch toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", type=Path, default=None, help="YAML config (default: bundled dataset)")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output root directory")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")

    sc = sub.add_parser("scenarios", help="solve the four operating scenarios")
    common(sc)
    sc.add_argument("--scenario", type=int, choices=(1, 2, 3, 4), action="append", help="repeatable; default all")

    bl = sub.add_parser("bilevel", help="grid price search against the park response")
    common(bl)
    bl.add_argument("--scenario", type=int, choices=(1, 2, 3, 4), default=4)
    bl.add_argument("--ga-generations", type=int, default=None)
    bl.add_argument("--ga-pop", type=int, default=None)
    bl.add_argument("--ga-mutation", type=float, default=None)

    se = sub.add_parser("sensitivity", help="one-at-a-time parameter sweeps")
    common(se)
    se.add_argument("--params", default="all", help="all or a comma list such as F1,F5")
    se.add_argument("--samples", type=int, default=11)
    se.add_argument("--workers", type=int, default=1)

    va = sub.add_parser("validate", help="check a config file and exit")
    va.add_argument("--config", type=Path, default=None)
    return p


def _load(args) -> tuple:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed, ga=dataclasses.replace(cfg.ga, seed=args.seed))
    validate(cfg)
    return cfg, (str(args.config) if args.config else None)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg, _ = _load(args)
            print("config OK")
            return 0
        cfg, cfg_path = _load(args)
        out = run_dir(args.out, args.command)
        if args.command == "scenarios":
            scenarios = tuple(sorted(set(args.scenario))) if args.scenario else (1, 2, 3, 4)
            run = run_scenarios(cfg, out, scenarios)
            print(format_table(run.table()))
            flags = {"scenarios": list(scenarios)}
            bad = [f"scenario {k}" for k, ok in run.verified.items() if not ok]
        elif args.command == "bilevel":
            ga = dataclasses.replace(
                cfg.ga,
                **{k: v for k, v in (
                    ("generations", args.ga_generations),
                    ("population", args.ga_pop),
                    ("mutation_rate", args.ga_mutation),
                ) if v is not None},
            )
            run = run_bilevel(cfg, out, ga, ScenarioFlags.from_scenario(args.scenario))
            r = run.result
            print(f"best grid cost {fmt6(r.best_cost.total)} after {len(r.trace)} generations")
            if r.baseline_cost is not None:
                print(f"static TOU grid cost {fmt6(r.baseline_cost)}")
            flags = {"scenario": args.scenario, "ga": dataclasses.asdict(ga)}
            bad = [] if run.ok else ["best park dispatch"]
        else:
            specs = parse_params(args.params)
            run = run_sensitivity_files(cfg, out, specs, args.samples, args.workers)
            for res in run.report.results:
                r = "degenerate" if res.r is None else fmt6(res.r)
                print(f"{res.rank:>2}  {res.spec.param:<4} {res.sensitivity:<4}  spread {fmt6(res.spread):>8}  r {r}")
            flags = {"params": [s.param for s in specs], "samples": args.samples}
            bad = [] if run.ok else ["one or more sweep samples"]
        manifest = RunManifest(args.command, cfg_path, flags, cfg.seed, files=run.files, ok=not bad)
        manifest.write(out)
        print(f"wrote {out}")
        if bad:
            print("verification failed: " + ", ".join(bad), file=sys.stderr)
            return 1
        return 0
    except (ConfigError, ScenarioError, AllPenalizedError, GridCapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
