"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import contextlib
import dataclasses
import math
import time

import numpy as np
import pytest

from ries_opt.bilevel import PriceChromosome, evolve
from ries_opt.carbon import tiered_trading_cost
from ries_opt.core import HORIZON, ScenarioFlags, load_config
from ries_opt.dispatch import DispatchInfeasible, dispatch, inverse_normal_cdf, verify_solution
from ries_opt.runner import run_bilevel
from ries_opt.sensitivity import run_sensitivity
from oracles import ToyInstance, brute_force, check_toy_solution, random_instance, random_valid_config, toy_config

RESULTS: list[str] = []


@contextlib.contextmanager
def criterion(n: int, title: str, budget_s: float):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < budget_s, f"runtime {elapsed:.1f}s over {budget_s:.0f}s budget"
    except BaseException as exc:
        RESULTS.append(f"criterion {n} {title}: FAIL ({exc})".splitlines()[0])
        raise
    RESULTS.append(f"criterion {n} {title}: PASS ({time.perf_counter() - start:.1f}s)")
    print(RESULTS[-1])


@pytest.fixture(scope="module")
def bundled():
    return load_config()


@pytest.fixture(scope="module")
def runs(bundled):
    return {k: dispatch(bundled, ScenarioFlags.from_scenario(k)) for k in (1, 2, 3, 4)}


def test_c1_tiered_cost():
    with criterion(1, "tiered carbon cost", 1.0):
        m = dataclasses.replace(load_config().carbon, beta=0.3, zeta=0.25, tier_width=2000.0)
        assert abs(tiered_trading_cost(3000.0, m) - 975.0) <= 1e-9
        assert abs(tiered_trading_cost(8000.0, m) - 3300.0) <= 1e-9
        for k in (1, 2, 3, 4):
            e = k * m.tier_width
            left, right = tiered_trading_cost(e, m), tiered_trading_cost(math.nextafter(e, math.inf), m)
            assert abs(right - left) <= 1e-12 * left, f"jump at {e}"
        x = np.linspace(0.0, 12000.0, 10_000)
        y = np.array([tiered_trading_cost(v, m) for v in x])
        marginal = np.diff(y) / np.diff(x)
        assert np.all(np.diff(marginal) >= -1e-9), "marginal price decreases"


def test_c2_oracle_equivalence():
    with criterion(2, "LP matches brute force on toy instances", 60.0):
        rng = np.random.default_rng(2024)
        done = 0
        while done < 25:
            inst = random_instance(rng)
            cfg = toy_config(inst)
            best = brute_force(inst, cfg)
            if best is None:
                continue
            prices = list(inst.price) + [0.5] * (HORIZON - inst.n)
            sol = dispatch(cfg, ScenarioFlags.from_scenario(1), prices=prices, horizon=inst.n)
            assert abs(sol.total_cost - best) <= 1e-6 * max(1.0, abs(best)), (inst, sol.total_cost, best)
            assert check_toy_solution(sol, inst) == []
            done += 1


def test_c3_scenario_ordering(bundled):
    with criterion(3, "scenario emission and cost ordering", 300.0):
        sols = {k: dispatch(bundled, ScenarioFlags.from_scenario(k)) for k in (1, 2, 3, 4)}
        e = [sols[k].emissions for k in (1, 2, 3, 4)]
        c = [sols[k].total_cost for k in (1, 2, 3, 4)]
        assert e[3] < e[2] < e[1] < e[0], f"emissions {e}"
        assert c[3] < c[2] < c[1] < c[0], f"costs {c}"
        assert e[2] <= 0.98 * e[0], f"scenario 3 only {1 - e[2] / e[0]:.2%} below scenario 1"


def test_c4_balance_residuals(bundled, runs):
    with criterion(4, "balances, cyclic storage and comfort verified", 60.0):
        for k, sol in runs.items():
            report = verify_solution(sol, bundled, sol.flags)
            assert report.passed, f"scenario {k}: {report.failures()}"
            for fam in ("balance_electric", "balance_thermal", "balance_gas", "storage", "comfort"):
                assert report.families[fam].worst <= 1e-6, (k, fam)
            s = sol.series
            assert s["es_soc"][-1] == pytest.approx(bundled.storage.electric.q0, abs=1e-6)
            assert s["ts_soc"][-1] == pytest.approx(bundled.storage.thermal.q0, abs=1e-6)


def test_c5_ga_behaviour(bundled, tmp_path):
    with criterion(5, "GA reproducible and better than static TOU", 600.0):
        ga = dataclasses.replace(bundled.ga, population=20, generations=50)
        flags = ScenarioFlags.from_scenario(4)
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            out.mkdir()
            run = run_bilevel(bundled, out, ga, flags)
            outs.append((out, run))
        (out_a, run_a), (out_b, _) = outs
        trace = run_a.result.trace
        assert all(b <= a for a, b in zip(trace, trace[1:])), "trace increases"
        for f in run_a.files:
            assert (out_a / f).read_bytes() == (out_b / f).read_bytes(), f"{f} differs between runs"
        static = evolve(dataclasses.replace(ga, generations=1), bundled, flags,
                        initial=[PriceChromosome.from_schedule(bundled.tou)] * 4).best_fitness
        assert len(trace) <= 50
        assert run_a.result.best_cost.total <= static, (run_a.result.best_cost.total, static)


def test_c6_sensitivity_ranking(bundled):
    with criterion(6, "sensitivity ranks F1-F4 on top", 900.0):
        rep = run_sensitivity(bundled, samples=11)
        assert len(rep.results) == 27
        top = [r.spec.param for r in rep.results[:4]]
        assert sorted(top) == ["F1", "F2", "F3", "F4"], f"top 4 {top}"
        by = rep.by_param()
        for k in ("F1", "F2", "F3", "F4"):
            assert by[k].r is not None and by[k].r <= -0.95, (k, by[k].r)
        for k in ("F5", "F6"):
            assert by[k].r is not None and by[k].r > 0, (k, by[k].r)


def test_c7_inverse_normal():
    with criterion(7, "inverse normal CDF", 5.0):
        assert abs(inverse_normal_cdf(0.975) - 1.959964) <= 1e-6
        for p in np.linspace(0.0005, 0.9995, 1000):
            assert abs(inverse_normal_cdf(p) + inverse_normal_cdf(1 - p)) <= 1e-12, p


def test_c8_property_fuzz(bundled):
    with criterion(8, "random configs solve and verify", 600.0):
        rng = np.random.default_rng(8)
        for i in range(100):
            cfg = random_valid_config(rng, bundled)
            flags = ScenarioFlags.from_scenario(int(rng.integers(1, 5)))
            sol = dispatch(cfg, flags)
            report = verify_solution(sol, cfg, flags)
            assert report.passed, (i, report.failures())
        short = bundled.with_value("network.grid_import_max", 0.0).with_value("gt.capacity", 1.0)
        with pytest.raises(DispatchInfeasible, match=r"slot \d+: electric load") as info:
            dispatch(short, ScenarioFlags.from_scenario(1))
        assert info.value.slot is not None
        cold = bundled.with_value("gb.capacity", 0.0).with_value("gt.capacity", 1.0)
        with pytest.raises(DispatchInfeasible, match=r"slot \d+: heat demand"):
            dispatch(cold, ScenarioFlags.from_scenario(1))
        step = ToyInstance((500.0, 1000.0), (1500.0, 1500.0), (0.5, 0.5), 3.0, 100.0, 1500.0)
        frozen = toy_config(step).with_value("gt.ramp_up", 0.0).with_value("gt.ramp_down", 0.0)
        with pytest.raises(DispatchInfeasible, match="coupled ramp"):
            dispatch(frozen, ScenarioFlags.from_scenario(1), horizon=2)
