import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ries_opt.bilevel import (
    MAX_SEGMENTS,
    AllPenalizedError,
    GridCapacityError,
    PriceChromosome,
    crossover,
    decode_chromosome,
    economic_dispatch,
    evolve,
    grid_cost,
    mutate,
    random_chromosome,
)
from ries_opt.core import CoalUnit, GridParams, ScenarioFlags, make_rng, replace_path

S4 = ScenarioFlags.from_scenario(4)


def test_single_segment_decodes_flat():
    assert decode_chromosome(PriceChromosome((0,), (0.5,))).values == (0.5,) * 24


def test_tou_round_trip(cfg):
    c = PriceChromosome.from_schedule(cfg.tou)
    assert c.starts == (0, 7, 10, 15, 18, 21, 23)
    assert np.array_equal(decode_chromosome(c).array(), cfg.tou.prices())


@pytest.mark.parametrize(
    "starts,prices",
    [((1,), (0.5,)), ((0, 5, 5), (1, 2, 3)), ((0, 24), (1, 2)), (tuple(range(13)), (0.5,) * 13), ((0,), (float("nan"),))],
)
def test_chromosome_rejects(starts, prices):
    with pytest.raises(ValueError):
        PriceChromosome(starts, prices)


@given(st.integers(0, 2**32 - 1))
def test_random_chromosome_changepoints(seed):
    from ries_opt.core import load_config

    g = load_config().grid
    c = random_chromosome(make_rng(seed), g)
    vec = decode_chromosome(c).values
    changes = [t for t in range(1, 24) if vec[t] != vec[t - 1]]
    assert changes == list(c.starts[1:])
    assert c.within(g.price_floor, g.price_cap)


@given(st.integers(0, 2**32 - 1), st.integers(1, 23))
def test_crossover_splices_at_cut(seed, cut):
    from ries_opt.core import load_config

    g = load_config().grid
    rng = make_rng(seed)
    a, b = random_chromosome(rng, g), random_chromosome(rng, g)
    child = decode_chromosome(crossover(a, b, cut)).values
    va, vb = decode_chromosome(a).values, decode_chromosome(b).values
    if len(crossover(a, b, cut)) < MAX_SEGMENTS:
        assert child == va[:cut] + vb[cut:]


@given(st.integers(0, 2**32 - 1))
def test_mutation_keeps_valid(seed):
    from ries_opt.core import load_config

    g = load_config().grid
    rng = make_rng(seed)
    c = random_chromosome(rng, g)
    for _ in range(20):
        c = mutate(c, 0.9, rng, g)
        assert 2 <= len(c) <= MAX_SEGMENTS
        assert c.within(g.price_floor, g.price_cap)


def test_mutation_rate_zero_is_identity(cfg):
    c = PriceChromosome.from_schedule(cfg.tou)
    assert mutate(c, 0.0, make_rng(1), cfg.grid) == c


def _one_coal(a=0.001, b=0.1, c=5.0, cap=1000.0):
    return GridParams(
        coal_units=(CoalUnit(a, b, c, cap, 1.0),), gas_units=(), coal_cost_scale=1.0,
        curtailment_penalty=0.3, carbon_price=0.0, price_floor=0.2, price_cap=1.2,
    )


def test_coal_quadratic(scenario_solutions):
    g = _one_coal()
    park = dataclasses.replace(scenario_solutions[1], horizon=1)
    park.series = {k: v[:1].copy() for k, v in scenario_solutions[1].series.items()}
    park.series["grid_buy"][0] = 100.0
    park.series["pv"][0] = park.series["pv_forecast"][0]
    cost = grid_cost([0.5] * 24, park, g)
    assert cost.coal == pytest.approx(0.001 * 100**2 + 0.1 * 100 + 5)
    assert cost.sales == pytest.approx(50.0)
    assert cost.curtailment == 0.0
    park.series["grid_buy"][0] = 0.0
    zero = grid_cost([0.5] * 24, park, g)
    assert (zero.coal, zero.sales) == (0.0, 0.0)


def test_economic_dispatch_equal_increments(cfg):
    g = dataclasses.replace(cfg.grid, gas_units=())
    coal, gas, lam = economic_dispatch(30000.0, g)
    assert coal.sum() == pytest.approx(30000.0)
    inc = [2 * u.a * p + u.b for u, p in zip(g.coal_units, coal) if 0 < p < u.capacity]
    assert np.allclose(inc, lam)


def test_economic_dispatch_gas_merit_order(cfg):
    g = cfg.grid
    coal, gas, lam = economic_dispatch(60000.0, g)
    assert coal.sum() + gas.sum() == pytest.approx(60000.0)
    if 0 < gas[0] < g.gas_units[0].capacity:
        assert lam == pytest.approx(g.gas_units[0].q)
    with pytest.raises(GridCapacityError):
        economic_dispatch(1e9, g)


def test_grid_cost_terms_recomputed(cfg, scenario_solutions):
    park = scenario_solutions[4]
    prices = cfg.tou.prices()
    urban = cfg.profiles.urban_load.array()
    cost = grid_cost(prices, park, cfg.grid, urban)
    d = cost.dispatch
    coal = sum(
        float(np.sum(np.where(d.coal[:, j] > 0, u.a * d.coal[:, j] ** 2 + u.b * d.coal[:, j] + u.c, 0.0)))
        for j, u in enumerate(cfg.grid.coal_units)
    )
    assert cost.coal == pytest.approx(coal)
    assert cost.sales == pytest.approx(float(prices @ park.series["grid_buy"]))
    assert np.allclose(d.coal.sum(axis=1) + d.gas.sum(axis=1), urban + park.series["grid_buy"])
    emis = sum(u.emission_factor * d.coal[:, j].sum() for j, u in enumerate(cfg.grid.coal_units))
    emis += sum(u.emission_factor * d.gas[:, j].sum() for j, u in enumerate(cfg.grid.gas_units))
    assert cost.market == pytest.approx(cfg.grid.carbon_price * emis)
    assert cost.total == pytest.approx(cost.coal + cost.gas + cost.curtailment + cost.market - cost.sales)


@pytest.fixture(scope="module")
def small_ga(cfg):
    return dataclasses.replace(cfg.ga, population=6, generations=3, patience=10)


def test_identical_population_gives_flat_trace(cfg, small_ga):
    c = PriceChromosome.from_schedule(cfg.tou)
    res = evolve(dataclasses.replace(small_ga, mutation_rate=0.0), cfg, S4, initial=[c] * 6)
    assert len(res.trace) == 3
    assert len(set(res.trace)) == 1
    assert res.best == c


def test_one_generation_returns_best_initial(cfg, small_ga):
    res = evolve(dataclasses.replace(small_ga, generations=1), cfg, S4)
    assert len(res.trace) == 1
    assert res.best_fitness <= res.baseline_cost


def test_trace_monotone_and_deterministic(cfg, small_ga):
    seen = []
    a = evolve(small_ga, cfg, S4, on_generation=lambda g, f: seen.append((g, f)))
    b = evolve(small_ga, cfg, S4)
    assert all(y <= x for x, y in zip(a.trace, a.trace[1:]))
    assert a.trace == b.trace and a.best == b.best
    assert [f for _, f in seen] == a.trace


def test_all_penalized_raises(cfg, small_ga):
    bad = replace_path(cfg, "network.grid_import_max", 0.0)
    bad = replace_path(bad, "gt.capacity", 1.0)
    with pytest.raises(AllPenalizedError):
        evolve(small_ga, bad, S4)


def test_ga_rejects_tiny_population(cfg):
    with pytest.raises(ValueError):
        evolve(dataclasses.replace(cfg.ga, population=2), cfg, S4)
