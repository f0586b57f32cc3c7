"""Grid-side pricing game: the grid picks a time-of-use price chromosome, the park
answers with its cost-minimal dispatch, and a genetic algorithm searches prices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    HORIZON,
    DT,
    GaConfig,
    GridParams,
    ScenarioFlags,
    SystemConfig,
    TimeProfile,
    TouPriceSchedule,
    Unit,
    make_rng,
)
from .dispatch import DispatchInfeasible, DispatchSolution, DispatchUnbounded, dispatch

MAX_SEGMENTS = 12
MIN_EVOLVED_SEGMENTS = 2
PENALTY = 1e12  # fitness of an individual whose park dispatch has no solution
PRICE_SIGMA_SHARE = 0.05


class GridCapacityError(RuntimeError):
    """Grid demand in some slot exceeds the installed generating capacity."""


class AllPenalizedError(RuntimeError):
    """Every individual of a generation failed the lower-level dispatch."""


@dataclass(frozen=True)
class PriceChromosome:
    """Piecewise-constant prices; segment ``k`` covers ``starts[k]`` up to the next start."""

    starts: tuple[int, ...]
    prices: tuple[float, ...]

    def __post_init__(self) -> None:
        starts = tuple(int(s) for s in self.starts)
        prices = tuple(float(p) for p in self.prices)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "prices", prices)
        if len(starts) != len(prices):
            raise ValueError("starts and prices must have the same length")
        if not 1 <= len(starts) <= MAX_SEGMENTS:
            raise ValueError(f"chromosome must have 1..{MAX_SEGMENTS} segments")
        if starts[0] != 0:
            raise ValueError("first segment must start at slot 0")
        if any(b <= a for a, b in zip(starts, starts[1:])) or starts[-1] >= HORIZON:
            raise ValueError("segment starts must be strictly increasing within 0..23")
        if not all(math.isfinite(p) for p in prices):
            raise ValueError("prices must be finite")

    def __len__(self) -> int:
        return len(self.starts)

    def within(self, floor: float, cap: float) -> bool:
        return all(floor - 1e-12 <= p <= cap + 1e-12 for p in self.prices)

    @classmethod
    def from_vector(cls, prices: Sequence[float]) -> "PriceChromosome":
        """Encode a 24-slot vector, one segment per run of equal prices."""
        vec = [float(p) for p in prices]
        if len(vec) != HORIZON:
            raise ValueError(f"price vector must have {HORIZON} entries")
        starts = [0] + [t for t in range(1, HORIZON) if vec[t] != vec[t - 1]]
        return cls(tuple(starts), tuple(vec[s] for s in starts))

    @classmethod
    def from_schedule(cls, schedule: TouPriceSchedule) -> "PriceChromosome":
        return cls.from_vector(schedule.prices())


def decode_chromosome(c: PriceChromosome) -> TimeProfile:
    vec = np.empty(HORIZON)
    bounds = list(c.starts) + [HORIZON]
    for k, price in enumerate(c.prices):
        vec[bounds[k]:bounds[k + 1]] = price
    return TimeProfile(tuple(vec), Unit.YUAN_PER_KWH)


# --------------------------------------------------------------------------
# upper-level cost
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridDispatch:
    coal: np.ndarray  # (slots, coal units)
    gas: np.ndarray  # (slots, gas units)
    marginal_price: np.ndarray


@dataclass(frozen=True)
class GridCost:
    coal: float
    gas: float
    curtailment: float
    market: float
    sales: float
    dispatch: Optional[GridDispatch] = field(default=None, compare=False, repr=False)

    @property
    def total(self) -> float:
        return self.coal + self.gas + self.curtailment + self.market - self.sales

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "coal": self.coal,
            "gas": self.gas,
            "curtailment": self.curtailment,
            "market": self.market,
            "sales": self.sales,
        }


def _coal_output(lam: float, a: np.ndarray, b: np.ndarray, cap: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(a > 0, (lam - b) / (2 * a), np.where(lam > b, np.inf, 0.0))
    return np.clip(out, 0.0, cap)


def _bisect(f: Callable[[float], float], lo: float, hi: float) -> float:
    # f is non-decreasing; returns the smallest lam with f(lam) >= 0 up to float resolution
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def economic_dispatch(demand: float, g: GridParams) -> tuple[np.ndarray, np.ndarray, float]:
    """Equal-incremental-cost split of ``demand`` over coal and gas units, all committed."""
    s = g.coal_cost_scale
    a = np.array([u.a * s for u in g.coal_units])
    b = np.array([u.b * s for u in g.coal_units])
    ccap = np.array([u.capacity for u in g.coal_units])
    order = sorted(range(len(g.gas_units)), key=lambda i: g.gas_units[i].q)
    gas = np.zeros(len(g.gas_units))
    if demand <= 0:
        return np.zeros(len(a)), gas, 0.0
    if demand > ccap.sum() + sum(u.capacity for u in g.gas_units) + 1e-9:
        raise GridCapacityError(f"grid demand {demand:.6g} kW exceeds installed capacity")
    lam_lo = 0.0
    for i in order:
        q = g.gas_units[i].q
        base = gas.sum()
        at_q = _coal_output(q, a, b, ccap).sum() + base
        if at_q >= demand:
            lam = _bisect(lambda x: _coal_output(x, a, b, ccap).sum() + base - demand, lam_lo, q)
            return _coal_output(lam, a, b, ccap), gas, lam
        take = min(g.gas_units[i].capacity, demand - at_q)
        gas[i] = take
        if at_q + take >= demand:
            return _coal_output(q, a, b, ccap), gas, q
        lam_lo = q
    # every gas unit at capacity; coal covers the rest
    base = gas.sum()
    hi = max(lam_lo, 1.0)
    while _coal_output(hi, a, b, ccap).sum() + base < demand:
        hi *= 2
    lam = _bisect(lambda x: _coal_output(x, a, b, ccap).sum() + base - demand, lam_lo, hi)
    coal = _coal_output(lam, a, b, ccap)
    # close the last float gap on the marginal unit
    gap = demand - coal.sum() - base
    if gap > 0:
        for j in np.argsort(-(ccap - coal)):
            add = min(gap, ccap[j] - coal[j])
            coal[j] += add
            gap -= add
            if gap <= 0:
                break
    return coal, gas, lam


def grid_cost(
    prices: Sequence[float] | TimeProfile,
    park: DispatchSolution,
    g: GridParams,
    urban_load: Optional[Sequence[float]] = None,
) -> GridCost:
    """Grid-side cost of serving the urban load plus the park's purchases at ``prices``.

    Coal units cost ``a P^2 + b P + c`` (``c`` only while producing), gas units
    ``q P``; grid-unit emissions are priced at ``g.carbon_price``; curtailment is
    the PV forecast minus the PV the park dispatched.
    """
    price = prices.array() if isinstance(prices, TimeProfile) else np.asarray(prices, dtype=float)
    n = park.horizon
    buy = park.series["grid_buy"]
    urban = np.zeros(n) if urban_load is None else np.asarray(urban_load, dtype=float)[:n]
    s = g.coal_cost_scale
    coal_rows, gas_rows, lams = [], [], []
    for t in range(n):
        coal, gas, lam = economic_dispatch(float(urban[t] + buy[t]), g)
        coal_rows.append(coal)
        gas_rows.append(gas)
        lams.append(lam)
    coal_p = np.array(coal_rows).reshape(n, len(g.coal_units))
    gas_p = np.array(gas_rows).reshape(n, len(g.gas_units))
    c_coal = 0.0
    for j, u in enumerate(g.coal_units):
        p = coal_p[:, j]
        c_coal += float(np.sum(np.where(p > 0, s * (u.a * p**2 + u.b * p + u.c), 0.0)))
    c_gas = float(sum(u.q * gas_p[:, j].sum() for j, u in enumerate(g.gas_units))) * DT
    emis = sum(u.emission_factor * coal_p[:, j].sum() for j, u in enumerate(g.coal_units))
    emis += sum(u.emission_factor * gas_p[:, j].sum() for j, u in enumerate(g.gas_units))
    curtailed = np.maximum(park.series["pv_forecast"] - park.series["pv"], 0.0)
    return GridCost(
        coal=c_coal * DT,
        gas=c_gas,
        curtailment=g.curtailment_penalty * float(curtailed.sum()) * DT,
        market=g.carbon_price * float(emis) * DT,
        sales=float(np.dot(price[:n], buy)) * DT,
        dispatch=GridDispatch(coal_p, gas_p, np.array(lams)),
    )


# --------------------------------------------------------------------------
# genetic algorithm
# --------------------------------------------------------------------------


def _clip(p: float, g: GridParams) -> float:
    return float(min(max(p, g.price_floor), g.price_cap))


def random_chromosome(rng: np.random.Generator, g: GridParams) -> PriceChromosome:
    k = int(rng.integers(MIN_EVOLVED_SEGMENTS, 9))
    inner = np.sort(rng.choice(np.arange(1, HORIZON), size=k - 1, replace=False))
    prices = rng.uniform(g.price_floor, g.price_cap, size=k)
    return PriceChromosome((0, *inner.tolist()), tuple(prices))


def _segments_at(c: PriceChromosome, slot: int) -> int:
    return int(np.searchsorted(c.starts, slot, side="right") - 1)


def crossover(a: PriceChromosome, b: PriceChromosome, cut: int) -> PriceChromosome:
    """Head of ``a`` before slot ``cut`` joined to the tail of ``b`` from ``cut`` on."""
    starts = [s for s in a.starts if s < cut]
    prices = [p for s, p in zip(a.starts, a.prices) if s < cut]
    k = _segments_at(b, cut)
    starts.append(cut)
    prices.append(b.prices[k])
    for s, p in zip(b.starts[k + 1:], b.prices[k + 1:]):
        starts.append(s)
        prices.append(p)
    return _repair(starts, prices)


def _repair(starts: list[int], prices: list[float], rng: Optional[np.random.Generator] = None) -> PriceChromosome:
    # adjacent equal prices are one segment
    s2, p2 = [starts[0]], [prices[0]]
    for s, p in zip(starts[1:], prices[1:]):
        if p == p2[-1]:
            continue
        s2.append(s)
        p2.append(p)
    while len(s2) > MAX_SEGMENTS:
        j = int(rng.integers(1, len(s2))) if rng is not None else len(s2) - 1
        del s2[j], p2[j]
    return PriceChromosome(tuple(s2), tuple(p2))


def mutate(c: PriceChromosome, rate: float, rng: np.random.Generator, g: GridParams) -> PriceChromosome:
    sigma = PRICE_SIGMA_SHARE * (g.price_cap - g.price_floor)
    starts = list(c.starts)
    prices = [
        _clip(p + rng.normal(0.0, sigma), g) if rng.random() < rate else p for p in c.prices
    ]
    if rng.random() < rate:
        bounds = starts + [HORIZON]
        splittable = [k for k in range(len(starts)) if bounds[k + 1] - bounds[k] >= 2]
        if len(starts) < MAX_SEGMENTS and splittable and (len(starts) <= MIN_EVOLVED_SEGMENTS or rng.random() < 0.5):
            k = splittable[int(rng.integers(len(splittable)))]
            at = int(rng.integers(bounds[k] + 1, bounds[k + 1]))
            starts.insert(k + 1, at)
            prices.insert(k + 1, _clip(prices[k] + rng.normal(0.0, 4 * sigma), g))
        elif len(starts) > MIN_EVOLVED_SEGMENTS:
            j = int(rng.integers(1, len(starts)))
            del starts[j], prices[j]
    out = _repair(starts, prices, rng)
    if len(out) < MIN_EVOLVED_SEGMENTS:
        # a merge of equal neighbours collapsed the schedule; reopen one boundary
        at = int(rng.integers(1, HORIZON))
        out = PriceChromosome((0, at), (out.prices[0], _clip(out.prices[0] + rng.normal(0.0, 4 * sigma), g)))
    return out


@dataclass
class EvolveResult:
    best: PriceChromosome
    best_prices: np.ndarray
    best_cost: GridCost
    park: DispatchSolution
    trace: list[float]
    baseline_cost: Optional[float] = None
    evaluations: int = 0

    @property
    def best_fitness(self) -> float:
        return self.trace[-1]


class _Evaluator:
    def __init__(self, cfg: SystemConfig, flags: ScenarioFlags) -> None:
        self.cfg = cfg
        self.flags = flags
        self.cache: dict[tuple[float, ...], tuple[float, Optional[GridCost], Optional[DispatchSolution]]] = {}
        self.solves = 0

    def __call__(self, c: PriceChromosome):
        vec = decode_chromosome(c).values
        if vec not in self.cache:
            self.solves += 1
            try:
                park = dispatch(self.cfg, self.flags, np.array(vec))
                cost = grid_cost(vec, park, self.cfg.grid, self.cfg.profiles.urban_load.values)
                self.cache[vec] = (cost.total, cost, park)
            except (DispatchInfeasible, DispatchUnbounded, GridCapacityError):
                self.cache[vec] = (PENALTY, None, None)
        return self.cache[vec]


def _tournament(fit: list[float], rng: np.random.Generator) -> int:
    i, j = rng.integers(len(fit), size=2)
    return int(i) if fit[i] <= fit[j] else int(j)


def evolve(
    ga: GaConfig,
    cfg: SystemConfig,
    flags: ScenarioFlags = ScenarioFlags.from_scenario(4),
    initial: Optional[Sequence[PriceChromosome]] = None,
    on_generation: Optional[Callable[[int, float], None]] = None,
) -> EvolveResult:
    """Search grid price chromosomes minimizing the grid-side cost.

    The configured TOU schedule seeds the first population unless ``initial``
    is given, so the result never loses to that schedule. Random streams are
    keyed by (seed, generation, individual).
    """
    if ga.population < 4:
        raise ValueError("population must be at least 4")
    if ga.generations < 1:
        raise ValueError("generations must be at least 1")
    g = cfg.grid
    evaluate = _Evaluator(cfg, flags)
    if initial is not None:
        pop = list(initial)[: ga.population]
        if not pop:
            raise ValueError("initial population is empty")
        while len(pop) < ga.population:
            pop.append(pop[len(pop) % len(initial)])
    else:
        pop = [PriceChromosome.from_schedule(cfg.tou)]
        pop += [random_chromosome(make_rng(ga.seed, 0, i), g) for i in range(1, ga.population)]
    for c in pop:
        if not c.within(g.price_floor, g.price_cap):
            raise ValueError("initial chromosome outside the price floor/cap")
    baseline = evaluate(PriceChromosome.from_schedule(cfg.tou))[0] if initial is None else None

    trace: list[float] = []
    best_c: Optional[PriceChromosome] = None
    best_f = math.inf
    stall = 0
    for gen in range(ga.generations):
        fit = [evaluate(c)[0] for c in pop]
        if all(f >= PENALTY for f in fit):
            raise AllPenalizedError(f"generation {gen}: the park dispatch failed for every price chromosome")
        k = int(np.argmin(fit))
        prev = best_f
        if fit[k] < best_f:
            best_f, best_c = fit[k], pop[k]
        trace.append(best_f)
        if on_generation is not None:
            on_generation(gen, best_f)
        stall = stall + 1 if math.isfinite(prev) and prev - best_f <= ga.tolerance * max(1.0, abs(prev)) else 0
        if stall >= ga.patience or gen == ga.generations - 1:
            break
        children = [best_c]
        for idx in range(1, ga.population):
            rng = make_rng(ga.seed, gen + 1, idx)
            a = pop[_tournament(fit, rng)]
            b = pop[_tournament(fit, rng)]
            child = crossover(a, b, int(rng.integers(1, HORIZON))) if rng.random() < ga.crossover_rate else a
            if ga.mutation_rate > 0:
                child = mutate(child, ga.mutation_rate, rng, g)
            children.append(child)
        pop = children

    _, cost, park = evaluate(best_c)
    return EvolveResult(
        best=best_c,
        best_prices=np.array(decode_chromosome(best_c).values),
        best_cost=cost,
        park=park,
        trace=trace,
        baseline_cost=baseline,
        evaluations=evaluate.solves,
    )
