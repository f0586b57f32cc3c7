import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ries_opt.core import ConfigError, ScenarioFlags
from ries_opt.dispatch import dispatch
from ries_opt.sensitivity import (
    PARAMETERS,
    ParameterResult,
    Sample,
    SweepSpec,
    classify_and_rank,
    parse_params,
    pearson,
    run_sensitivity,
    summarize,
    sweep,
)


def test_pearson_hand_cases():
    x = [0.0, 1.0, 2.0, 3.0]
    assert pearson(x, [2 * v + 1 for v in x]) == pytest.approx(1.0)
    assert pearson(x, [-3 * v for v in x]) == pytest.approx(-1.0)
    assert pearson([0, 1, 2], [1, 0, 1]) == pytest.approx(0.0, abs=1e-15)
    assert pearson(x, [5.0] * 4) is None


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=12), st.floats(0.1, 10), st.floats(-5, 5))
def test_pearson_affine_invariant(ys, scale, shift):
    x = list(range(len(ys)))
    r = pearson(x, ys)
    r2 = pearson([scale * v + shift for v in x], ys)
    if r is None:
        assert r2 is None
    else:
        assert -1.0 <= r <= 1.0
        assert r2 == pytest.approx(r, abs=1e-9)


def test_pearson_length_mismatch():
    with pytest.raises(ValueError):
        pearson([1, 2, 3], [1, 2])


def test_parameter_table():
    assert len(PARAMETERS) == 27
    assert [PARAMETERS[f"F{i}"].path for i in range(1, 5)] == [
        "gt.eta_e", "gb.eta_h", "pyrolysis.eta_pf", "pyrolysis.eta_pg",
    ]
    assert PARAMETERS["F5"].path == "carbon.f_grid"
    assert PARAMETERS["F6"].path == "network.thermal_loss_rate"


def test_parse_params():
    assert len(parse_params("all")) == 27
    assert [s.param for s in parse_params("f1, F5")] == ["F1", "F5"]
    with pytest.raises(ConfigError):
        parse_params("F1,F99")


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec("X", "gt.eta_e", "x", 0.4, 0.3)
    with pytest.raises(ValueError):
        SweepSpec("X", "gt.eta_e", "x", 0.3, 0.4, 2)


def test_zero_effect_parameter_is_flat(cfg):
    spec = SweepSpec("P", "p2g.specific_consumption", "placeholder", 0.0, 1.0, 3)
    res = summarize(spec, sweep(spec, cfg))
    ys = [s.emissions for s in res.samples]
    assert max(ys) - min(ys) == pytest.approx(0.0, abs=1e-6)
    assert res.r is None and res.spread == 0.0


def test_turbine_efficiency_sweep_decreasing(cfg):
    ys = [s.emissions for s in sweep(SweepSpec("X", "gt.eta_e", "x", 0.25, 0.35, 11), cfg)]
    assert all(b < a for a, b in zip(ys, ys[1:]))


def test_two_point_sweep_matches_direct_solves(cfg):
    flags = ScenarioFlags.from_scenario(4)
    spec = SweepSpec("X", "gt.eta_e", "x", 0.25, 0.35, 3)
    got = [s.emissions for s in sweep(spec, cfg, flags)]
    for v, e in zip((0.25, 0.35), (got[0], got[-1])):
        assert e == dispatch(cfg.with_value("gt.eta_e", v), flags).emissions


def test_full_sweep_reproducible_and_pure(cfg):
    flags = ScenarioFlags.from_scenario(4)
    before = dispatch(cfg, flags).to_csv()
    a = sweep(PARAMETERS["F1"], cfg)
    b = sweep(PARAMETERS["F1"], cfg, workers=3)
    assert a == b
    assert dispatch(cfg, flags).to_csv() == before


def test_infeasible_sample_is_missing(cfg):
    # a vanishing grid connection with a tiny turbine cannot serve the load
    base = cfg.with_value("network.grid_import_max", 0.0)
    spec = SweepSpec("X", "gt.capacity", "x", 1.0, 20000.0, 3)
    samples = sweep(spec, base)
    assert samples[0].emissions is None
    assert summarize(spec, samples).missing >= 1


def _result(name, spread, r=-1.0):
    spec = SweepSpec(name, "gt.eta_e", name, 0.0, 1.0, 3)
    return ParameterResult(spec, (Sample(0.0, 0.0, 1.0),), r, spread)


def test_rank_order_and_classes():
    rep = classify_and_rank([_result("F3", 10.0), _result("F1", 100.0), _result("F2", 100.0, -0.5), _result("F9", 0.0, None)])
    assert [r.spec.param for r in rep.results] == ["F1", "F2", "F3", "F9"]
    assert [r.rank for r in rep.results] == [1, 2, 3, 4]
    assert rep.high() == ["F1", "F2"]


def test_rank_invariant_to_range_rescaling(cfg):
    specs = [PARAMETERS[k].with_samples(3) for k in ("F1", "F6", "F16")]
    order = [r.spec.param for r in run_sensitivity(cfg, specs, samples=3).results]
    ys = {k: [s.emissions for s in sweep(PARAMETERS[k].with_samples(3), cfg)] for k in ("F1", "F6", "F16")}
    # affine maps of x leave r and the emission spread unchanged
    for k, y in ys.items():
        r = pearson([0, 0.5, 1], y)
        r2 = pearson([10, 15, 20], y)
        assert (r is None and r2 is None) or r == pytest.approx(r2)
    assert order == sorted(order, key=lambda k: -(max(ys[k]) - min(ys[k])))


def test_report_shape(cfg):
    rep = run_sensitivity(cfg, [PARAMETERS["F5"], PARAMETERS["F6"]], samples=3)
    d = rep.as_dict()["parameters"]
    assert {p["param"] for p in d} == {"F5", "F6"}
    assert all(p["pearson_r"] > 0 for p in d)
    assert np.isfinite([p["spread_kg"] for p in d]).all()
