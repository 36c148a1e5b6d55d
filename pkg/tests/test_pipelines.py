import datetime as dt

import numpy as np
import pandas as pd
import pytest

from ticktca.errors import InsufficientDataError
from ticktca.marketdata import DEFAULT_WINDOWS, SampleWindow
from ticktca.pipelines import (CostMetric, Lag, bucket_effects, build_panel, cost_regressions, regression_rows,
                               slice_panel, stationarity_screen, trend_screen, volume_regressions)
from ticktca.synth import generate_volume_panel, trading_days

WIN = {w.label: w for w in DEFAULT_WINDOWS}
COEFS = {"const": 5e5, "spread": -2e4, "trades": 40.0, "spread_over_price": 3e6, "d_inv_price": 1e7,
         "d_usd_jpy": 500.0}
ALL_DAYS = SampleWindow("ALL", dt.date(2013, 1, 1), dt.date(2016, 12, 31))


def synthetic_panel(n_sec=6, n_days=300, seed=0, spread_noise=True):
    """Random-walk prices, stationary spreads, a shared FX walk."""
    g = np.random.default_rng(seed)
    days = trading_days(dt.date(2013, 7, 1), dt.date(2015, 12, 31))[:n_days].astype("datetime64[ns]")
    fx = 100 * np.exp(np.cumsum(0.005 * g.standard_normal(n_days)))
    frames = []
    for i in range(n_sec):
        close = 2000 * np.exp(np.cumsum(0.02 * g.standard_normal(n_days)))
        spread = 2.0 + (0.3 * g.standard_normal(n_days) if spread_noise else 0.0)
        trades = np.round(1000 * np.exp(0.2 * g.standard_normal(n_days)))
        frames.append(pd.DataFrame({"security_id": f"S{i}", "date": days, "close": close,
                                    "spread": np.abs(spread) + 0.1, "volume": trades * 100, "trades": trades,
                                    "usd_jpy": fx}))
    return build_panel(pd.concat(frames, ignore_index=True))


# -- screens ------------------------------------------------------------------

def test_stationarity_pattern():
    panel = synthetic_panel()
    win = (ALL_DAYS,)
    s = stationarity_screen(panel, win, variables=("price", "spread"))
    assert s.table.value("price", "ALL", "ADF") <= 1
    assert s.table.value("spread", "ALL", "ADF") >= 5
    assert s.differenced == {"price": True, "spread": False}
    d = stationarity_screen(panel, win, variables=("price",), difference=("price",))
    assert d.table.value("price", "ALL", "ADF") >= 5
    assert set(s.details.columns) == {"security_id", "variable", "sample", "test", "statistic", "p_value",
                                      "reject_5pct"}


def test_stationarity_single_security_and_skips():
    panel = synthetic_panel(n_sec=1)
    s = stationarity_screen(panel, (ALL_DAYS, SampleWindow("tiny", dt.date(2013, 7, 1), dt.date(2013, 7, 10))),
                            variables=("spread",))
    assert s.table["spread", "ALL", "KPSS"].n == 1
    cell = s.table["spread", "tiny", "ADF"]
    assert cell.value is None and "too short" in cell.skipped


def test_trend_screen_flat_and_dual_runs():
    panel = synthetic_panel(n_sec=3, spread_noise=False)
    t = trend_screen(panel, DEFAULT_WINDOWS, variables=("spread",))
    assert t.table.value("spread", "S1", "increasing") == 0
    assert ("spread", "S3@2014-10-30", "increasing") in t.table.cells
    assert ("spread", "S3", "increasing") in t.table.cells


def test_trend_screen_outlier_only_in_full_run(world):
    t = trend_screen(world.panel, DEFAULT_WINDOWS, variables=("spread",))
    full = t.table["spread", "S3", "increasing"]
    cut = t.table["spread", "S3@2014-10-30", "increasing"]
    assert full.value / full.n > 0.9
    assert cut.value / cut.n < 0.7
    assert t.table.value("spread", "S4", "increasing") / t.table["spread", "S4", "increasing"].n < 0.5


# -- volume regressions -------------------------------------------------------

def test_volume_zero_noise_recovery():
    panel = build_panel(generate_volume_panel(COEFS, n_securities=8, n_days=120))
    for variant in (1,):
        r = volume_regressions(panel, ALL_DAYS, variant, differenced={"inv_price", "usd_jpy"})
        for k, b in COEFS.items():
            assert r[k] == pytest.approx(b, rel=1e-6)


def test_volume_lagged_recovery():
    panel = build_panel(generate_volume_panel(COEFS, n_securities=8, n_days=120, lag=1))
    r = volume_regressions(panel, ALL_DAYS, 1, Lag.ONE_DAY, differenced={"inv_price", "usd_jpy"})
    for k, b in COEFS.items():
        assert r[k] == pytest.approx(b, rel=1e-6)


def test_volume_signs_with_noise():
    panel = build_panel(generate_volume_panel(COEFS, n_securities=10, n_days=200, noise=5e4, seed=4))
    r = volume_regressions(panel, ALL_DAYS, 1, differenced={"inv_price", "usd_jpy"})
    assert r["spread"] < 0 and r["trades"] > 0
    assert r.row("spread")["p_value"] < 0.01 and r.row("trades")["p_value"] < 0.01


def test_volume_variants_and_lag_parsing():
    panel = synthetic_panel()
    assert "trades" not in volume_regressions(panel, ALL_DAYS, 2).names
    assert volume_regressions(panel, ALL_DAYS, 3).names == volume_regressions(panel, ALL_DAYS, 2).names
    assert Lag.parse("1w") is Lag.ONE_WEEK and Lag.parse(None) is Lag.NONE and Lag.parse(1) is Lag.ONE_DAY
    assert volume_regressions(panel, ALL_DAYS, 1, "1w").n_obs < volume_regressions(panel, ALL_DAYS, 1).n_obs


def test_slicing_commutes():
    panel = synthetic_panel()
    w = SampleWindow("mid", dt.date(2013, 10, 1), dt.date(2014, 3, 31))
    a = volume_regressions(panel, w, 1, Lag.ONE_WEEK)
    b = volume_regressions(slice_panel(panel, w), w, 1, Lag.ONE_WEEK)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)


def test_demeaned_fit_runs():
    panel = build_panel(generate_volume_panel(COEFS, n_securities=8, n_days=120))
    r = volume_regressions(panel, ALL_DAYS, 1, differenced={"inv_price", "usd_jpy"}, demean=True)
    assert r["spread"] == pytest.approx(COEFS["spread"], rel=1e-6)


# -- cost regressions ---------------------------------------------------------

@pytest.fixture(scope="module")
def regs(world):
    return world.regressors()


@pytest.mark.parametrize("sample", ["S2", "S3", "S5"])
def test_scheme_a_top_bucket_effect(world, regs, sample):
    s1 = bucket_effects(cost_regressions(world.costs, regs, WIN["S1"], "MI", "A").result)["10MM+"]
    later = bucket_effects(cost_regressions(world.costs, regs, WIN[sample], "MI", "A").result)["10MM+"]
    assert later - s1 == pytest.approx(-10.0, abs=2.0)


def test_scheme_b_relocates(world, regs):
    s1 = bucket_effects(cost_regressions(world.costs, regs, WIN["S1"], "MI", "B").result)
    s5 = bucket_effects(cost_regressions(world.costs, regs, WIN["S5"], "MI", "B").result)
    assert s5["10-25MM"] - s1["10-25MM"] == pytest.approx(-10.0, abs=2.0)
    assert s5["25MM+"] - s1["25MM+"] == pytest.approx(-10.0, abs=2.0)
    assert s5["1-10MM"] - s1["1-10MM"] == pytest.approx(0.0, abs=2.0)


def test_additivity(small_world):
    regs = small_world.regressors()
    fits = {m: cost_regressions(small_world.costs, regs, WIN["SF"], m, "A").result for m in CostMetric}
    np.testing.assert_allclose(fits["IS"].coefficients, fits["MI"].coefficients + fits["MT"].coefficients,
                               rtol=1e-8, atol=1e-8)


def test_dummy_trap_free(small_world):
    res = cost_regressions(small_world.costs, small_world.regressors(), WIN["SF"], "MI", "B").result
    assert "notional:0-1MM" not in res.names and "liq:0-1%" not in res.names
    assert sum(n.startswith("notional:") for n in res.names) == 3


def test_all_equal_costs(small_world):
    costs = small_world.costs.assign(mi_bps=7.0)
    res = cost_regressions(costs, small_world.regressors(), WIN["SF"], "MI", "A").result
    effects = bucket_effects(res) | bucket_effects(res, "liq:")
    assert max(abs(v) for v in effects.values()) < 1e-8


def test_empty_bucket_dropped_with_warning(small_world):
    costs = small_world.costs[small_world.costs["notional_usd"] < 10e6]
    fit = cost_regressions(costs, small_world.regressors(), WIN["SF"], "MI", "A")
    assert "notional:10MM+" in fit.dropped
    assert any("notional:10MM+" in w for w in fit.warnings)
    assert "notional:10MM+" not in fit.result.names


def test_interactions_and_rows(small_world):
    fit = cost_regressions(small_world.costs, small_world.regressors(), WIN["SF"], "MT", "A",
                           include_interactions=True)
    assert any("×" in n for n in fit.result.names)
    rows = regression_rows("cost", "SF", "MT|A", fit.result)
    assert len(rows) == len(fit.result.names) and rows[0]["regressor"] == "const"


def test_cost_regression_empty_sample(small_world):
    with pytest.raises(InsufficientDataError):
        cost_regressions(small_world.costs, small_world.regressors(),
                         SampleWindow("none", dt.date(2020, 1, 1), dt.date(2020, 2, 1)))
