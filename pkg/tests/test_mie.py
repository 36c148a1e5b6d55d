import datetime as dt

import numpy as np
import pytest

from ticktca.errors import DataError, InsufficientDataError, ValidationError
from ticktca.marketdata import Fill, Order, SecurityDay, Side
from ticktca.mie import (MarketProfile, SimParams, Style, TickSchedule, TopixTickCalendar, build_profile,
                         calibration_error, estimate_market_impact, simulate_path, TSE_STANDARD)
from ticktca.tca import MIMode, market_impact

START = dt.date(2014, 3, 3)


def history(closes, volume=1_000_000.0, sid="7203"):
    return [SecurityDay(sid, START + dt.timedelta(days=i), c, 1.0, volume, 100) for i, c in enumerate(closes)]


def degenerate(volume=1e6):
    return MarketProfile("X", 5, np.full(5, volume / 10), np.zeros(4), tick_size=1.0, reference_price=100.0)


def noisy_profile(seed=0):
    g = np.random.default_rng(seed)
    closes = 2000 * np.exp(np.cumsum(0.015 * g.standard_normal(21)))
    vols = 1e6 * np.exp(0.4 * g.standard_normal(21))
    hist = [SecurityDay("7203", START + dt.timedelta(days=i), c, 1.0, v, 100) for i, (c, v) in
            enumerate(zip(closes, vols))]
    return build_profile(hist, 20, tick=1.0)


def test_profile_examples():
    p = build_profile(history([100.0] * 5), 5, tick=1.0)
    np.testing.assert_array_equal(p.volume_dist, np.full(5, 100_000.0))
    np.testing.assert_array_equal(p.move_dist, np.zeros(4))
    with pytest.raises(InsufficientDataError, match="need 5 days"):
        build_profile(history([100.0] * 3), 5)
    with pytest.raises(ValidationError):
        build_profile(history([100.0] * 3) + history([100.0] * 3, sid="6758"), 3)


def test_profile_uses_last_days_and_moves_scale():
    p = build_profile(history([100.0, 110.0, 120.0, 100.0]), 2, tick=1.0, intervals_per_day=4)
    np.testing.assert_allclose(p.move_dist, [-10.0])
    assert p.reference_price == 100.0


def test_tick_schedules():
    cal = TopixTickCalendar()
    assert cal.tick(2500, dt.date(2014, 1, 10)) == 1
    assert cal.tick(4000, dt.date(2014, 1, 10)) == 5
    assert cal.tick(4000, dt.date(2014, 1, 14)) == 1
    assert cal.tick(2500, dt.date(2014, 7, 22)) == 0.5
    assert cal.tick(800, dt.date(2014, 7, 22)) == 0.1
    assert TickSchedule(TSE_STANDARD).tick(3000) == 1
    with pytest.raises(ValidationError):
        TickSchedule(TSE_STANDARD).tick(0)


def test_zero_size():
    r = estimate_market_impact(0, noisy_profile(), SimParams(n_paths=20))
    assert (r.mean_bps, r.stdev_bps) == (0.0, 0.0)


def test_degenerate_single_fill_is_one_tick():
    r = estimate_market_impact(10_000, degenerate(), SimParams(n_paths=50))
    assert r.mean_bps == 100.0
    assert r.stdev_bps == 0.0
    assert r.mean_executions == 1.0


def test_degenerate_three_fills():
    # each fill crosses one tick above a mid pushed by 1 tick plus 0.1 tick per 1e5 shares executed (1e6 per interval)
    r = estimate_market_impact(300_000, degenerate(volume=1e7), SimParams(n_paths=5))
    assert r.mean_executions == 3
    assert r.mean_bps == pytest.approx(110.0, rel=1e-12)
    assert r.stdev_bps == 0.0


def test_passive_degenerate_costs_nothing_up_front():
    r = estimate_market_impact(10_000, degenerate(), SimParams(n_paths=5, style=Style.PASSIVE))
    assert r.mean_bps == 0.0


@pytest.mark.parametrize("style", list(Style))
@pytest.mark.parametrize("side", list(Side))
@pytest.mark.parametrize("seed", [0, 7])
def test_monotone_in_size(style, side, seed):
    profile = noisy_profile(seed)
    params = SimParams(n_paths=40, seed=seed, style=style, side=side)
    sizes = [0, 1, 1_000, 10_000, 50_000, 100_000, 200_000, 400_000]
    means = [estimate_market_impact(s, profile, params).mean_bps for s in sizes]
    assert all(b >= a for a, b in zip(means, means[1:])), means


def test_deterministic_bits():
    profile, params = noisy_profile(3), SimParams(n_paths=30, seed=11)
    a = estimate_market_impact(150_000, profile, params)
    b = estimate_market_impact(150_000, profile, params)
    assert repr(a) == repr(b)
    c = estimate_market_impact(150_000, profile, SimParams(n_paths=30, seed=12))
    assert c != a


def test_paths_replay_through_tca():
    profile = noisy_profile(5)
    for side in Side:
        params = SimParams(n_paths=1, seed=2, side=side)
        path = simulate_path(250_000, profile, params, 0)
        order = Order("sim", "7203", side, START, profile.reference_price, float(path.shares.sum()),
                      tuple(Fill(i + 1, p, q) for i, (p, q) in enumerate(zip(path.prices, path.shares))))
        assert market_impact(order, MIMode.STANDARD)[0] == pytest.approx(path.impact_ccy, rel=1e-12, abs=1e-9)


def test_stdev_shrinks_to_zero_with_degenerate_inputs():
    g = np.random.default_rng(0)
    spread = [estimate_market_impact(
        200_000, MarketProfile("X", 10, np.full(10, 1e5), s * g.standard_normal(9), 1.0, 100.0),
        SimParams(n_paths=60)).stdev_bps for s in (2.0, 0.2, 0.0)]
    assert spread[0] > spread[1] > spread[2] == 0.0


def test_errors():
    with pytest.raises(ValidationError):
        estimate_market_impact(-1, degenerate(), SimParams(n_paths=2))
    with pytest.raises(DataError):
        estimate_market_impact(10, degenerate(volume=0.0), SimParams(n_paths=2))
    with pytest.raises(DataError):
        MarketProfile("X", 2, np.array([]), np.zeros(1), 1.0, 100.0)
    with pytest.raises(ValidationError):
        SimParams(start_frac=0.5, end_frac=0.5)
    with pytest.raises(ValidationError):
        SimParams(participation_rate=0)


def test_window_restricts_intervals():
    assert list(SimParams(start_frac=0.25, end_frac=0.75).window(10)) == [3, 4, 5, 6, 7]
    assert list(SimParams().window(10)) == list(range(10))


def test_calibration_error():
    assert calibration_error([10, 20], [12, 16]) == 3.0
    assert calibration_error([5.0, 5.0], [5.0, 5.0]) == 0.0
    with pytest.raises(ValidationError):
        calibration_error([], [])
    with pytest.raises(ValidationError):
        calibration_error([1.0], [1.0, 2.0])
