"""Market impact estimate: Monte-Carlo simulation of an order's fills.

A path walks through intraday intervals. Each interval draws a tradable
volume and a mid-price move from the security's recent empirical
distributions; the mid moves only between executions, by one drawn
interval move per execution. Inside the trading window the order takes a fixed share of
the interval volume, crossing ``style`` ticks beyond the mid. After each
fill the mid is pushed permanently by the ticks crossed plus a depletion
term proportional to the order's cumulative execution measured in average
interval volumes. Impact is accumulated fill by fill with the same rule as
:func:`ticktca.tca.market_impact` in standard mode.

The reported mean averages, for every fill, the expected adverse move
over the whole move distribution instead of the single drawn move (a
conditional-expectation estimator with the same expectation). Because the
own-impact push only grows along an order, the expected cost per share is
non-decreasing in its position and so is the mean bps in order size, path
by path. The reported stdev comes from the drawn paths.

Paths draw from independent substreams keyed by ``(seed, path_index)``, so
results do not depend on evaluation order and sizes evaluated with the
same seed share their random numbers.
"""

from __future__ import annotations

import datetime as dt
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DataError, InsufficientDataError, ValidationError
from .marketdata import SecurityDay, Side

# (upper price bound inclusive, tick) bands; the last band is open-ended
_INF = math.inf
TSE_STANDARD = ((3000, 1), (5000, 5), (30000, 10), (50000, 50), (300000, 100), (500000, 500),
                (3e6, 1000), (5e6, 5000), (3e7, 10000), (5e7, 50000), (_INF, 100000))
TOPIX100_PHASE1 = ((3000, 1), (10000, 1), (30000, 5), (100000, 10), (300000, 50), (1e6, 100),
                   (3e6, 500), (1e7, 1000), (3e7, 5000), (_INF, 10000))
TOPIX100_PHASE2 = ((1000, 0.1), (3000, 0.5), (10000, 1), (30000, 5), (100000, 10), (300000, 50),
                   (1e6, 100), (3e6, 500), (1e7, 1000), (3e7, 5000), (_INF, 10000))


@dataclass(frozen=True)
class TickSchedule:
    bands: tuple[tuple[float, float], ...]

    def tick(self, price: float) -> float:
        if not price > 0:
            raise ValidationError("price must be > 0")
        for upper, size in self.bands:
            if price <= upper:
                return float(size)
        return float(self.bands[-1][1])


class TopixTickCalendar:
    """Tick schedule in force for TOPIX 100 names on a given date."""

    def __init__(self, phase1: dt.date = dt.date(2014, 1, 14), phase2: dt.date = dt.date(2014, 7, 22)):
        self.phase1, self.phase2 = phase1, phase2

    def schedule(self, day: dt.date) -> TickSchedule:
        if day >= self.phase2:
            return TickSchedule(TOPIX100_PHASE2)
        if day >= self.phase1:
            return TickSchedule(TOPIX100_PHASE1)
        return TickSchedule(TSE_STANDARD)

    def tick(self, price: float, day: dt.date) -> float:
        return self.schedule(day).tick(price)


class Style(str, Enum):
    PASSIVE = "Passive"
    NEUTRAL = "Neutral"
    AGGRESSIVE = "Aggressive"

    @property
    def ticks(self) -> int:
        return {"Passive": 0, "Neutral": 1, "Aggressive": 2}[self.value]


@dataclass(frozen=True)
class MarketProfile:
    security_id: str
    lookback_days: int
    volume_dist: np.ndarray
    move_dist: np.ndarray
    tick_size: float
    reference_price: float
    intervals_per_day: int = 10

    def __post_init__(self):
        if len(self.volume_dist) == 0 or len(self.move_dist) == 0:
            raise DataError("empty market profile")
        if not self.tick_size > 0:
            raise ValidationError("tick_size must be > 0")
        if not self.reference_price > 0:
            raise ValidationError("reference_price must be > 0")

    @property
    def mean_interval_volume(self) -> float:
        return float(np.mean(self.volume_dist))


@dataclass(frozen=True)
class SimParams:
    participation_rate: float = 0.1
    style: Style = Style.NEUTRAL
    start_frac: float = 0.0
    end_frac: float = 1.0
    n_paths: int = 1000
    seed: int = 0
    side: Side = Side.BUY
    depletion_ticks: float = 1.0
    max_days: int = 60

    def __post_init__(self):
        if not 0 < self.participation_rate <= 1:
            raise ValidationError("participation_rate must be in (0, 1]")
        if not 0 <= self.start_frac < self.end_frac <= 1:
            raise ValidationError("need 0 <= start_frac < end_frac <= 1")
        if self.n_paths < 1:
            raise ValidationError("n_paths must be >= 1")
        if self.depletion_ticks < 0:
            raise ValidationError("depletion_ticks must be >= 0")
        object.__setattr__(self, "style", Style(self.style))

    def window(self, intervals: int) -> range:
        lo = math.ceil(self.start_frac * intervals - 1e-12)
        hi = math.ceil(self.end_frac * intervals - 1e-12)
        if hi <= lo:
            raise ValidationError(f"trading window [{self.start_frac}, {self.end_frac}) holds no interval")
        return range(lo, hi)


@dataclass(frozen=True)
class MieResult:
    mean_bps: float
    stdev_bps: float
    mean_executions: float
    n_paths: int


@dataclass(frozen=True)
class SimPath:
    """One simulated path: its fills and accumulated impact."""

    prices: np.ndarray
    shares: np.ndarray
    impact_ccy: float
    expected_cost_per_share: float


def build_profile(history: Sequence[SecurityDay], lookback_days: int, tick=None,
                  intervals_per_day: int = 10) -> MarketProfile:
    """Empirical profile from the last ``lookback_days`` of one security's history.

    Daily volume is split evenly over ``intervals_per_day``; daily
    close-to-close changes are scaled to one interval by ``sqrt(1/intervals)``.
    ``tick`` is a :class:`TickSchedule`, a :class:`TopixTickCalendar` or a
    number; calendars are evaluated at the last history date.
    """
    if lookback_days < 2:
        raise ValidationError("lookback_days must be >= 2")
    if intervals_per_day < 1:
        raise ValidationError("intervals_per_day must be >= 1")
    hist = sorted(history, key=lambda r: r.date)
    if len({r.security_id for r in hist}) > 1:
        raise ValidationError("history must cover a single security")
    if len(hist) < lookback_days:
        raise InsufficientDataError(f"need {lookback_days} days of history, got {len(hist)}")
    recent = hist[-lookback_days:]
    closes = np.array([r.close_price for r in recent])
    volumes = np.array([r.volume for r in recent], dtype=float)
    last = recent[-1]
    if tick is None:
        tick = TopixTickCalendar()
    if isinstance(tick, TopixTickCalendar):
        tick_size = tick.tick(last.close_price, last.date)
    elif isinstance(tick, TickSchedule):
        tick_size = tick.tick(last.close_price)
    else:
        tick_size = float(tick)
    return MarketProfile(
        security_id=last.security_id,
        lookback_days=lookback_days,
        volume_dist=volumes / intervals_per_day,
        move_dist=np.diff(closes) * math.sqrt(1.0 / intervals_per_day),
        tick_size=tick_size,
        reference_price=last.close_price,
        intervals_per_day=intervals_per_day,
    )


def _path_rng(seed: int, path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), path]))


def simulate_path(order_size: float, profile: MarketProfile, params: SimParams, path: int) -> SimPath:
    rng = _path_rng(params.seed, path)
    sign = params.side.sign
    tick = profile.tick_size
    k0 = params.style.ticks
    vbar = profile.mean_interval_volume
    window = params.window(profile.intervals_per_day)
    n_int = profile.intervals_per_day
    block = n_int * 5

    adverse = np.sort(sign * profile.move_dist)
    tail = np.concatenate([np.cumsum(adverse[::-1])[::-1], [0.0]])
    n_moves = len(adverse)

    def expected_positive(c: float) -> float:
        # mean of max(m + c, 0) over the move distribution
        i = int(np.searchsorted(adverse, -c, side="right"))
        return (tail[i] + c * (n_moves - i)) / n_moves

    mid = profile.reference_price
    last_fill = profile.reference_price
    size = float(order_size)
    executed = impact = 0.0
    first_cost = expected_positive(tick * k0)
    prev_cost = first_cost
    increments = 0.0
    prices, shares = [], []
    k = 0
    filling = size > 0
    while filling:
        if k >= params.max_days * n_int:
            raise DataError(f"order of {order_size:g} shares not completed within {params.max_days} days")
        if k % block == 0:
            vols = rng.choice(profile.volume_dist, block)
            moves = rng.choice(profile.move_dist, block)
        i = k % block
        if (k % n_int) in window and vols[i] > 0:
            mid += moves[i]
            cap = params.participation_rate * vols[i]
            rest = size - executed
            q = rest if rest <= cap else cap
            filling = rest > cap
            price = mid + sign * tick * k0
            impact += max(sign * (price - last_fill), 0.0) * q
            if prices:
                # expected cost per share as the first fill's cost plus the
                # non-negative step at each later fill, weighted by the share
                # of the order still to trade; this keeps the sum monotone in
                # the order size even in floating point
                cost = max(expected_positive(push), prev_cost)
                increments += (cost - prev_cost) * (1.0 - executed / size)
                prev_cost = cost
            prices.append(price)
            shares.append(q)
            last_fill = price
            executed += q
            push = tick * (k0 + params.depletion_ticks * executed / vbar)
            mid += sign * push
        k += 1
    return SimPath(np.array(prices), np.array(shares), impact, first_cost + increments if prices else 0.0)


def estimate_market_impact(order_size: float, profile: MarketProfile, params: SimParams) -> MieResult:
    """Mean and spread of simulated impact in bps of ``order_size * reference_price``."""
    if order_size < 0:
        raise ValidationError("order_size must be >= 0")
    if profile.mean_interval_volume <= 0:
        raise DataError(f"{profile.security_id}: profile has no traded volume")
    if order_size == 0:
        return MieResult(0.0, 0.0, 0.0, params.n_paths)
    notional = order_size * profile.reference_price
    drawn = np.empty(params.n_paths)
    expected = np.empty(params.n_paths)
    execs = np.empty(params.n_paths)
    for p in range(params.n_paths):
        path = simulate_path(order_size, profile, params, p)
        drawn[p] = 1e4 * path.impact_ccy / notional
        expected[p] = 1e4 * path.expected_cost_per_share / profile.reference_price
        execs[p] = len(path.shares)
    stdev = float(drawn.std(ddof=1)) if params.n_paths > 1 and np.ptp(drawn) > 0 else 0.0
    return MieResult(float(expected.mean()), stdev, float(execs.mean()), params.n_paths)


def calibration_error(estimates: Sequence[float], realized: Sequence[float]) -> float:
    """Mean absolute difference in bps between paired estimated and realized impact."""
    est = np.asarray([getattr(e, "mean_bps", e) for e in estimates], dtype=float)
    real = np.asarray([getattr(r, "mi_bps", r) for r in realized], dtype=float)
    if len(est) == 0 or len(est) != len(real):
        raise ValidationError("need a non-empty one-to-one pairing of estimates and realized costs")
    return float(np.mean(np.abs(est - real)))
