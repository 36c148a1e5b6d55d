"""Seeded synthetic market and order generator with injectable event effects.

The generated data carries known ground truth: spreads and trade sizes step
down for affected names at each tick-size ex-date, and order fill paths are
built so that the impact decomposition recovers the configured impact cost
exactly. Everything is deterministic given ``SynthConfig.seed``.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import ValidationError
from .events import LIQUIDITY_BUCKETS, PHASES, EventPhase
from .marketdata import adjust_frame

# TSE closures between June 2013 and December 2014 that fall on weekdays
JP_HOLIDAYS = tuple(dt.date.fromisoformat(d) for d in (
    "2013-07-15", "2013-09-16", "2013-09-23", "2013-10-14", "2013-11-04", "2013-12-23",
    "2013-12-31", "2014-01-01", "2014-01-02", "2014-01-03", "2014-01-13", "2014-02-11",
    "2014-03-21", "2014-04-29", "2014-05-05", "2014-05-06", "2014-07-21", "2014-09-15",
    "2014-09-23", "2014-10-13", "2014-11-03", "2014-11-24", "2014-12-23", "2014-12-31",
))

# lower edges (MM USD) of the finest notional partition shared by both bucket schemes
NOTIONAL_CELLS_MM = (0.0, 1.0, 5.0, 10.0, 25.0)
_CELL_RANGES_MM = ((0.05, 1.0), (1.0, 5.0), (5.0, 10.0), (10.0, 25.0), (25.0, 60.0))


@dataclass
class CostModel:
    """Impact cost in bps, cost-positive.

    ``target = base + liquidity effect + notional effect + period effect + noise``,
    where the period effect is added to orders of at least
    ``effect_min_notional_mm`` from ``effect_start`` onwards.
    """

    base_bps: float = 30.0
    liquidity_effects_bps: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    notional_effects_bps: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0, 4.0)
    period_effect_bps: float = 10.0
    effect_start: dt.date = dt.date(2014, 1, 14)
    effect_min_notional_mm: float = 10.0
    noise_bps: float = 5.0
    noise_clip: float = 4.0
    timing_noise_bps: float = 15.0

    def validate(self) -> None:
        if len(self.liquidity_effects_bps) != len(LIQUIDITY_BUCKETS.labels):
            raise ValidationError("one liquidity effect per liquidity bucket")
        if len(self.notional_effects_bps) != len(NOTIONAL_CELLS_MM):
            raise ValidationError("one notional effect per notional cell")
        floor = (self.base_bps + min(self.liquidity_effects_bps) + min(self.notional_effects_bps)
                 + min(self.period_effect_bps, 0.0) - self.noise_clip * self.noise_bps)
        if floor < 0:
            raise ValidationError(f"cost model can produce negative impact targets (floor {floor:g} bps)")


@dataclass
class SynthConfig:
    n_securities: int = 100
    start: dt.date = dt.date(2013, 6, 28)
    end: dt.date = dt.date(2014, 12, 30)
    holidays: tuple[dt.date, ...] = JP_HOLIDAYS
    phases: tuple[EventPhase, ...] = PHASES
    spread_step_down: tuple[float, ...] = (0.5, 0.5)
    trade_size_step_down: tuple[float, ...] = (0.85, 0.9)
    volume_spread_elasticity: float = 0.3
    price_vol: float = 0.015
    price_median: float = 2500.0
    price_dispersion: float = 0.8
    spread_bps_range: tuple[float, float] = (4.0, 12.0)
    spread_noise: float = 0.05
    turnover_median_jpy: float = 2.0e10
    turnover_dispersion: float = 0.6
    volume_drift: float = 0.0
    volume_noise: float = 0.2
    trade_size_median: float = 1500.0
    fx_start: float = 100.0
    fx_vol: float = 0.005
    fx_drift: float = 0.0004
    n_splits: int = 3
    outlier: tuple[dt.date, float] | None = (dt.date(2014, 10, 31), 2.0)
    n_orders: int = 250_000
    max_fills: int = 10
    notional_weights: tuple[float, ...] = (0.40, 0.25, 0.15, 0.12, 0.08)
    cost: CostModel = field(default_factory=CostModel)
    seed: int = 20140114

    def validate(self) -> None:
        if self.n_securities < 1:
            raise ValidationError("n_securities must be >= 1")
        if self.start > self.end:
            raise ValidationError("start after end")
        if len(self.spread_step_down) != len(self.phases) or len(self.trade_size_step_down) != len(self.phases):
            raise ValidationError("one spread and trade-size factor per phase")
        if min(self.spread_step_down + self.trade_size_step_down) <= 0:
            raise ValidationError("step-down factors must be > 0")
        for ph in self.phases:
            if not self.start <= ph.ex_date <= self.end:
                raise ValidationError(f"{ph.label} ex-date outside the date range")
        if self.outlier is not None and not (self.start <= self.outlier[0] <= self.end and self.outlier[1] > 0):
            raise ValidationError("outlier date outside range or non-positive multiplier")
        if len(self.notional_weights) != len(NOTIONAL_CELLS_MM) or min(self.notional_weights) < 0:
            raise ValidationError("one non-negative weight per notional cell")
        if self.max_fills < 1 or self.n_orders < 0:
            raise ValidationError("max_fills must be >= 1 and n_orders >= 0")
        self.cost.validate()


@dataclass
class SynthMarket:
    """Raw (unadjusted) daily records plus the split and FX tables."""

    daily: pd.DataFrame
    splits: pd.DataFrame
    fx: pd.DataFrame
    affected: dict[str, frozenset[str]]
    adjusted_close: pd.DataFrame = field(repr=False)

    def dates(self) -> np.ndarray:
        return np.sort(self.daily["date"].unique())


@dataclass
class SynthOrders:
    orders: pd.DataFrame
    fills: pd.DataFrame
    truth: pd.DataFrame


def trading_days(start: dt.date, end: dt.date, holidays=JP_HOLIDAYS) -> np.ndarray:
    days = np.arange(np.datetime64(start), np.datetime64(end) + 1)
    days = days[np.is_busday(days)]
    return days[~np.isin(days, np.array(holidays, dtype="datetime64[D]"))]


def _streams(seed: int, *names: str) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: np.random.default_rng(c) for n, c in zip(names, children)}


def security_ids(n: int) -> list[str]:
    return [f"{1000 + 10 * i:04d}" if n <= 900 else f"S{i:05d}" for i in range(n)]


def generate_market(config: SynthConfig | None = None) -> SynthMarket:
    cfg = config or SynthConfig()
    cfg.validate()
    rng = _streams(cfg.seed, "price", "spread", "volume", "fx", "splits")
    days = trading_days(cfg.start, cfg.end, cfg.holidays)
    n_days, n_sec = len(days), cfg.n_securities
    sids = security_ids(n_sec)

    g = rng["price"]
    p_init = cfg.price_median * np.exp(cfg.price_dispersion * g.standard_normal(n_sec))
    p_init = np.clip(p_init, 200.0, 40000.0)
    steps = cfg.price_vol * g.standard_normal((n_sec, n_days))
    steps[:, 0] = 0.0
    close = p_init[:, None] * np.exp(np.cumsum(steps - 0.5 * cfg.price_vol**2, axis=1))
    close = np.round(close, 1)

    # regime factors switch on at each ex-date for names meeting the rule that day
    regime = np.ones((n_sec, n_days))
    size_regime = np.ones((n_sec, n_days))
    affected = {}
    for ph, sf, tf in zip(cfg.phases, cfg.spread_step_down, cfg.trade_size_step_down):
        ex = np.searchsorted(days, np.datetime64(ph.ex_date))
        if ex >= n_days or days[ex] != np.datetime64(ph.ex_date):
            raise ValidationError(f"{ph.label} ex-date {ph.ex_date} is not a trading day")
        hit = close[:, ex] > ph.threshold if ph.above else close[:, ex] < ph.threshold
        regime[hit, ex:] *= sf
        size_regime[hit, ex:] *= tf
        affected[ph.label] = frozenset(s for s, h in zip(sids, hit) if h)

    shock = np.ones(n_days)
    if cfg.outlier is not None:
        shock[days >= np.datetime64(cfg.outlier[0])] = cfg.outlier[1]

    g = rng["spread"]
    lo, hi = cfg.spread_bps_range
    spread_bps = g.uniform(lo, hi, n_sec)
    spread = (close * spread_bps[:, None] * 1e-4 * regime * shock
              * np.exp(cfg.spread_noise * g.standard_normal((n_sec, n_days))))
    spread = np.round(spread, 4)

    g = rng["volume"]
    turnover = cfg.turnover_median_jpy * np.exp(cfg.turnover_dispersion * g.standard_normal(n_sec))
    years = np.arange(n_days) / 245.0
    level = turnover[:, None] / close[:, 0:1] * np.exp(cfg.volume_drift * years)[None, :]
    volume = (level * regime ** (-cfg.volume_spread_elasticity) * np.sqrt(shock)
              * np.exp(cfg.volume_noise * g.standard_normal((n_sec, n_days))))
    tsize = (cfg.trade_size_median * np.exp(0.5 * g.standard_normal(n_sec))[:, None] * size_regime
             * np.exp(0.1 * g.standard_normal((n_sec, n_days))))
    trades = np.maximum(1, np.round(volume / tsize))

    g = rng["fx"]
    fx_days = np.arange(np.datetime64(cfg.start), np.datetime64(cfg.end) + 1)
    fx_days = fx_days[np.is_busday(fx_days)]
    fx = cfg.fx_start * np.exp(np.cumsum(cfg.fx_drift + cfg.fx_vol * g.standard_normal(len(fx_days))))
    fx = np.round(fx, 3)

    # splits: restate history before the ex-date on the pre-split share basis
    g = rng["splits"]
    n_splits = min(cfg.n_splits, n_sec)
    split_rows = []
    adj_close = close.copy()
    if n_splits and n_days > 20:
        who = np.sort(g.choice(n_sec, n_splits, replace=False))
        for i in who:
            ex = int(g.integers(10, n_days - 10))
            ratio = 2.0
            close[i, :ex] = close[i, :ex] * ratio
            spread[i, :ex] = spread[i, :ex] * ratio
            volume[i, :ex] = volume[i, :ex] / ratio
            split_rows.append((sids[i], pd.Timestamp(days[ex]), ratio))
    volume = np.maximum(np.round(volume), trades)

    daily = pd.DataFrame({
        "security_id": np.repeat(sids, n_days),
        "date": np.tile(days, n_sec).astype("datetime64[ns]"),
        "close": close.ravel(),
        "spread": spread.ravel(),
        "volume": volume.ravel(),
        "trades": trades.ravel().astype(np.int64),
    })
    splits = pd.DataFrame(split_rows, columns=["security_id", "ex_date", "ratio"])
    fx_frame = pd.DataFrame({"date": fx_days.astype("datetime64[ns]"), "usd_jpy": fx})
    adj = pd.DataFrame({"security_id": np.repeat(sids, n_days),
                        "date": np.tile(days, n_sec).astype("datetime64[ns]"), "close": adj_close.ravel()})
    return SynthMarket(daily, splits, fx_frame, affected, adj)


def _group_cumsum(values: np.ndarray, rank: np.ndarray, max_rank: int) -> tuple[np.ndarray, np.ndarray]:
    """Within-group running sums (inclusive and exclusive) for rows ordered by group then rank.

    Accumulates rank by rank so each sum only involves its own group's terms.
    """
    incl = values.astype(float).copy()
    for k in range(1, max_rank):
        at = np.flatnonzero(rank == k)
        incl[at] = incl[at - 1] + values[at]
    return incl, incl - values


def generate_orders(config: SynthConfig, market: SynthMarket, split_adjusted: bool = False) -> SynthOrders:
    """Orders, fills and ground-truth labels over ``market``.

    Notional cells are drawn first (log-uniform inside the cell) so every
    bucket is populated; security and date are uniform. Fill prices are then
    constructed so that the standard market impact equals the cost-model
    target and the timing residual follows a zero-mean draw where the path
    allows it (timing can exceed the carried impact only by going below
    arrival, never above).
    """
    cfg = config
    cfg.validate()
    cm = cfg.cost
    rng = _streams(cfg.seed + 1, "orders", "fills", "costs")
    g = rng["orders"]
    n = cfg.n_orders

    daily = market.daily
    if split_adjusted and len(market.splits):
        daily = adjust_frame(daily, market.splits)
    sids = daily["security_id"].unique()
    days = np.sort(daily["date"].unique())
    n_sec, n_days = len(sids), len(days)
    close = daily["close"].to_numpy().reshape(n_sec, n_days)
    volume = daily["volume"].to_numpy().reshape(n_sec, n_days)

    sec = g.integers(0, n_sec, n)
    day = g.integers(0, n_days, n)
    side = np.where(g.random(n) < 0.5, 1.0, -1.0)
    weights = np.asarray(cfg.notional_weights, dtype=float)
    cell = g.choice(len(weights), n, p=weights / weights.sum())
    lo = np.log(np.array([r[0] for r in _CELL_RANGES_MM]))[cell]
    hi = np.log(np.array([r[1] for r in _CELL_RANGES_MM]))[cell]
    notional_target = np.exp(g.uniform(lo, hi)) * 1e6

    fx = market.fx.set_index("date")["usd_jpy"]
    rate = fx.reindex(pd.DatetimeIndex(days)).ffill().to_numpy()[day]
    p0 = np.round(close[sec, day] * np.exp(0.003 * g.standard_normal(n)), 2)
    total = np.maximum(1.0, np.round(notional_target * rate / p0))
    day_vol = volume[sec, day]
    liq_pct = 100.0 * total / day_vol
    notional_usd = total * p0 / rate

    nf = 1 + g.poisson(1.0 + 2.0 * np.log10(1.0 + liq_pct))
    nf = np.minimum(np.minimum(nf, cfg.max_fills), total).astype(np.int64)

    # cost targets
    gc = rng["costs"]
    liq_idx = np.searchsorted(LIQUIDITY_BUCKETS.edges, liq_pct, side="right") - 1
    cell_idx = np.searchsorted(np.array(NOTIONAL_CELLS_MM) * 1e6, notional_usd, side="right") - 1
    period = ((days[day] >= np.datetime64(cm.effect_start))
              & (notional_usd >= cm.effect_min_notional_mm * 1e6)) * cm.period_effect_bps
    noise = np.clip(gc.standard_normal(n), -cm.noise_clip, cm.noise_clip) * cm.noise_bps
    mi_bps = (cm.base_bps + np.asarray(cm.liquidity_effects_bps)[liq_idx]
              + np.asarray(cm.notional_effects_bps)[cell_idx] + period + noise)
    timing_bps = cm.timing_noise_bps * gc.standard_normal(n)

    # fills: integer shares, at least one each, summing to the order size
    gf = rng["fills"]
    counts = nf
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    owner = np.repeat(np.arange(n), counts)
    m = len(owner)
    w = gf.exponential(size=m)
    wsum = np.bincount(owner, weights=w, minlength=n)
    seq = np.arange(m) - np.repeat(starts, counts) + 1
    cumw = _group_cumsum(w, seq - 1, cfg.max_fills)[0] / wsum[owner]
    spare = (total - counts)[owner]
    cut = np.floor(spare * cumw)
    is_last = np.zeros(m, dtype=bool)
    is_last[starts + counts - 1] = True
    cut[is_last] = spare[is_last]
    prev_cut = np.empty(m)
    prev_cut[1:] = cut[:-1]
    prev_cut[starts] = 0.0
    shares = 1.0 + cut - prev_cut

    # Level path L_t = -D + alpha * U_t with U non-decreasing, so each fill's
    # adverse step is alpha * du_t and impact sums to the target exactly.
    # When the first fill is not dominant it carries a favourable arrival
    # drift -D that sets the timing residual; otherwise every fill is adverse.
    rank = seq - 1
    du = gf.uniform(0.5, 1.5, size=m)
    first_share = shares[starts]
    drift = (counts >= 2) & (first_share <= 0.75 * total)
    du[starts[drift]] = 0.0
    U, U_prev = _group_cumsum(du, rank, cfg.max_fills)
    A = np.bincount(owner, weights=shares * du, minlength=n)
    notional_jpy = total * p0
    M = mi_bps * 1e-4 * notional_jpy
    alpha = M / A
    carry = alpha * np.bincount(owner, weights=shares * U_prev, minlength=n)
    Tm = timing_bps * 1e-4 * notional_jpy
    D = np.where(drift, np.maximum((carry - Tm) / total, 0.0), 0.0)
    level = -D[owner] + alpha[owner] * U
    price = p0[owner] + side[owner] * level
    mt_bps = (carry - D * total) / notional_jpy * 1e4

    order_ids = np.char.add("O", np.char.zfill(np.arange(1, n + 1).astype(str), 7))
    orders = pd.DataFrame({
        "order_id": order_ids,
        "security_id": sids[sec],
        "side": np.where(side > 0, "Buy", "Sell"),
        "arrival_date": days[day],
        "arrival_price_yen": p0,
        "total_shares": total,
    })
    fills = pd.DataFrame({"order_id": order_ids[owner], "seq": seq, "price_yen": price, "shares": shares})
    truth = pd.DataFrame({"order_id": order_ids, "target_mi_bps": mi_bps, "target_mt_bps": mt_bps,
                          "bucket_effect_bps": period})
    return SynthOrders(orders, fills, truth)


def generate_volume_panel(coefs: dict[str, float], n_securities: int = 20, n_days: int = 250,
                          noise: float = 0.0, lag: int = 0, seed: int = 0) -> pd.DataFrame:
    """Panel whose volume is an exact linear function of the regressors.

    ``coefs`` maps ``const`` and any of ``spread, trades, spread_over_price,
    d_inv_price, d_usd_jpy`` to their true coefficients; ``lag`` builds the
    response from regressors lagged by that many trading days.
    """
    g = np.random.default_rng(seed)
    days = trading_days(dt.date(2013, 7, 1), dt.date(2016, 12, 31))[:n_days]
    rows = []
    fxs = 100 * np.exp(np.cumsum(0.005 * g.standard_normal(n_days)))
    for i in range(n_securities):
        price = 2000 * np.exp(0.4 * g.standard_normal()) * np.exp(np.cumsum(0.015 * g.standard_normal(n_days)))
        spread = np.abs(price * 1e-3 * (1 + 0.3 * g.standard_normal(n_days))) + 0.1
        trades = np.round(3000 * np.exp(0.3 * g.standard_normal(n_days)))
        frame = pd.DataFrame({"security_id": f"V{i:03d}", "date": days.astype("datetime64[ns]"),
                              "close": price, "spread": spread, "trades": trades.astype(np.int64),
                              "usd_jpy": fxs})
        x = pd.DataFrame({
            "spread": spread, "trades": trades, "spread_over_price": spread / price,
            "d_inv_price": np.diff(1 / price, prepend=np.nan), "d_usd_jpy": np.diff(fxs, prepend=np.nan),
        }).shift(lag)
        vol = np.full(n_days, coefs.get("const", 0.0))
        for k, b in coefs.items():
            if k != "const":
                vol = vol + b * x[k].to_numpy()
        vol = vol + noise * g.standard_normal(n_days)
        # rows whose response needs unavailable lags get a filler value; pipelines drop them
        frame["volume"] = np.where(np.isfinite(vol), vol, 0.0)
        rows.append(frame)
    return pd.concat(rows, ignore_index=True)
