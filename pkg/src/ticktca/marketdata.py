"""Market and order records, CSV ingestion, split/FX adjustment, sample windows.

Two access paths are provided. The record path (``parse_*``) returns frozen
dataclasses and reports problems with file line numbers. The columnar path
(``read_*_frame``) returns pandas frames for batch pipelines and applies the
same validation rules.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from bisect import bisect_right
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataError, ValidationError

DAILY_COLUMNS = ["security_id", "date", "close_yen", "avg_spread_yen", "volume_shares", "trade_count"]
ORDER_COLUMNS = ["order_id", "security_id", "side", "arrival_date", "arrival_price_yen", "total_shares"]
FILL_COLUMNS = ["order_id", "seq", "price_yen", "shares"]
FX_COLUMNS = ["date", "usd_jpy"]
SPLIT_COLUMNS = ["security_id", "ex_date", "ratio"]

FX_LOOKBACK_DAYS = 7


class Side(str, Enum):
    BUY = "Buy"
    SELL = "Sell"

    @classmethod
    def parse(cls, text: str) -> Side:
        try:
            return {"buy": cls.BUY, "b": cls.BUY, "sell": cls.SELL, "s": cls.SELL}[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown side {text!r}") from None

    @property
    def sign(self) -> int:
        """+1 for buys, -1 for sells."""
        return 1 if self is Side.BUY else -1


@dataclass(frozen=True, slots=True)
class SecurityDay:
    """One security-day of daily market statistics."""

    security_id: str
    date: dt.date
    close_price: float
    avg_spread: float
    volume: float
    trade_count: int

    def __post_init__(self) -> None:
        if not self.close_price > 0:
            raise ValueError(f"close_price must be > 0, got {self.close_price}")
        if self.avg_spread < 0:
            raise ValueError(f"avg_spread must be >= 0, got {self.avg_spread}")
        if self.volume < 0 or self.trade_count < 0:
            raise ValueError("volume and trade_count must be >= 0")
        if self.volume == 0 and self.trade_count != 0:
            raise ValueError("trade_count must be 0 when volume is 0")

    @property
    def exec_size(self) -> float:
        """Average execution size in shares; NaN on days without trades."""
        return self.volume / self.trade_count if self.trade_count else math.nan


@dataclass(frozen=True, slots=True)
class Fill:
    t: int
    price: float
    shares: float

    def __post_init__(self) -> None:
        if self.t < 1:
            raise ValueError(f"fill index must be >= 1, got {self.t}")
        if not self.price > 0:
            raise ValueError(f"fill price must be > 0, got {self.price}")
        if not self.shares > 0:
            raise ValueError(f"fill shares must be > 0, got {self.shares}")


@dataclass(frozen=True, slots=True)
class Order:
    """A fully filled order: arrival price ``P_0``, size ``S̄`` and its fills."""

    order_id: str
    security_id: str
    side: Side
    arrival_date: dt.date
    reference_price: float
    total_shares: float
    fills: tuple[Fill, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.reference_price > 0:
            raise ValueError(f"reference_price must be > 0, got {self.reference_price}")
        if not self.total_shares > 0:
            raise ValueError(f"total_shares must be > 0, got {self.total_shares}")
        if not self.fills:
            raise ValueError(f"order {self.order_id} has no fills")
        seqs = [f.t for f in self.fills]
        if any(b <= a for a, b in zip(seqs, seqs[1:])):
            raise ValueError(f"order {self.order_id}: fill indices must be strictly increasing")
        filled = math.fsum(f.shares for f in self.fills)
        if not math.isclose(filled, self.total_shares, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError(
                f"order {self.order_id}: fills sum to {filled}, expected {self.total_shares}"
            )

    @property
    def T(self) -> int:
        return self.fills[-1].t

    @property
    def N(self) -> int:
        return len(self.fills)

    @property
    def notional(self) -> float:
        """Arrival notional ``S̄ * P_0`` in yen."""
        return self.total_shares * self.reference_price


@dataclass(frozen=True, slots=True)
class SplitRatio:
    security_id: str
    ex_date: dt.date
    ratio: float

    def __post_init__(self) -> None:
        if not self.ratio > 0:
            raise ValueError(f"split ratio must be > 0, got {self.ratio}")


@dataclass(frozen=True, slots=True)
class FxRate:
    date: dt.date
    usd_jpy: float

    def __post_init__(self) -> None:
        if not self.usd_jpy > 0:
            raise ValueError(f"usd_jpy must be > 0, got {self.usd_jpy}")


@dataclass(frozen=True, slots=True)
class SampleWindow:
    label: str
    start: dt.date
    end: dt.date

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"window {self.label}: start {self.start} after end {self.end}")

    def __contains__(self, day: dt.date) -> bool:
        return self.start <= day <= self.end


D = dt.date
DEFAULT_WINDOWS: tuple[SampleWindow, ...] = (
    SampleWindow("SF", D(2013, 7, 1), D(2014, 12, 10)),
    SampleWindow("S1", D(2013, 7, 1), D(2014, 1, 10)),
    SampleWindow("S2", D(2014, 1, 14), D(2014, 7, 18)),
    SampleWindow("S3", D(2014, 7, 22), D(2014, 12, 10)),
    SampleWindow("S4", D(2013, 7, 1), D(2014, 7, 18)),
    SampleWindow("S5", D(2014, 1, 15), D(2014, 12, 10)),
)
OUTLIER_FREE_END = D(2014, 10, 30)
del D


def truncate_windows(windows: Iterable[SampleWindow], end: dt.date) -> tuple[SampleWindow, ...]:
    """Cap every window at ``end``; windows starting after ``end`` are dropped."""
    out = []
    for w in windows:
        if w.start <= end:
            out.append(replace(w, end=min(w.end, end)))
    return tuple(out)


def parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


# -- record ingestion ---------------------------------------------------------

def _rows(path: str | Path, columns: Sequence[str]):
    """Yield (line_number, row dict) after checking the header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected header {','.join(columns)}") from None
        header = [h.strip() for h in header]
        missing = [c for c in columns if c not in header]
        if missing:
            raise DataError(f"{path}: header missing column(s) {', '.join(missing)}")
        idx = {c: header.index(c) for c in columns}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            yield lineno, {c: row[i] for c, i in idx.items()}


def _convert(path, lineno, column, text, fn):
    try:
        return fn(text)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}:{lineno}: column {column!r}: {exc}") from None


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _num(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number {text!r}")
    return value


def _positive(text: str) -> float:
    value = _num(text)
    if value <= 0:
        raise ValueError(f"must be > 0, got {text!r}")
    return value


def parse_daily(path: str | Path) -> list[SecurityDay]:
    """Read ``daily.csv`` into records sorted by (security_id, date).

    Raises :class:`DataError` naming line and column for malformed values,
    non-positive prices and duplicate (security, date) keys.
    """
    records: dict[tuple[str, dt.date], SecurityDay] = {}
    for lineno, row in _rows(path, DAILY_COLUMNS):
        sid = row["security_id"].strip()
        day = _convert(path, lineno, "date", row["date"], parse_date)
        close = _convert(path, lineno, "close_yen", row["close_yen"], _positive)
        spread = _convert(path, lineno, "avg_spread_yen", row["avg_spread_yen"], _num)
        volume = _convert(path, lineno, "volume_shares", row["volume_shares"], _num)
        trades = _convert(path, lineno, "trade_count", row["trade_count"], _int)
        try:
            rec = SecurityDay(sid, day, close, spread, volume, trades)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
        if (sid, day) in records:
            raise DataError(f"{path}:{lineno}: duplicate record for ({sid}, {day})")
        records[(sid, day)] = rec
    return [records[k] for k in sorted(records)]


def parse_orders(orders_path: str | Path, fills_path: str | Path) -> list[Order]:
    """Join ``orders.csv`` and ``fills.csv`` into fully filled :class:`Order` records.

    Orphan fills, orders without fills and under/over-filled orders are
    rejected; the error lists the offending order ids.
    """
    heads: dict[str, tuple] = {}
    for lineno, row in _rows(orders_path, ORDER_COLUMNS):
        oid = row["order_id"].strip()
        if oid in heads:
            raise DataError(f"{orders_path}:{lineno}: duplicate order_id {oid}")
        heads[oid] = (
            row["security_id"].strip(),
            _convert(orders_path, lineno, "side", row["side"], Side.parse),
            _convert(orders_path, lineno, "arrival_date", row["arrival_date"], parse_date),
            _convert(orders_path, lineno, "arrival_price_yen", row["arrival_price_yen"], _positive),
            _convert(orders_path, lineno, "total_shares", row["total_shares"], _positive),
        )
    fills: dict[str, list[Fill]] = {oid: [] for oid in heads}
    orphans = []
    for lineno, row in _rows(fills_path, FILL_COLUMNS):
        oid = row["order_id"].strip()
        seq = _convert(fills_path, lineno, "seq", row["seq"], _int)
        price = _convert(fills_path, lineno, "price_yen", row["price_yen"], _positive)
        shares = _convert(fills_path, lineno, "shares", row["shares"], _positive)
        if oid not in fills:
            orphans.append(f"{oid} (line {lineno})")
            continue
        try:
            fills[oid].append(Fill(seq, price, shares))
        except ValueError as exc:
            raise DataError(f"{fills_path}:{lineno}: {exc}") from None
    if orphans:
        raise DataError(f"{fills_path}: orphan fills for unknown order_id: {', '.join(orphans[:20])}")

    orders, bad = [], []
    for oid, (sid, side, day, p0, total) in heads.items():
        fl = sorted(fills[oid], key=lambda f: f.t)
        filled = math.fsum(f.shares for f in fl)
        if not fl or not math.isclose(filled, total, rel_tol=1e-12, abs_tol=0.0):
            bad.append(f"{oid} (filled {filled:g} of {total:g})")
            continue
        try:
            orders.append(Order(oid, sid, side, day, p0, total, tuple(fl)))
        except ValueError as exc:
            raise DataError(f"{fills_path}: {exc}") from None
    if bad:
        raise DataError(f"not fully filled: {', '.join(bad[:20])}" + (" ..." if len(bad) > 20 else ""))
    return orders


def parse_fx(path: str | Path) -> list[FxRate]:
    out: dict[dt.date, FxRate] = {}
    for lineno, row in _rows(path, FX_COLUMNS):
        day = _convert(path, lineno, "date", row["date"], parse_date)
        rate = _convert(path, lineno, "usd_jpy", row["usd_jpy"], _positive)
        if day in out:
            raise DataError(f"{path}:{lineno}: duplicate fx date {day}")
        out[day] = FxRate(day, rate)
    return [out[d] for d in sorted(out)]


def parse_splits(path: str | Path) -> list[SplitRatio]:
    out: dict[tuple[str, dt.date], SplitRatio] = {}
    for lineno, row in _rows(path, SPLIT_COLUMNS):
        sid = row["security_id"].strip()
        day = _convert(path, lineno, "ex_date", row["ex_date"], parse_date)
        ratio = _convert(path, lineno, "ratio", row["ratio"], _positive)
        if (sid, day) in out:
            raise DataError(f"{path}:{lineno}: duplicate split for ({sid}, {day})")
        out[(sid, day)] = SplitRatio(sid, day, ratio)
    return sorted(out.values(), key=lambda s: (s.ex_date, s.security_id))


def format_number(x: float) -> str:
    """Shortest round-trip text for a float; integral values print without '.0'."""
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def write_daily(records: Iterable[SecurityDay], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DAILY_COLUMNS)
        for r in records:
            w.writerow([r.security_id, r.date.isoformat(), format_number(r.close_price),
                        format_number(r.avg_spread), format_number(r.volume), r.trade_count])


# -- adjustments --------------------------------------------------------------

def adjust_for_splits(records: Iterable[SecurityDay], splits: Iterable[SplitRatio]) -> list[SecurityDay]:
    """Restate pre-split history on the post-split share basis.

    For every split and every record of that security strictly before the
    ex-date, price and spread are divided by the ratio and volume is
    multiplied by it. Trade counts are untouched, so the average execution
    size scales with volume. Records on or after the ex-date are unchanged.
    """
    by_sec: dict[str, list[SplitRatio]] = {}
    for s in splits:
        if not s.ratio > 0:
            raise ValidationError(f"split ratio must be > 0, got {s.ratio}")
        by_sec.setdefault(s.security_id, []).append(s)
    for lst in by_sec.values():
        lst.sort(key=lambda s: s.ex_date)
        if len({s.ex_date for s in lst}) != len(lst):
            raise ValidationError("at most one split per (security, ex_date)")

    out = []
    for rec in records:
        factor = 1.0
        for s in by_sec.get(rec.security_id, ()):
            if rec.date < s.ex_date:
                factor *= s.ratio
        if factor == 1.0:
            out.append(rec)
        else:
            out.append(replace(rec, close_price=rec.close_price / factor,
                               avg_spread=rec.avg_spread / factor, volume=rec.volume * factor))
    return out


class FxTable:
    """USD/JPY lookup with a nearest-prior-date fallback."""

    def __init__(self, rates: Iterable[FxRate] | Mapping[dt.date, float], lookback_days: int = FX_LOOKBACK_DAYS):
        if isinstance(rates, Mapping):
            items = sorted(rates.items())
        else:
            items = sorted((r.date, r.usd_jpy) for r in rates)
        if any(v <= 0 for _, v in items):
            raise ValidationError("fx rates must be positive")
        self._dates = [d for d, _ in items]
        self._rates = [v for _, v in items]
        self.lookback_days = lookback_days

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, lookback_days: int = FX_LOOKBACK_DAYS) -> FxTable:
        days = pd.to_datetime(frame["date"]).dt.date
        return cls(dict(zip(days, frame["usd_jpy"].astype(float))), lookback_days)

    def rate(self, day: dt.date) -> float:
        i = bisect_right(self._dates, day) - 1
        if i < 0 or (day - self._dates[i]).days > self.lookback_days:
            raise DataError(f"no USD/JPY rate on or within {self.lookback_days} days before {day}")
        return self._rates[i]

    def rates_for(self, days: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`rate` over a datetime64[D] array."""
        if not self._dates:
            raise DataError("empty fx table")
        known = np.array(self._dates, dtype="datetime64[D]")
        days = np.asarray(days, dtype="datetime64[D]")
        i = np.searchsorted(known, days, side="right") - 1
        gap = np.where(i >= 0, (days - known[np.clip(i, 0, None)]).astype(int), 10**9)
        if np.any(gap > self.lookback_days):
            first = days[np.argmax(gap > self.lookback_days)]
            raise DataError(f"no USD/JPY rate on or within {self.lookback_days} days before {first}")
        return np.asarray(self._rates)[i]

    def series(self) -> pd.Series:
        return pd.Series(self._rates, index=pd.DatetimeIndex(self._dates), name="usd_jpy")


def to_usd(notional_jpy: float, day: dt.date, fx: FxTable) -> float:
    """Convert a yen notional to USD at the rate for ``day``."""
    return notional_jpy / fx.rate(day)


def slice_samples(records: Iterable, windows: Sequence[SampleWindow] = DEFAULT_WINDOWS,
                  date_attr: str = "date") -> dict[str, list]:
    """Assign every record to each window containing its date.

    Works for any record type carrying a date attribute (``arrival_date`` for
    orders). Output preserves input order within each label.
    """
    out: dict[str, list] = {w.label: [] for w in windows}
    for rec in records:
        day = getattr(rec, date_attr)
        for w in windows:
            if day in w:
                out[w.label].append(rec)
    return out


def window_mask(dates, window: SampleWindow) -> np.ndarray:
    d = np.asarray(dates, dtype="datetime64[D]")
    return (d >= np.datetime64(window.start)) & (d <= np.datetime64(window.end))


def adjust_frame(daily: pd.DataFrame, splits) -> pd.DataFrame:
    """Frame version of :func:`adjust_for_splits`.

    ``splits`` is a sequence of :class:`SplitRatio` or a frame with
    ``security_id, ex_date, ratio``.
    """
    if isinstance(splits, pd.DataFrame):
        items = [(r.security_id, pd.Timestamp(r.ex_date).date(), float(r.ratio))
                 for r in splits.itertuples(index=False)]
    else:
        items = [(s.security_id, s.ex_date, s.ratio) for s in splits]
    out = daily.copy()
    factor = np.ones(len(out))
    sid = out["security_id"].to_numpy()
    dates = out["date"].to_numpy().astype("datetime64[D]")
    for security, ex_date, ratio in items:
        factor[(sid == security) & (dates < np.datetime64(ex_date))] *= ratio
    out["close"] = out["close"] / factor
    out["spread"] = out["spread"] / factor
    out["volume"] = out["volume"] * factor
    return out


# -- columnar ingestion -------------------------------------------------------

def _read_frame(path, columns, dtypes):
    try:
        df = pd.read_csv(path, dtype=dtypes, float_precision="round_trip", keep_default_na=False)
    except (ValueError, pd.errors.ParserError) as exc:
        raise DataError(f"{path}: {exc}") from None
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise DataError(f"{path}: header missing column(s) {', '.join(missing)}")
    return df[columns]


def records_to_frame(records: Iterable[SecurityDay]) -> pd.DataFrame:
    rows = [(r.security_id, r.date, r.close_price, r.avg_spread, r.volume, r.trade_count) for r in records]
    df = pd.DataFrame(rows, columns=["security_id", "date", "close", "spread", "volume", "trades"])
    df["date"] = pd.to_datetime(df["date"])
    return df


def read_daily_frame(path: str | Path) -> pd.DataFrame:
    """Columnar ``daily.csv`` reader.

    Columns are renamed to ``security_id, date, close, spread, volume,
    trades``; rows are sorted by (security_id, date).
    """
    df = _read_frame(path, DAILY_COLUMNS, {"security_id": str, "date": str})
    try:
        df = df.astype({"close_yen": float, "avg_spread_yen": float, "volume_shares": float, "trade_count": float})
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    df.columns = ["security_id", "date", "close", "spread", "volume", "trades"]
    bad = ~(df["close"] > 0) | (df["spread"] < 0) | (df["volume"] < 0) | (df["trades"] < 0)
    bad |= (df["volume"] == 0) & (df["trades"] != 0)
    if bad.any():
        line = int(np.flatnonzero(bad.to_numpy())[0]) + 2
        raise DataError(f"{path}:{line}: record violates daily invariants")
    try:
        df["date"] = pd.to_datetime(df["date"], format="%Y-%m-%d")
    except ValueError as exc:
        raise DataError(f"{path}: column 'date': {exc}") from None
    dup = df.duplicated(["security_id", "date"])
    if dup.any():
        line = int(np.flatnonzero(dup.to_numpy())[0]) + 2
        raise DataError(f"{path}:{line}: duplicate (security_id, date)")
    df["trades"] = df["trades"].astype(np.int64)
    return df.sort_values(["security_id", "date"], kind="mergesort").reset_index(drop=True)


def read_fx_table(path: str | Path) -> FxTable:
    return FxTable(parse_fx(path))


def read_order_frames(orders_path: str | Path, fills_path: str | Path) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Columnar ``orders.csv``/``fills.csv`` reader with join validation.

    Returns ``(orders, fills)``; fills are sorted by (order position, seq) and
    carry an ``order_pos`` column indexing into ``orders``.
    """
    orders = _read_frame(orders_path, ORDER_COLUMNS, {"order_id": str, "security_id": str, "side": str,
                                                      "arrival_date": str, "arrival_price_yen": float,
                                                      "total_shares": float})
    fills = _read_frame(fills_path, FILL_COLUMNS, {"order_id": str, "seq": float, "price_yen": float,
                                                   "shares": float})
    return order_frames(orders, fills, orders_path, fills_path)


def order_frames(orders: pd.DataFrame, fills: pd.DataFrame, orders_path="orders", fills_path="fills"
                 ) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Validate and index in-memory order/fill frames as :func:`read_order_frames` does."""
    orders = orders[list(ORDER_COLUMNS)]
    fills = fills[list(FILL_COLUMNS)]
    if orders["order_id"].duplicated().any():
        raise DataError(f"{orders_path}: duplicate order_id {orders['order_id'][orders['order_id'].duplicated()].iloc[0]}")
    sides = orders["side"].str.strip().str.lower()
    if not sides.isin(["buy", "sell"]).all():
        raise DataError(f"{orders_path}: unknown side value(s) {sorted(set(sides) - {'buy', 'sell'})[:5]}")
    orders = orders.assign(side=np.where(sides == "buy", Side.BUY.value, Side.SELL.value),
                           arrival_date=pd.to_datetime(orders["arrival_date"], format="ISO8601"))
    if not ((orders["arrival_price_yen"] > 0) & (orders["total_shares"] > 0)).all():
        raise DataError(f"{orders_path}: non-positive arrival price or size")
    if len(fills) and not ((fills["price_yen"] > 0) & (fills["shares"] > 0) & (fills["seq"] >= 1)).all():
        raise DataError(f"{fills_path}: non-positive fill price/shares or seq < 1")

    pos = pd.Series(np.arange(len(orders)), index=orders["order_id"])
    order_pos = fills["order_id"].map(pos)
    if order_pos.isna().any():
        orphan = fills["order_id"][order_pos.isna()].unique()[:20]
        raise DataError(f"{fills_path}: orphan fills for unknown order_id: {', '.join(orphan)}")
    fills = fills.assign(order_pos=order_pos.astype(np.int64).to_numpy())
    fills = fills.sort_values(["order_pos", "seq"], kind="mergesort").reset_index(drop=True)
    if (fills.groupby("order_pos")["seq"].diff() == 0).any():
        raise DataError(f"{fills_path}: repeated seq within an order")
    filled = np.bincount(fills["order_pos"].to_numpy(), weights=fills["shares"].to_numpy(), minlength=len(orders))
    total = orders["total_shares"].to_numpy()
    bad = ~np.isclose(filled, total, rtol=1e-12, atol=0.0)
    if bad.any():
        ids = orders["order_id"].to_numpy()[bad][:20]
        raise DataError(f"not fully filled: {', '.join(ids)}")
    return orders.reset_index(drop=True), fills
