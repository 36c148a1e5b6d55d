"""Tick-size event study: affected names, bird's-eye comparisons, aggregates, buckets."""

from __future__ import annotations

import datetime as dt
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from .errors import DataError, ValidationError
from .marketdata import SecurityDay

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EventPhase:
    """A tick-size change: its ex-date and which ex-date closes it touches."""

    label: str
    ex_date: dt.date
    threshold: float
    above: bool

    def applies(self, close: float) -> bool:
        return close > self.threshold if self.above else close < self.threshold

    def describe(self) -> str:
        return f"close {'>' if self.above else '<'} {self.threshold:g} yen on {self.ex_date}"


PHASE1 = EventPhase("Phase1", dt.date(2014, 1, 14), 3000.0, above=True)
PHASE2 = EventPhase("Phase2", dt.date(2014, 7, 22), 5000.0, above=False)
PHASES = (PHASE1, PHASE2)


@dataclass(frozen=True)
class ComparisonScheme:
    label: str
    date_pairs: dict[str, tuple[dt.date, dt.date]]

    def dates(self, phase: EventPhase) -> tuple[dt.date, dt.date]:
        return self.date_pairs[phase.label]


_d = dt.date
SCHEMES = (
    ComparisonScheme("DayBefore", {"Phase1": (_d(2014, 1, 10), _d(2014, 1, 14)),
                                   "Phase2": (_d(2014, 7, 18), _d(2014, 7, 22))}),
    ComparisonScheme("WeekBefore", {"Phase1": (_d(2014, 1, 8), _d(2014, 1, 15)),
                                    "Phase2": (_d(2014, 7, 17), _d(2014, 7, 24))}),
    ComparisonScheme("WideSpan", {"Phase1": (_d(2014, 1, 6), _d(2014, 1, 16)),
                                  "Phase2": (_d(2014, 7, 14), _d(2014, 7, 28))}),
)
del _d


class Metric(str, Enum):
    SPREAD = "Spread"
    EXEC_SIZE = "ExecSize"


@dataclass(frozen=True)
class SecurityChange:
    security_id: str
    affected: bool
    before: float
    after: float

    @property
    def pct_change(self) -> float:
        return 100.0 * (self.after - self.before) / self.before if self.before else math.nan

    @property
    def decreased(self) -> bool:
        return self.after < self.before


@dataclass(frozen=True)
class BirdsEyeSummary:
    phase: str
    scheme: str
    metric: Metric
    pct_decreased_affected: float
    pct_decreased_all: float
    n_affected: int
    n_all: int
    per_security: tuple[SecurityChange, ...] = field(repr=False)


def _records(dataset) -> Iterable[SecurityDay]:
    if isinstance(dataset, pd.DataFrame):
        for row in dataset.itertuples(index=False):
            yield SecurityDay(row.security_id, pd.Timestamp(row.date).date(), row.close, row.spread,
                              row.volume, int(row.trades))
    else:
        yield from dataset


def _index(dataset) -> dict[tuple[str, dt.date], SecurityDay]:
    return {(r.security_id, r.date): r for r in _records(dataset)}


def affected_securities(dataset, phase: EventPhase, warnings: list[str] | None = None) -> set[str]:
    """Securities whose (split-adjusted) ex-date close satisfies the phase rule.

    Securities with no ex-date record are excluded; a note is appended to
    ``warnings`` when a list is supplied.
    """
    recs = list(_records(dataset))
    universe = sorted({r.security_id for r in recs})
    on_ex = {r.security_id: r for r in recs if r.date == phase.ex_date}
    out = set()
    for sid in universe:
        rec = on_ex.get(sid)
        if rec is None:
            msg = f"{phase.label}: no record for {sid} on ex-date {phase.ex_date}; excluded"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            continue
        if phase.applies(rec.close_price):
            out.add(sid)
    return out


def _metric_value(rec: SecurityDay, metric: Metric) -> float:
    if metric is Metric.SPREAD:
        return rec.avg_spread
    return rec.exec_size


def birdseye_compare(dataset, phase: EventPhase, scheme: ComparisonScheme, metric: Metric | str,
                     affected: set[str] | None = None, min_before: float | None = None) -> BirdsEyeSummary:
    """Before/after comparison of one metric for every security with both dates.

    ``min_before`` optionally restricts both percentages to names whose
    before-date value exceeds it (e.g. spreads above 1 yen). A tie counts as
    not decreased.
    """
    metric = Metric(metric)
    idx = _index(dataset)
    if affected is None:
        affected = affected_securities(idx.values(), phase)
    before_d, after_d = scheme.dates(phase)
    universe = sorted({sid for sid, _ in idx})
    changes = []
    for sid in universe:
        b, a = idx.get((sid, before_d)), idx.get((sid, after_d))
        if b is None or a is None:
            continue
        vb, va = _metric_value(b, metric), _metric_value(a, metric)
        if not (math.isfinite(vb) and math.isfinite(va)):
            continue
        if min_before is not None and not vb > min_before:
            continue
        changes.append(SecurityChange(sid, sid in affected, vb, va))
    if not changes:
        raise DataError(f"{phase.label}/{scheme.label}: no security has both {before_d} and {after_d}")

    def pct(items):
        return 100.0 * sum(c.decreased for c in items) / len(items) if items else math.nan

    hit = [c for c in changes if c.affected]
    return BirdsEyeSummary(phase.label, scheme.label, metric, pct(hit), pct(changes),
                           len(hit), len(changes), tuple(changes))


class Weighting(str, Enum):
    EW = "EW"
    VW = "VW"
    TW = "TW"


class AggMetric(str, Enum):
    SPREAD = "Spread"
    PRICE = "Price"
    SPREAD_OVER_PRICE = "SpreadOverPrice"
    TRADE_SIZE = "TradeSize"


def weighted_aggregate(day: Sequence[SecurityDay], weighting: Weighting | str, metric: AggMetric | str) -> float:
    """Cross-sectional ``Σ w_i m_i / Σ w_i`` over one day's records."""
    weighting, metric = Weighting(weighting), AggMetric(metric)
    if not day:
        raise DataError("weighted_aggregate needs at least one record")
    close = np.array([r.close_price for r in day])
    spread = np.array([r.avg_spread for r in day])
    volume = np.array([r.volume for r in day], dtype=float)
    trades = np.array([r.trade_count for r in day], dtype=float)
    return _weighted(close, spread, volume, trades, weighting, metric)


def _weighted(close, spread, volume, trades, weighting, metric) -> float:
    if metric is AggMetric.SPREAD:
        m = spread
    elif metric is AggMetric.PRICE:
        m = close
    elif metric is AggMetric.SPREAD_OVER_PRICE:
        m = spread / close
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            m = volume / trades
    w = {Weighting.EW: np.ones_like(close), Weighting.VW: volume, Weighting.TW: trades}[weighting]
    keep = np.isfinite(m)
    if metric is AggMetric.TRADE_SIZE:
        keep &= trades > 0
    w, m = w[keep], m[keep]
    total = w.sum()
    if not total > 0:
        raise DataError(f"all {weighting.value} weights are zero")
    return float((w * m).sum() / total)


def daily_aggregates(panel: pd.DataFrame) -> pd.DataFrame:
    """All weighting × metric aggregates per date for a daily frame."""
    rows = []
    for day, g in panel.groupby("date", sort=True):
        c, s, v, t = (g[k].to_numpy(dtype=float) for k in ("close", "spread", "volume", "trades"))
        row = {"date": day}
        for w in Weighting:
            for m in AggMetric:
                try:
                    row[f"{w.value}_{m.value}"] = _weighted(c, s, v, t, w, m)
                except DataError:
                    row[f"{w.value}_{m.value}"] = math.nan
        rows.append(row)
    return pd.DataFrame(rows)


# -- order buckets ------------------------------------------------------------

@dataclass(frozen=True)
class Buckets:
    """Left-closed, right-open buckets over ``[0, ∞)``."""

    edges: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.edges):
            raise ValidationError("one label per lower edge")
        if self.edges[0] != 0 or any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValidationError("edges must start at 0 and increase")

    def label(self, value: float) -> str:
        if not value >= 0:
            raise ValidationError(f"bucket input must be >= 0, got {value}")
        i = int(np.searchsorted(self.edges, value, side="right")) - 1
        return self.labels[i]

    def assign(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if np.any(~(v >= 0)):
            raise ValidationError("bucket inputs must be >= 0")
        i = np.searchsorted(self.edges, v, side="right") - 1
        return np.asarray(self.labels, dtype=object)[i]


def _bucket_labels(edges, unit):
    labels = [f"{a:g}-{b:g}{unit}" for a, b in zip(edges, edges[1:])]
    return tuple(labels + [f"{edges[-1]:g}{unit}+"])


LIQUIDITY_EDGES = (0.0, 1.0, 5.0, 10.0, 25.0)
LIQUIDITY_BUCKETS = Buckets(LIQUIDITY_EDGES, _bucket_labels(LIQUIDITY_EDGES, "%"))
NOTIONAL_EDGES_MM = {"A": (0.0, 1.0, 5.0, 10.0), "B": (0.0, 1.0, 10.0, 25.0)}
NOTIONAL_BUCKETS = {k: Buckets(tuple(e * 1e6 for e in v), _bucket_labels(v, "MM"))
                    for k, v in NOTIONAL_EDGES_MM.items()}


def make_buckets(edges: Sequence[float], unit: str, scale: float = 1.0) -> Buckets:
    edges = tuple(float(e) for e in edges)
    return Buckets(tuple(e * scale for e in edges), _bucket_labels(edges, unit))


def bucket_liquidity(liquidity_demand_pct: float, buckets: Buckets = LIQUIDITY_BUCKETS) -> str:
    return buckets.label(liquidity_demand_pct)


def bucket_notional(notional_usd: float, scheme: str = "A",
                    buckets: dict[str, Buckets] | None = None) -> str:
    table = NOTIONAL_BUCKETS if buckets is None else buckets
    try:
        return table[scheme].label(notional_usd)
    except KeyError:
        raise ValidationError(f"unknown notional scheme {scheme!r}") from None
