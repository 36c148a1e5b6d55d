"""Deterministic CSV tables and static SVG charts.

Numbers are written with ``repr`` so a re-run on the same inputs produces
byte-identical files. Charts are plain SVG 1.1 built from strings; every
value they draw is also present in a sibling CSV.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
import pandas as pd

from .marketdata import format_number

COSTS_COLUMNS = ("order_id", "security_id", "side", "arrival_date", "is_bps", "mi_bps", "mt_bps", "liq_pct",
                 "notional_usd", "liq_bucket", "notional_bucket_a", "notional_bucket_b")
MIE_COLUMNS = ("security_id", "order_shares", "mean_bps", "stdev_bps", "mean_executions", "n_paths", "seed")
BIRDSEYE_COLUMNS = ("phase", "scheme", "metric", "security_id", "affected", "before", "after", "pct_change")
BIRDSEYE_SUMMARY_COLUMNS = ("phase", "scheme", "metric", "pct_decreased_affected", "pct_decreased_all",
                            "n_affected", "n_all")
STATIONARITY_COLUMNS = ("security_id", "variable", "sample", "test", "statistic", "p_value", "reject_5pct")
TREND_COLUMNS = ("security_id", "variable", "sample", "slope", "p_value", "increasing")
REGRESSION_COLUMNS = ("pipeline", "sample", "spec", "regressor", "coef", "std_err", "t_stat", "p_value", "adj_r2",
                      "n_obs")


def cell(value) -> str:
    """Text form of one CSV value."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (pd.Timestamp, np.datetime64)):
        return str(np.datetime64(value, "D"))
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format_number(v)
    return str(value)


def _column_text(values: pd.Series) -> list[str]:
    if pd.api.types.is_datetime64_any_dtype(values):
        return list(np.datetime_as_string(values.to_numpy().astype("datetime64[D]")))
    if pd.api.types.is_bool_dtype(values):
        return ["true" if v else "false" for v in values.to_numpy()]
    if pd.api.types.is_integer_dtype(values):
        return [str(v) for v in values.to_numpy().tolist()]
    if pd.api.types.is_float_dtype(values):
        return [("nan" if v != v else format_number(v)) for v in values.to_numpy().tolist()]
    return [cell(v) for v in values.tolist()]


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Mapping] | pd.DataFrame) -> int:
    """Write ``rows`` with exactly ``columns``; returns the row count."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        if isinstance(rows, pd.DataFrame):
            missing = [c for c in columns if c not in rows.columns]
            if missing:
                raise KeyError(f"{path.name}: missing column(s) {missing}")
            w.writerows(zip(*(_column_text(rows[c]) for c in columns)))
            return len(rows)
        n = 0
        for row in rows:
            w.writerow([cell(row[c]) for c in columns])
            n += 1
        return n


# -- SVG ---------------------------------------------------------------------

_W, _H = 720, 400
_M = {"l": 70, "r": 20, "t": 40, "b": 70}
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _num(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi == lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out, v = [], start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def _label(v: float) -> str:
    return f"{v:.6g}"


def _frame(title: str, ylabel: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {_H / 2:.1f})">'
        f'{escape(ylabel)}</text>',
    ]


def _y_axis(lines: list[str], lo: float, hi: float, ymap) -> None:
    x0, x1 = _M["l"], _W - _M["r"]
    for t in _ticks(lo, hi):
        y = ymap(t)
        lines.append(f'<line x1="{x0}" y1="{_num(y)}" x2="{x1}" y2="{_num(y)}" stroke="#dddddd"/>')
        lines.append(f'<text x="{x0 - 6}" y="{_num(y + 4)}" text-anchor="end">{escape(_label(t))}</text>')
    lines.append(f'<line x1="{x0}" y1="{_M["t"]}" x2="{x0}" y2="{_H - _M["b"]}" stroke="black"/>')
    lines.append(f'<line x1="{x0}" y1="{_H - _M["b"]}" x2="{x1}" y2="{_H - _M["b"]}" stroke="black"/>')


def _range(values: Iterable[float], include_zero: bool) -> tuple[float, float]:
    vals = [v for v in values if math.isfinite(v)]
    if include_zero:
        vals.append(0.0)
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi == lo:
        pad = abs(hi) * 0.1 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def bar_chart(path: str | Path, title: str, categories: Sequence[str], series: Mapping[str, Sequence[float]],
              ylabel: str = "", ymax: float | None = None) -> None:
    """Grouped bars: one group per category, one bar per series."""
    names = list(series)
    lo, hi = _range((v for s in series.values() for v in s), include_zero=True)
    if ymax is not None:
        hi = max(hi, ymax)
    plot_h = _H - _M["t"] - _M["b"]

    def ymap(v):
        return _M["t"] + plot_h * (hi - v) / (hi - lo)

    lines = _frame(title, ylabel)
    _y_axis(lines, lo, hi, ymap)
    group_w = (_W - _M["l"] - _M["r"]) / max(len(categories), 1)
    bar_w = group_w * 0.8 / max(len(names), 1)
    for i, cat in enumerate(categories):
        gx = _M["l"] + i * group_w + group_w * 0.1
        for j, name in enumerate(names):
            v = series[name][i]
            if not math.isfinite(v):
                continue
            y0, y1 = sorted((ymap(0.0), ymap(v)))
            lines.append(f'<rect x="{_num(gx + j * bar_w)}" y="{_num(y0)}" width="{_num(bar_w * 0.95)}" '
                         f'height="{_num(y1 - y0)}" fill="{_PALETTE[j % len(_PALETTE)]}">'
                         f'<title>{escape(f"{cat} {name}: {_label(v)}")}</title></rect>')
        cx = gx + group_w * 0.4
        lines.append(f'<text x="{_num(cx)}" y="{_H - _M["b"] + 16}" text-anchor="middle">{escape(cat)}</text>')
    _legend(lines, names)
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def line_chart(path: str | Path, title: str, x: Sequence, series: Mapping[str, Sequence[float]],
               ylabel: str = "", markers: Mapping[str, object] | None = None) -> None:
    """Line per series over a shared x axis (dates or numbers).

    ``markers`` draws labelled vertical rules at the given x positions.
    """
    xs = _x_values(x)
    names = list(series)
    lo, hi = _range((float(v) for s in series.values() for v in s), include_zero=False)
    xlo, xhi = (min(xs), max(xs)) if len(xs) else (0.0, 1.0)
    if xhi == xlo:
        xhi = xlo + 1.0
    plot_w, plot_h = _W - _M["l"] - _M["r"], _H - _M["t"] - _M["b"]

    def xmap(v):
        return _M["l"] + plot_w * (v - xlo) / (xhi - xlo)

    def ymap(v):
        return _M["t"] + plot_h * (hi - v) / (hi - lo)

    lines = _frame(title, ylabel)
    _y_axis(lines, lo, hi, ymap)
    for j, name in enumerate(names):
        vals = np.asarray(series[name], dtype=float)
        run: list[str] = []
        for xv, yv in zip(xs, vals):
            if math.isfinite(yv):
                run.append(f"{_num(xmap(xv))},{_num(ymap(yv))}")
            elif run:
                lines.append(_polyline(run, j))
                run = []
        if run:
            lines.append(_polyline(run, j))
    for tick_x, text in _x_ticks(x, xs):
        lines.append(f'<text x="{_num(xmap(tick_x))}" y="{_H - _M["b"] + 16}" text-anchor="middle">'
                     f'{escape(text)}</text>')
    for text, at in (markers or {}).items():
        mx = xmap(_x_values([at])[0])
        lines.append(f'<line x1="{_num(mx)}" y1="{_M["t"]}" x2="{_num(mx)}" y2="{_H - _M["b"]}" '
                     f'stroke="#555555" stroke-dasharray="4,3"/>')
        lines.append(f'<text x="{_num(mx + 3)}" y="{_M["t"] + 12}">{escape(text)}</text>')
    _legend(lines, names)
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _polyline(points: list[str], j: int) -> str:
    return (f'<polyline fill="none" stroke="{_PALETTE[j % len(_PALETTE)]}" stroke-width="1.2" '
            f'points="{" ".join(points)}"/>')


def _is_dates(x: Sequence) -> bool:
    arr = np.asarray(x)
    return np.issubdtype(arr.dtype, np.datetime64) or (len(arr) > 0 and isinstance(arr[0], dt.date))


def _x_values(x: Sequence) -> list[float]:
    if _is_dates(x):
        return [float(v) for v in np.asarray(x, dtype="datetime64[D]").astype(np.int64)]
    return [float(v) for v in x]


def _x_ticks(x: Sequence, xs: list[float]) -> list[tuple[float, str]]:
    if not xs:
        return []
    idx = np.unique(np.linspace(0, len(xs) - 1, min(6, len(xs))).round().astype(int))
    if _is_dates(x):
        days = np.asarray(x, dtype="datetime64[D]")
        return [(xs[i], str(days[i])) for i in idx]
    return [(xs[i], _label(xs[i])) for i in idx]


def _legend(lines: list[str], names: Sequence[str]) -> None:
    y = _H - 24
    x = _M["l"]
    for j, name in enumerate(names):
        lines.append(f'<rect x="{x}" y="{y - 9}" width="10" height="10" fill="{_PALETTE[j % len(_PALETTE)]}"/>')
        lines.append(f'<text x="{x + 14}" y="{y}">{escape(name)}</text>')
        x += 24 + 7 * len(name)
