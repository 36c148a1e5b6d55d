"""Differencing, deterministic trend fits and moving volatilities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats

from ..errors import DataError, InsufficientDataError

SIGNED_EPS = 1e-9


def first_difference(series) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if len(x) < 2:
        raise InsufficientDataError("first difference needs at least 2 values")
    return np.diff(x)


@dataclass(frozen=True, slots=True)
class TrendFit:
    intercept: float
    slope: float
    slope_p_value: float
    increasing: bool
    n_obs: int


def time_trend(series) -> TrendFit:
    """OLS of ``x_t`` on ``(1, t)`` with ``t = 0, 1, ...``.

    Values are measured from the first observation before fitting so that a
    constant series gives an exactly zero slope.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = len(x)
    if n < 3:
        raise InsufficientDataError("time trend needs at least 3 values")
    if not np.all(np.isfinite(x)):
        raise DataError("series contains missing or non-finite values")
    t = np.arange(n, dtype=float)
    tc = t - t.mean()
    dev = x - x[0]
    stt = float(tc @ tc)
    slope = float(tc @ dev) / stt
    level = float(dev.mean())
    resid = dev - level - slope * tc
    s2 = float(resid @ resid) / (n - 2)
    se = math.sqrt(s2 / stt)
    if se > 0:
        p = float(2.0 * stats.t.sf(abs(slope / se), n - 2))
    else:
        p = 0.0 if slope != 0 else 1.0
    intercept = x[0] + level - slope * t.mean()
    return TrendFit(float(intercept), slope, p, slope > 0, n)


def _trailing_std(values: np.ndarray, window: int) -> np.ndarray:
    """Sample stdev of each full trailing window, NaN-aware; NaN where < 2 values."""
    out = np.full(len(values), np.nan)
    if len(values) < window:
        return out
    win = sliding_window_view(values, window)
    ok = np.isfinite(win)
    cnt = ok.sum(axis=1)
    filled = np.where(ok, win, 0.0)
    mean = filled.sum(axis=1) / np.maximum(cnt, 1)
    dev = np.where(ok, win - mean[:, None], 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sd = np.sqrt((dev * dev).sum(axis=1) / (cnt - 1))
    sd[cnt < 2] = np.nan
    out[window - 1:] = sd
    return out


def moving_vol_log(series, window: int = 90) -> np.ndarray:
    """Trailing stdev of log changes over ``window`` changes.

    Output is aligned with the input; position ``t`` uses
    ``ln(x_s / x_{s-1})`` for ``s = t-window+1 .. t`` and the first ``window``
    positions are NaN. Requires strictly positive input; use
    :func:`moving_vol_signed` for series that change sign.
    """
    x = np.asarray(series, dtype=float).ravel()
    if np.any(~(x > 0)):
        raise DataError("moving_vol_log needs positive values; use moving_vol_signed for signed series")
    if len(x) < window + 1:
        raise InsufficientDataError(f"need at least {window + 1} values, got {len(x)}")
    r = np.full(len(x), np.nan)
    r[1:] = np.log(x[1:] / x[:-1])
    out = _trailing_std(r, window)
    out[:window] = np.nan
    return out


def moving_vol_signed(series, ma_window: int = 5, vol_window: int = 90, eps: float = SIGNED_EPS) -> np.ndarray:
    """Volatility for series that may be zero or negative.

    The series is smoothed with a trailing ``ma_window`` mean, converted to
    percentage changes ``(m_t - m_{t-1}) / |m_{t-1}|`` (skipped where
    ``|m_{t-1}| <= eps``), and the trailing stdev over ``vol_window``
    positions is taken over the non-skipped changes.
    """
    y = np.asarray(series, dtype=float).ravel()
    if len(y) < ma_window + vol_window + 1:
        raise InsufficientDataError(f"need at least {ma_window + vol_window + 1} values, got {len(y)}")
    m = np.full(len(y), np.nan)
    m[ma_window - 1:] = sliding_window_view(y, ma_window).mean(axis=1)
    prev = np.full(len(y), np.nan)
    prev[1:] = m[:-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        pct = np.where(np.abs(prev) > eps, (m - prev) / np.abs(prev), np.nan)
    out = _trailing_std(pct, vol_window)
    out[:ma_window + vol_window - 1] = np.nan
    return out
