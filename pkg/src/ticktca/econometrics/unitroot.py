"""Unit-root and stationarity tests: ADF, Phillips-Perron, KPSS.

p-values come from frozen quantile tables (see ``_tables``) by linear
interpolation. Statistics beyond the tabulated range are clamped to the
nearest tabulated probability and flagged ``approximate``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import DataError, InsufficientDataError, ValidationError
from ._tables import DF_SURFACE, KPSS_QUANTILES, PROBS

MIN_LENGTH = 25
_PROBS = np.asarray(PROBS)
_TREND_COLS = {"n": 0, "c": 1, "ct": 2}


class Null(str, Enum):
    UNIT_ROOT = "UnitRoot"
    STATIONARY = "Stationary"


@dataclass(frozen=True, slots=True)
class TestResult:
    test: str
    statistic: float
    p_value: float
    lags_used: int
    null: Null
    nobs: int
    approximate: bool = False

    @property
    def reject_at_5pct(self) -> bool:
        return self.p_value < 0.05


def _check_series(x, min_length=MIN_LENGTH, allow_constant=False):
    x = np.asarray(x, dtype=float).ravel()
    if len(x) < min_length:
        raise InsufficientDataError(f"series length {len(x)} below minimum {min_length}")
    if not np.all(np.isfinite(x)):
        raise DataError("series contains missing or non-finite values")
    if not allow_constant and np.ptp(x) == 0:
        raise DataError("zero-variance (constant) series")
    return x


def schwert_lags(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def newey_west_bandwidth(n: int) -> int:
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def _deterministics(nobs: int, trend: str) -> np.ndarray:
    if trend not in _TREND_COLS:
        raise ValidationError(f"trend must be one of {sorted(_TREND_COLS)}, got {trend!r}")
    cols = []
    if trend in ("c", "ct"):
        cols.append(np.ones(nobs))
    if trend == "ct":
        cols.append(np.arange(1, nobs + 1, dtype=float))
    return np.column_stack(cols) if cols else np.empty((nobs, 0))


def df_quantiles(trend: str, nobs: int) -> np.ndarray:
    """Dickey-Fuller t quantiles at the tabulated probabilities for ``nobs`` observations."""
    coef = np.asarray(DF_SURFACE[trend])
    q = coef[:, 0] + coef[:, 1] / nobs + coef[:, 2] / nobs**2
    return np.maximum.accumulate(q)


def df_pvalue(stat: float, trend: str, nobs: int) -> tuple[float, bool]:
    """Left-tail p-value of a Dickey-Fuller type t statistic."""
    q = df_quantiles(trend, nobs)
    if stat < q[0]:
        return float(_PROBS[0]), True
    if stat > q[-1]:
        return float(_PROBS[-1]), True
    return float(np.interp(stat, q, _PROBS)), False


def kpss_pvalue(stat: float, trend: str) -> tuple[float, bool]:
    """Right-tail p-value of a KPSS statistic."""
    q = np.asarray(KPSS_QUANTILES[trend])
    if stat < q[0]:
        return float(1.0 - _PROBS[0]), True
    if stat > q[-1]:
        return float(1.0 - _PROBS[-1]), True
    return float(1.0 - np.interp(stat, q, _PROBS)), False


def _ols_t_last(y: np.ndarray, X: np.ndarray, col: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Coefficients, residuals and the t statistic of column ``col``."""
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    dof = len(y) - X.shape[1]
    s2 = resid @ resid / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    return beta, resid, float(beta[col] / math.sqrt(s2 * xtx_inv[col, col]))


def _adf_design(x: np.ndarray, lags: int, start: int, trend: str):
    dx = np.diff(x)
    # regression rows are indexed by t = start..n-1 in the dx array
    y = dx[start:]
    nobs = len(y)
    cols = [x[start:-1]]
    for j in range(1, lags + 1):
        cols.append(dx[start - j:len(dx) - j])
    X = np.column_stack(cols + [_deterministics(nobs, trend)])
    return y, X


def adf_test(series, max_lags: int | None = None, trend: str = "c",
             select: str = "t-stat", select_level: float = 1.645) -> TestResult:
    """Augmented Dickey-Fuller test; the null is a unit root.

    Regresses ``Δx_t`` on ``x_{t-1}``, lagged differences and deterministic
    terms. The lag order starts at ``max_lags`` (Schwert's rule
    ``⌊12 (n/100)^{1/4}⌋`` by default) and the longest lag is dropped while its
    absolute t statistic is below ``select_level``. Selection runs on a common
    sample; the chosen model is then refit on all usable observations. Pass
    ``select="fixed"`` to use exactly ``max_lags``.
    """
    x = _check_series(series)
    n = len(x)
    pmax = schwert_lags(n) if max_lags is None else int(max_lags)
    pmax = max(0, min(pmax, n // 2 - 3))
    lags = pmax
    if select == "t-stat":
        while lags > 0:
            y, X = _adf_design(x, lags, pmax, trend)
            _, _, t_last = _ols_t_last(y, X, lags)
            if abs(t_last) >= select_level:
                break
            lags -= 1
    elif select != "fixed":
        raise ValidationError(f"unknown lag selection {select!r}")
    y, X = _adf_design(x, lags, lags, trend)
    _, _, stat = _ols_t_last(y, X, 0)
    p, approx = df_pvalue(stat, trend, len(y))
    return TestResult("ADF", stat, p, lags, Null.UNIT_ROOT, len(y), approx)


def long_run_variance(resid: np.ndarray, bandwidth: int) -> float:
    """Newey-West (Bartlett kernel) long-run variance, scaled by 1/n."""
    n = len(resid)
    lrv = float(resid @ resid) / n
    for j in range(1, bandwidth + 1):
        w = 1.0 - j / (bandwidth + 1.0)
        lrv += 2.0 * w * float(resid[j:] @ resid[:-j]) / n
    return lrv


def pp_test(series, bandwidth: int | None = None, trend: str = "c") -> TestResult:
    """Phillips-Perron Z_tau test; the null is a unit root.

    The Dickey-Fuller regression without lag augmentation is corrected for
    serial correlation with a Newey-West long-run variance, bandwidth
    ``⌊4 (n/100)^{2/9}⌋`` by default.
    """
    x = _check_series(series)
    n = len(x)
    L = newey_west_bandwidth(n) if bandwidth is None else int(bandwidth)
    y = np.diff(x)
    nobs = len(y)
    X = np.column_stack([x[:-1], _deterministics(nobs, trend)])
    beta, resid, t_rho = _ols_t_last(y, X, 0)
    s2 = float(resid @ resid) / (nobs - X.shape[1])
    se_rho = abs(beta[0] / t_rho) if t_rho != 0 else math.sqrt(s2 * np.linalg.inv(X.T @ X)[0, 0])
    gamma0 = float(resid @ resid) / nobs
    lam2 = long_run_variance(resid, L)
    lam = math.sqrt(lam2)
    stat = math.sqrt(gamma0 / lam2) * t_rho - 0.5 * (lam2 - gamma0) / lam * (nobs * se_rho / math.sqrt(s2))
    p, approx = df_pvalue(stat, trend, nobs)
    return TestResult("PP", stat, p, L, Null.UNIT_ROOT, nobs, approx)


def kpss_test(series, trend: str = "c", bandwidth: int | None = None) -> TestResult:
    """KPSS test; the null is level (``trend="c"``) or trend (``"ct"``) stationarity.

    A constant series is trivially stationary: the statistic is 0 and the
    p-value is the table maximum.
    """
    if trend not in ("c", "ct"):
        raise ValidationError("KPSS trend must be 'c' (level) or 'ct' (trend)")
    x = _check_series(series, allow_constant=True)
    n = len(x)
    L = newey_west_bandwidth(n) if bandwidth is None else int(bandwidth)
    if np.ptp(x) == 0:
        p, _ = kpss_pvalue(0.0, trend)
        return TestResult("KPSS", 0.0, p, L, Null.STATIONARY, n, True)
    Z = _deterministics(n, trend)
    beta, *_ = np.linalg.lstsq(Z, x, rcond=None)
    resid = x - Z @ beta
    partial = np.cumsum(resid)
    lam2 = long_run_variance(resid, L)
    stat = float(partial @ partial) / (n * n * lam2) if lam2 > 0 else 0.0
    p, approx = kpss_pvalue(stat, trend)
    return TestResult("KPSS", stat, p, L, Null.STATIONARY, n, approx)
