"""Batch screens over a security-day panel and over per-order costs.

Every pipeline takes explicit sample windows. Transformations that look
across days (differences, lags, demeaning) are applied after a window is
sliced, so fitting on a pre-sliced panel gives the same answer as letting
the pipeline slice. Moving volatilities are the exception: they are
built once over the whole history with trailing windows, so a regressor
at date d never uses later data.
"""

from __future__ import annotations

import datetime as dt
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from .econometrics import RegressionResult, adf_test, kpss_test, moving_vol_log, ols, pp_test, time_trend
from .econometrics.unitroot import MIN_LENGTH
from .errors import DataError, InsufficientDataError, ValidationError
from .events import LIQUIDITY_BUCKETS, NOTIONAL_BUCKETS, Buckets
from .marketdata import DEFAULT_WINDOWS, OUTLIER_FREE_END, FxTable, SampleWindow, truncate_windows, window_mask

log = logging.getLogger(__name__)

VARIABLES = ("volume", "spread", "trade_size", "spread_over_price", "trades", "price", "inv_price", "usd_jpy")
TESTS = ("ADF", "PP", "KPSS")
# differenced by default: the level series that behave like random walks
DEFAULT_DIFFERENCED = frozenset({"price", "inv_price", "usd_jpy"})
VOL_WINDOW = 90
VOL_SOURCES = {"price": "price", "spread": "spread", "volume": "volume", "trades": "trades", "fx": "usd_jpy"}


class Lag(Enum):
    NONE = 0
    ONE_DAY = 1
    ONE_WEEK = 5

    @classmethod
    def parse(cls, value) -> Lag:
        if isinstance(value, Lag):
            return value
        if value is None:
            return cls.NONE
        if isinstance(value, str):
            key = value.strip().lower().replace("-", "").replace("_", "")
            names = {"none": cls.NONE, "oneday": cls.ONE_DAY, "1d": cls.ONE_DAY, "oneweek": cls.ONE_WEEK,
                     "1w": cls.ONE_WEEK}
            if key in names:
                return names[key]
            value = int(value)
        return cls(int(value))

    @property
    def label(self) -> str:
        return {0: "none", 1: "1d", 5: "1w"}[self.value]


class CostMetric(str, Enum):
    MI = "MI"
    MT = "MT"
    IS = "IS"

    @property
    def column(self) -> str:
        return f"{self.value.lower()}_bps"


@dataclass(frozen=True)
class Cell:
    value: object
    n: int = 0
    skipped: str | None = None


@dataclass
class ScreenTable:
    """Cells keyed by ``(variable, sample, column)``.

    ``column`` is a test name for the stationarity screen and a count name
    for the trend screen. Skipped cells carry the reason instead of a value.
    """

    columns: tuple[str, ...]
    cells: dict[tuple[str, str, str], Cell] = field(default_factory=dict)

    def __getitem__(self, key: tuple[str, str, str]) -> Cell:
        return self.cells[key]

    def value(self, variable: str, sample: str, column: str):
        return self.cells[(variable, sample, column)].value

    def to_frame(self) -> pd.DataFrame:
        rows = [{"variable": v, "sample": s, "column": c, "value": cell.value, "n": cell.n,
                 "skipped": cell.skipped or ""} for (v, s, c), cell in self.cells.items()]
        return pd.DataFrame(rows, columns=["variable", "sample", "column", "value", "n", "skipped"])

    def pivot(self) -> pd.DataFrame:
        f = self.to_frame()
        return f.pivot_table(index=["variable", "sample"], columns="column", values="value", aggfunc="first",
                             sort=False)


@dataclass
class StationarityScreen:
    table: ScreenTable
    details: pd.DataFrame
    differenced: dict[str, bool]


@dataclass
class TrendScreen:
    table: ScreenTable
    details: pd.DataFrame


# -- panel ---------------------------------------------------------------------

def build_panel(daily: pd.DataFrame, fx: FxTable | None = None) -> pd.DataFrame:
    """Security-day panel with the screened variables.

    ``daily`` needs ``security_id, date, close, spread, volume, trades``
    (split-adjusted) and either a ``usd_jpy`` column or an ``fx`` table.
    """
    need = {"security_id", "date", "close", "spread", "volume", "trades"}
    missing = need - set(daily.columns)
    if missing:
        raise ValidationError(f"daily frame lacks column(s): {', '.join(sorted(missing))}")
    d = daily.sort_values(["security_id", "date"], kind="stable").reset_index(drop=True)
    if "usd_jpy" in d.columns:
        fxs = d["usd_jpy"].to_numpy(dtype=float)
    elif fx is not None:
        fxs = fx.rates_for(d["date"].to_numpy().astype("datetime64[D]"))
    else:
        raise ValidationError("need a usd_jpy column or an fx table")
    close = d["close"].to_numpy(dtype=float)
    volume = d["volume"].to_numpy(dtype=float)
    trades = d["trades"].to_numpy(dtype=float)
    spread = d["spread"].to_numpy(dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        trade_size = np.where(trades > 0, volume / trades, np.nan)
    return pd.DataFrame({
        "security_id": d["security_id"].to_numpy(), "date": d["date"].to_numpy(),
        "volume": volume, "spread": spread, "trade_size": trade_size, "spread_over_price": spread / close,
        "trades": trades, "price": close, "inv_price": 1.0 / close, "usd_jpy": fxs,
    })


def slice_panel(panel: pd.DataFrame, window: SampleWindow, date_col: str = "date") -> pd.DataFrame:
    return panel.loc[window_mask(panel[date_col].to_numpy(), window)].reset_index(drop=True)


def _groups(panel: pd.DataFrame):
    return panel.groupby("security_id", sort=True)


# -- stationarity --------------------------------------------------------------

_TEST_FNS = {"ADF": adf_test, "PP": pp_test, "KPSS": kpss_test}


def stationarity_screen(panel: pd.DataFrame, samples: Sequence[SampleWindow] = DEFAULT_WINDOWS,
                        variables: Sequence[str] = VARIABLES, tests: Sequence[str] = TESTS,
                        difference: Iterable[str] = (), policy_sample: str | None = None,
                        policy_threshold: float = 0.5) -> StationarityScreen:
    """Count securities with p < 0.05 per variable, sample and test.

    Variables named in ``difference`` are tested in first differences. The
    differencing verdict for each variable comes from ADF on
    ``policy_sample`` (default: the first sample): a variable whose share of
    unit-root rejections is below ``policy_threshold`` is marked for
    differencing.
    """
    difference = set(difference)
    unknown = [t for t in tests if t not in _TEST_FNS]
    if unknown:
        raise ValidationError(f"unknown test(s): {unknown}")
    table = ScreenTable(tuple(tests))
    rows = []
    for w in samples:
        part = slice_panel(panel, w)
        for var in variables:
            counts = {t: 0 for t in tests}
            done = {t: 0 for t in tests}
            reasons: dict[str, str] = {}
            for sec, g in _groups(part):
                x = g[var].to_numpy(dtype=float)
                x = x[np.isfinite(x)]
                if var in difference:
                    x = np.diff(x)
                for t in tests:
                    if len(x) < MIN_LENGTH:
                        reasons[t] = f"series too short ({len(x)} < {MIN_LENGTH})"
                        continue
                    try:
                        r = _TEST_FNS[t](x)
                    except (DataError, ValidationError) as exc:
                        reasons[t] = str(exc)
                        continue
                    done[t] += 1
                    counts[t] += bool(r.reject_at_5pct)
                    rows.append((sec, var, w.label, t, r.statistic, r.p_value, r.reject_at_5pct))
            for t in tests:
                if done[t] == 0:
                    table.cells[(var, w.label, t)] = Cell(None, 0, reasons.get(t, "no securities in sample"))
                else:
                    table.cells[(var, w.label, t)] = Cell(counts[t], done[t])
    details = pd.DataFrame(rows, columns=["security_id", "variable", "sample", "test", "statistic", "p_value",
                                          "reject_5pct"])
    ref = policy_sample or (samples[0].label if samples else None)
    differenced = {}
    for var in variables:
        cell = table.cells.get((var, ref, "ADF")) if "ADF" in tests else None
        if cell is None or cell.skipped:
            differenced[var] = var in DEFAULT_DIFFERENCED
            log.info("differencing %s: %s (no ADF verdict, default)", var, differenced[var])
        else:
            differenced[var] = var not in difference and cell.value / cell.n < policy_threshold
            log.info("differencing %s: %s (ADF rejects %d/%d in %s)", var, differenced[var], cell.value,
                     cell.n, ref)
    return StationarityScreen(table, details, differenced)


# -- trends --------------------------------------------------------------------

def trend_screen(panel: pd.DataFrame, samples: Sequence[SampleWindow] = DEFAULT_WINDOWS,
                 variables: Sequence[str] = VARIABLES,
                 end_dates: Sequence[dt.date | None] = (None, OUTLIER_FREE_END)) -> TrendScreen:
    """Count securities with an increasing fitted trend per variable and sample.

    Each entry of ``end_dates`` is one run; ``None`` keeps the windows as
    given, a date caps them (see :func:`truncate_windows`). Samples of a
    capped run are labelled ``<label>@<date>``.
    """
    table = ScreenTable(("increasing", "increasing_5pct"))
    rows = []
    for end in end_dates:
        windows = tuple(samples) if end is None else truncate_windows(samples, end)
        for w in windows:
            label = w.label if end is None else f"{w.label}@{end.isoformat()}"
            part = slice_panel(panel, w)
            for var in variables:
                inc = sig = n = 0
                reason = "no securities in sample"
                for sec, g in _groups(part):
                    x = g[var].to_numpy(dtype=float)
                    x = x[np.isfinite(x)]
                    try:
                        fit = time_trend(x)
                    except (DataError, ValidationError) as exc:
                        reason = str(exc)
                        continue
                    n += 1
                    inc += fit.increasing
                    sig += fit.increasing and fit.slope_p_value < 0.05
                    rows.append((sec, var, label, fit.slope, fit.slope_p_value, fit.increasing))
                if n:
                    table.cells[(var, label, "increasing")] = Cell(inc, n)
                    table.cells[(var, label, "increasing_5pct")] = Cell(sig, n)
                else:
                    table.cells[(var, label, "increasing")] = Cell(None, 0, reason)
                    table.cells[(var, label, "increasing_5pct")] = Cell(None, 0, reason)
    details = pd.DataFrame(rows, columns=["security_id", "variable", "sample", "slope", "p_value", "increasing"])
    return TrendScreen(table, details)


# -- volume regressions --------------------------------------------------------

def _policy(differenced: Mapping[str, bool] | Iterable[str] | None) -> set[str]:
    if differenced is None:
        return set(DEFAULT_DIFFERENCED)
    if isinstance(differenced, Mapping):
        return {k for k, v in differenced.items() if v}
    return set(differenced)


def _transform(part: pd.DataFrame, columns: Sequence[str], diffed: set[str], lag: int) -> pd.DataFrame:
    """Per-security differences then lags of ``columns``; names get a ``d_`` prefix when differenced."""
    g = part.groupby("security_id", sort=False)
    out = {}
    for c in columns:
        s = part[c].astype(float)
        name = c
        if c in diffed:
            s = s - g[c].shift(1)
            name = f"d_{c}"
        if lag:
            s = s.groupby(part["security_id"], sort=False).shift(lag)
        out[name] = s
    return pd.DataFrame(out, index=part.index)


def _demean(y: np.ndarray, X: np.ndarray, groups: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    codes, inv = np.unique(groups, return_inverse=True)
    cnt = np.bincount(inv, minlength=len(codes)).astype(float)
    ym = np.bincount(inv, weights=y, minlength=len(codes)) / cnt
    Xm = np.column_stack([np.bincount(inv, weights=X[:, j], minlength=len(codes)) / cnt
                          for j in range(X.shape[1])]) if X.shape[1] else np.empty((len(codes), 0))
    return y - ym[inv], X - Xm[inv]


def _fit(y: np.ndarray, X: pd.DataFrame, groups: np.ndarray, demean: bool) -> RegressionResult:
    keep = np.isfinite(y) & np.isfinite(X.to_numpy(dtype=float)).all(axis=1)
    y, Xv, grp = y[keep], X.to_numpy(dtype=float)[keep], groups[keep]
    if demean:
        y, Xv = _demean(y, Xv, grp)
    if len(y) <= Xv.shape[1] + 1:
        raise InsufficientDataError(f"{len(y)} complete rows for {Xv.shape[1] + 1} coefficients")
    return ols(y, Xv, intercept=True, names=list(X.columns))


def volume_regressions(panel: pd.DataFrame, sample: SampleWindow, variant: int = 1, lag=None,
                       differenced: Mapping[str, bool] | Iterable[str] | None = None,
                       demean: bool = False) -> RegressionResult:
    """Pooled volume (variants 1, 2) or trade-count (variant 3) regression.

    Regressors: spread, trade count (variant 1 only), spread/price, 1/price and
    USD/JPY, the variables in ``differenced`` entering as first
    differences. ``lag`` shifts the regressors by 1 or 5 trading days within
    each security. Rows with any missing value are dropped.
    """
    if variant not in (1, 2, 3):
        raise ValidationError("variant must be 1, 2 or 3")
    lag = Lag.parse(lag)
    diffed = _policy(differenced)
    part = slice_panel(panel, sample)
    if part.empty:
        raise InsufficientDataError(f"no panel rows in {sample.label}")
    regs = ["spread", "trades", "spread_over_price", "inv_price", "usd_jpy"]
    if variant != 1:
        regs.remove("trades")
    X = _transform(part, regs, diffed, lag.value)
    y = part["trades" if variant == 3 else "volume"].to_numpy(dtype=float)
    return _fit(y, X, part["security_id"].to_numpy(), demean)


# -- cost regressions ----------------------------------------------------------

def security_day_regressors(panel: pd.DataFrame, differenced: Mapping[str, bool] | Iterable[str] | None = None,
                            vol_window: int = VOL_WINDOW) -> pd.DataFrame:
    """Per security-day regressors for the cost regressions.

    Levels and differences are built over the full history, as are the
    trailing moving volatilities ``vol_<name>`` of log changes.
    """
    diffed = _policy(differenced)
    p = panel.sort_values(["security_id", "date"], kind="stable").reset_index(drop=True)
    X = _transform(p, ["spread", "spread_over_price", "inv_price", "usd_jpy"], diffed, 0)
    X.insert(0, "date", p["date"].to_numpy())
    X.insert(0, "security_id", p["security_id"].to_numpy())
    for name, src in VOL_SOURCES.items():
        vol = np.full(len(p), np.nan)
        for _, idx in p.groupby("security_id", sort=False).indices.items():
            x = p[src].to_numpy(dtype=float)[idx]
            if np.all(x > 0):
                vol[idx] = moving_vol_log(x, vol_window)
            else:
                log.warning("vol_%s: non-positive values for %s, left missing", name, p["security_id"][idx[0]])
        X[f"vol_{name}"] = vol
    return X


@dataclass
class CostRegression:
    result: RegressionResult
    dropped: tuple[str, ...]
    warnings: tuple[str, ...]


def _dummies(labels: np.ndarray, buckets: Buckets, prefix: str, warnings: list[str]) -> pd.DataFrame:
    out = {}
    for lab in buckets.labels[1:]:
        col = (labels == lab).astype(float)
        if col.sum() == 0:
            warnings.append(f"empty bucket {prefix}{lab}: dummy dropped")
            continue
        out[f"{prefix}{lab}"] = col
    return pd.DataFrame(out)


def _interactions(X: pd.DataFrame, liq: np.ndarray, notional: np.ndarray, liq_labels, notional_labels,
                  warnings: list[str]) -> pd.DataFrame:
    """Liquidity × notional cell dummies that add information to ``X``.

    Empty cells are dropped, as is any cell whose dummy is a linear
    combination of the columns already present (for example the only
    populated cell of a bucket, which duplicates that bucket's dummy).
    """
    keep = np.isfinite(X.to_numpy(dtype=float)).all(axis=1)
    design = np.column_stack([np.ones(int(keep.sum())), X.to_numpy(dtype=float)[keep]])
    design /= np.maximum(np.sqrt((design * design).sum(axis=0)), 1e-300)
    # rank checks on the small Gram matrix; columns are unit-norm so its scale is fixed
    gram = design.T @ design
    rank = np.linalg.matrix_rank(gram, tol=1e-10)
    out = {}
    for a in liq_labels:
        for b in notional_labels:
            name = f"liq:{a}×notional:{b}"
            col = ((liq == a) & (notional == b)).astype(float)
            c = col[keep]
            if c.sum() == 0:
                warnings.append(f"empty bucket {name}: dummy dropped")
                continue
            c = c / np.sqrt(c.sum())
            cross = design.T @ c
            trial = np.block([[gram, cross[:, None]], [cross[None, :], np.array([[c @ c]])]])
            r = np.linalg.matrix_rank(trial, tol=1e-10)
            if r == rank:
                warnings.append(f"aliased bucket {name}: dummy dropped")
                continue
            design, gram, rank = np.column_stack([design, c]), trial, r
            out[name] = col
    return pd.DataFrame(out, index=X.index)


def cost_regressions(costs: pd.DataFrame, regressors: pd.DataFrame, sample: SampleWindow,
                     metric: CostMetric | str = CostMetric.MI, scheme: str = "A",
                     include_interactions: bool = False, paper_sign: bool = True,
                     liquidity_buckets: Buckets = LIQUIDITY_BUCKETS,
                     notional_buckets: Mapping[str, Buckets] | None = None,
                     demean: bool = False) -> CostRegression:
    """Pooled OLS of an order cost metric (bps) on market regressors and bucket dummies.

    ``costs`` is a :func:`ticktca.tca.cost_table` frame; ``regressors`` comes
    from :func:`security_day_regressors` and is joined on security and
    arrival date. The lowest liquidity bucket and the lowest notional bucket
    are the benchmarks. With ``paper_sign`` the response is negated so costs
    are negative.
    """
    metric = CostMetric(metric)
    nb = (notional_buckets or NOTIONAL_BUCKETS)
    if scheme not in nb:
        raise ValidationError(f"unknown notional scheme {scheme!r}")
    part = costs.loc[window_mask(costs["arrival_date"].to_numpy(), sample)]
    if part.empty:
        raise InsufficientDataError(f"no orders in {sample.label}")
    reg = regressors.rename(columns={"date": "arrival_date"})
    merged = part.merge(reg, on=["security_id", "arrival_date"], how="left", sort=False, validate="many_to_one")
    warnings: list[str] = []
    liq = liquidity_buckets.assign(merged["liq_pct"].to_numpy())
    notional = nb[scheme].assign(merged["notional_usd"].to_numpy())
    base = merged[[c for c in reg.columns if c not in ("security_id", "arrival_date")]].reset_index(drop=True)
    base.insert(0, "notional_mm", merged["notional_usd"].to_numpy() / 1e6)
    base.insert(1, "n_fills", merged["n_fills"].to_numpy(dtype=float))
    parts = [base, _dummies(liq, liquidity_buckets, "liq:", warnings), _dummies(notional, nb[scheme], "notional:",
                                                                                warnings)]
    if include_interactions:
        parts.append(_interactions(pd.concat(parts, axis=1), liq, notional, liquidity_buckets.labels[1:],
                                   nb[scheme].labels[1:], warnings))
    X = pd.concat(parts, axis=1)
    y = merged[metric.column].to_numpy(dtype=float)
    if paper_sign:
        y = -y
    for w in warnings:
        log.warning("%s %s/%s: %s", sample.label, metric.value, scheme, w)
    res = _fit(y, X, merged["security_id"].to_numpy(), demean)
    dropped = tuple(w.split(": dummy")[0].split(" ", 2)[2] for w in warnings)
    return CostRegression(res, dropped, tuple(warnings))


def bucket_effects(result: RegressionResult, prefix: str = "notional:") -> dict[str, float]:
    """Coefficients of the dummies starting with ``prefix``, keyed by bucket label."""
    return {n.removeprefix(prefix): float(c) for n, c in zip(result.names, result.coefficients)
            if n.startswith(prefix)}


def regression_rows(pipeline: str, sample: str, spec: str, result: RegressionResult) -> list[dict]:
    """Rows in the ``regressions.csv`` layout, one per coefficient."""
    return [{"pipeline": pipeline, "sample": sample, "spec": spec, "regressor": n, "coef": c, "std_err": s,
             "t_stat": t, "p_value": p, "adj_r2": result.adj_r_squared, "n_obs": result.n_obs}
            for n, c, s, t, p in zip(result.names, result.coefficients, result.std_errors, result.t_stats,
                                     result.p_values)]

