"""Command-line entry point: ``ticktca {gen,tca,mie,birdseye,deepdive}``.

Every subcommand accepts ``--config PATH``, ``--out DIR`` and ``--seed N``;
flags win over the config file. Commands other than ``gen`` read their
inputs from ``--data DIR`` (default: the output directory). Log verbosity
comes from ``TICKTCA_LOG_LEVEL``; warnings and above are always mirrored
to ``run.log`` in the output directory.

Exit status: 0 on success, 1 on invalid configuration or arguments, 2 on
bad or missing data.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__, report
from .config import RunConfig, load_config
from .errors import DataError, TickTcaError, ValidationError
from .events import (PHASES, SCHEMES, Buckets, Metric, affected_securities, birdseye_compare, daily_aggregates,
                     make_buckets)
from .econometrics import moving_vol_log, moving_vol_signed
from .marketdata import (DAILY_COLUMNS, FILL_COLUMNS, FX_COLUMNS, ORDER_COLUMNS, SPLIT_COLUMNS, SecurityDay, Side,
                         adjust_frame, parse_splits, read_daily_frame, read_fx_table, read_order_frames)
from .mie import SimParams, TopixTickCalendar, build_profile, calibration_error, estimate_market_impact
from .pipelines import (CostMetric, Lag, build_panel, cost_regressions, regression_rows, security_day_regressors,
                        stationarity_screen, trend_screen, volume_regressions, DEFAULT_DIFFERENCED)
from .synth import CostModel, SynthConfig, generate_market, generate_orders
from .tca import MIMode, cost_table

log = logging.getLogger("ticktca")
LOG_ENV = "TICKTCA_LOG_LEVEL"
TRUTH_COLUMNS = ("order_id", "target_mi_bps", "target_mt_bps", "bucket_effect_bps")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ticktca", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, help="INI configuration file")
        s.add_argument("--out", type=Path, help="output directory")
        s.add_argument("--seed", type=int, help="random seed")
        if name != "gen":
            s.add_argument("--data", type=Path, help="input directory (default: --out)")
        return s

    g = common("gen", "generate a synthetic market and order set")
    g.add_argument("--n-securities", type=int)
    g.add_argument("--n-orders", type=int)
    t = common("tca", "decompose every order's cost into impact and timing")
    t.add_argument("--mode", choices=[m.value for m in MIMode])
    t.add_argument("--paper-sign", action="store_true", default=None, help="report costs as negative numbers")
    m = common("mie", "simulate market impact estimates over an order-size grid")
    m.add_argument("--sizes", help="comma-separated order sizes in shares")
    m.add_argument("--n-paths", type=int)
    common("birdseye", "before/after comparisons around each tick-size change")
    d = common("deepdive", "aggregates, screens and regressions over the sample windows")
    d.add_argument("--interactions", action="store_true", default=None)
    return p


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "data", None) is not None:
        cfg.data = args.data
    if args.command == "gen":
        if args.n_securities is not None:
            cfg.gen.n_securities = args.n_securities
        if args.n_orders is not None:
            cfg.gen.n_orders = args.n_orders
    elif args.command == "tca":
        if args.mode is not None:
            cfg.tca.mode = MIMode(args.mode)
        if args.paper_sign:
            cfg.tca.paper_sign = True
    elif args.command == "mie":
        if args.sizes is not None:
            try:
                cfg.mie.sizes = tuple(float(x) for x in args.sizes.split(",") if x.strip())
            except ValueError:
                raise ValidationError(f"--sizes: not a number list: {args.sizes!r}") from None
        if args.n_paths is not None:
            cfg.mie.n_paths = args.n_paths
    elif args.command == "deepdive" and args.interactions:
        cfg.deepdive.interactions = True
    return cfg


def _setup_logging(out: Path) -> logging.Handler:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    root = logging.getLogger()
    root.setLevel(logging.DEBUG)
    for h in list(root.handlers):
        if getattr(h, "_ticktca", False):
            root.removeHandler(h)
            h.close()
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    console._ticktca = True
    out.mkdir(parents=True, exist_ok=True)
    # no timestamps, so identical runs leave identical logs
    logfile = logging.FileHandler(out / "run.log", mode="w", encoding="utf-8")
    logfile.setLevel(min(logging.getLevelName(level), logging.WARNING))
    logfile.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logfile._ticktca = True
    root.addHandler(console)
    root.addHandler(logfile)
    return logfile


def main(argv: Sequence[str] | None = None) -> int:
    handler = None
    try:
        args = _parser().parse_args(argv)
        cfg = _resolve(args)
        handler = _setup_logging(cfg.out)
        COMMANDS[args.command](cfg)
        return 0
    except ValidationError as exc:
        log.error("%s", exc) if handler else print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        log.error("%s", exc) if handler else print(f"error: {exc}", file=sys.stderr)
        return 2
    except TickTcaError as exc:
        log.error("%s", exc)
        return 2
    finally:
        root = logging.getLogger()
        for h in list(root.handlers):
            if getattr(h, "_ticktca", False):
                root.removeHandler(h)
                h.close()


# -- helpers ------------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_manifest(out: Path, name: str, files: dict[str, int], seed: int, extra: dict | None = None) -> dict:
    manifest = {"seed": seed, "files": {f: {"rows": n, "sha256": _sha256(out / f)} for f, n in sorted(files.items())}}
    if extra:
        manifest.update(extra)
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (out / name).write_text(text, encoding="utf-8")
    return manifest


def _input(cfg: RunConfig, name: str) -> Path:
    path = cfg.data_dir / name
    if not path.is_file():
        raise DataError(f"missing input file {path}")
    return path


def _read_splits(cfg: RunConfig):
    path = cfg.data_dir / "splits.csv"
    return parse_splits(path) if path.is_file() else []


def _adjusted_daily(cfg: RunConfig) -> pd.DataFrame:
    daily = read_daily_frame(_input(cfg, "daily.csv"))
    if daily.empty:
        raise DataError("daily.csv has no rows")
    return adjust_frame(daily, _read_splits(cfg))


def _buckets(cfg: RunConfig) -> tuple[Buckets, dict[str, Buckets]]:
    liq = make_buckets(cfg.liquidity_pct, "%")
    notional = {k: make_buckets(v, "MM", 1e6) for k, v in cfg.notional_mm.items()}
    return liq, notional


def _costs(cfg: RunConfig, mode: MIMode = MIMode.STANDARD) -> pd.DataFrame:
    orders, fills = read_order_frames(_input(cfg, "orders.csv"), _input(cfg, "fills.csv"))
    daily = read_daily_frame(_input(cfg, "daily.csv"))
    fx = read_fx_table(_input(cfg, "fx.csv"))
    costs = cost_table(orders, fills, daily, fx, mode)
    liq, notional = _buckets(cfg)
    costs["liq_bucket"] = liq.assign(costs["liq_pct"].to_numpy())
    for k, b in notional.items():
        costs[f"notional_bucket_{k.lower()}"] = b.assign(costs["notional_usd"].to_numpy())
    return costs


# -- commands -----------------------------------------------------------------

def cmd_gen(cfg: RunConfig) -> dict:
    g = cfg.gen
    synth = SynthConfig(n_securities=g.n_securities, n_orders=g.n_orders, max_fills=g.max_fills,
                        spread_step_down=(g.spread_step_down,) * 2,
                        cost=CostModel(noise_bps=g.noise_bps, period_effect_bps=g.effect_bps), seed=cfg.seed)
    market = generate_market(synth)
    orders = generate_orders(synth, market)
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    daily = market.daily.rename(columns=dict(zip(["close", "spread", "volume", "trades"], DAILY_COLUMNS[2:])))
    files = {
        "daily.csv": report.write_csv(out / "daily.csv", DAILY_COLUMNS, daily),
        "orders.csv": report.write_csv(out / "orders.csv", ORDER_COLUMNS, orders.orders),
        "fills.csv": report.write_csv(out / "fills.csv", FILL_COLUMNS, orders.fills),
        "fx.csv": report.write_csv(out / "fx.csv", FX_COLUMNS, market.fx),
        "splits.csv": report.write_csv(out / "splits.csv", SPLIT_COLUMNS, market.splits),
        "truth.csv": report.write_csv(out / "truth.csv", TRUTH_COLUMNS, orders.truth),
    }
    manifest = _write_manifest(out, "manifest.json", files, cfg.seed)
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def cmd_tca(cfg: RunConfig) -> pd.DataFrame:
    costs = _costs(cfg)
    columns = list(report.COSTS_COLUMNS)
    if cfg.tca.mode is MIMode.NET_NEW_LEVELS:
        nnl = _costs(cfg, MIMode.NET_NEW_LEVELS)
        costs["mi_nnl_bps"] = nnl["mi_bps"].to_numpy()
        costs["mt_nnl_bps"] = nnl["mt_bps"].to_numpy()
        columns += ["mi_nnl_bps", "mt_nnl_bps"]
    if cfg.tca.paper_sign:
        for c in columns:
            if c.endswith("_bps"):
                costs[c] = -costs[c]
    truth_path = cfg.data_dir / "truth.csv"
    if truth_path.is_file() and len(costs):
        truth = pd.read_csv(truth_path, dtype={"order_id": str}, float_precision="round_trip")
        merged = costs[["order_id", "mi_bps"]].merge(truth, on="order_id", how="inner")
        sign = -1.0 if cfg.tca.paper_sign else 1.0
        err = np.abs(sign * merged["mi_bps"] - merged["target_mi_bps"]).max() if len(merged) else 0.0
        log.info("tca: %d orders matched to truth labels; max |mi_bps - target| = %.3g", len(merged), err)
    cfg.out.mkdir(parents=True, exist_ok=True)
    n = report.write_csv(cfg.out / "costs.csv", columns, costs)
    _write_manifest(cfg.out, "tca_manifest.json", {"costs.csv": n}, cfg.seed, {"mode": cfg.tca.mode.value,
                                                                             "paper_sign": cfg.tca.paper_sign})
    return costs


def _history(daily: pd.DataFrame):
    return {sid: list(records_frame_iter(g)) for sid, g in daily.groupby("security_id", sort=True)}


def records_frame_iter(frame: pd.DataFrame):
    for r in frame.itertuples(index=False):
        yield SecurityDay(r.security_id, pd.Timestamp(r.date).date(), float(r.close), float(r.spread),
                          float(r.volume), int(r.trades))


def cmd_mie(cfg: RunConfig) -> pd.DataFrame:
    opt = cfg.mie
    daily = _adjusted_daily(cfg)
    history = _history(daily)
    ticks = TopixTickCalendar()
    base = SimParams(participation_rate=opt.participation_rate, style=opt.style, start_frac=opt.start_frac,
                     end_frac=opt.end_frac, n_paths=opt.n_paths, seed=cfg.seed,
                     depletion_ticks=opt.depletion_ticks)
    rows = []
    for sid in sorted(history)[:opt.max_securities]:
        try:
            profile = build_profile(history[sid], opt.lookback_days, ticks, opt.intervals_per_day)
        except DataError as exc:
            log.warning("mie: %s skipped: %s", sid, exc)
            continue
        for size in opt.sizes:
            res = estimate_market_impact(size, profile, base)
            rows.append({"security_id": sid, "order_shares": float(size), "mean_bps": res.mean_bps,
                         "stdev_bps": res.stdev_bps, "mean_executions": res.mean_executions,
                         "n_paths": res.n_paths, "seed": cfg.seed})
    if not rows:
        raise DataError("mie: no security has enough history for a profile")
    cfg.out.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame(rows)
    files = {"mie.csv": report.write_csv(cfg.out / "mie.csv", report.MIE_COLUMNS, table)}
    if (cfg.data_dir / "orders.csv").is_file() and opt.calibration_orders > 0:
        files.update(_calibrate(cfg, history, base, ticks))
    _write_manifest(cfg.out, "mie_manifest.json", files, cfg.seed)
    return table


def _calibrate(cfg: RunConfig, history, base: SimParams, ticks) -> dict[str, int]:
    """Estimate impact for a deterministic subset of real orders and compare with realized impact."""
    opt = cfg.mie
    costs = _costs(cfg)
    orders = pd.read_csv(_input(cfg, "orders.csv"), dtype={"order_id": str, "security_id": str},
                         float_precision="round_trip")
    costs = costs.merge(orders[["order_id", "total_shares"]], on="order_id")
    pairs = []
    for row in costs.sort_values("order_id", kind="stable").itertuples(index=False):
        if len(pairs) >= opt.calibration_orders:
            break
        day = pd.Timestamp(row.arrival_date).date()
        prior = [r for r in history.get(row.security_id, []) if r.date < day]
        if len(prior) < opt.lookback_days:
            continue
        profile = build_profile(prior, opt.lookback_days, ticks, opt.intervals_per_day)
        params = replace(base, side=Side.parse(row.side))
        est = estimate_market_impact(float(row.total_shares), profile, params)
        pairs.append({"order_id": row.order_id, "security_id": row.security_id, "mie_bps": est.mean_bps,
                      "realized_mi_bps": row.mi_bps})
    if not pairs:
        log.warning("mie: no order has %d days of prior history; calibration skipped", opt.lookback_days)
        return {}
    table = pd.DataFrame(pairs)
    mae = calibration_error(table["mie_bps"], table["realized_mi_bps"])
    log.info("mie: calibration over %d orders, mean absolute error %.4g bps", len(table), mae)
    n = report.write_csv(cfg.out / "calibration.csv", ("order_id", "security_id", "mie_bps", "realized_mi_bps"),
                         table)
    summary = [{"n_pairs": len(table), "mae_bps": mae}]
    report.write_csv(cfg.out / "calibration_summary.csv", ("n_pairs", "mae_bps"), summary)
    return {"calibration.csv": n, "calibration_summary.csv": 1}


def cmd_birdseye(cfg: RunConfig) -> pd.DataFrame:
    daily = _adjusted_daily(cfg)
    records = list(records_frame_iter(daily))
    detail, summary = [], []
    for phase in PHASES:
        warnings: list[str] = []
        affected = affected_securities(records, phase, warnings)
        for scheme in SCHEMES:
            for metric in Metric:
                try:
                    res = birdseye_compare(records, phase, scheme, metric, affected=affected)
                except DataError as exc:
                    log.warning("birdseye: %s", exc)
                    continue
                summary.append({"phase": phase.label, "scheme": scheme.label, "metric": metric.value,
                                "pct_decreased_affected": res.pct_decreased_affected,
                                "pct_decreased_all": res.pct_decreased_all, "n_affected": res.n_affected,
                                "n_all": res.n_all})
                for c in res.per_security:
                    detail.append({"phase": phase.label, "scheme": scheme.label, "metric": metric.value,
                                   "security_id": c.security_id, "affected": c.affected, "before": c.before,
                                   "after": c.after, "pct_change": c.pct_change})
    if not summary:
        raise DataError("birdseye: no comparison could be made")
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    files = {"birdseye.csv": report.write_csv(out / "birdseye.csv", report.BIRDSEYE_COLUMNS, detail),
             "birdseye_summary.csv": report.write_csv(out / "birdseye_summary.csv",
                                                      report.BIRDSEYE_SUMMARY_COLUMNS, summary)}
    table = pd.DataFrame(summary)
    for (phase, scheme), g in table.groupby(["phase", "scheme"], sort=False):
        name = f"birdseye_{phase}_{scheme}.svg"
        report.bar_chart(out / name, f"{phase} {scheme}: names with a decrease", list(g["metric"]),
                         {"affected": list(g["pct_decreased_affected"]), "all": list(g["pct_decreased_all"])},
                         ylabel="% of securities", ymax=100.0)
        files[name] = 0
    _write_manifest(out, "birdseye_manifest.json", files, cfg.seed)
    return table


def _cell(what: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except TickTcaError as exc:
        raise type(exc)(f"{what}: {exc}") from exc


def cmd_deepdive(cfg: RunConfig) -> dict[str, int]:
    opt = cfg.deepdive
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    daily = _adjusted_daily(cfg)
    fx = read_fx_table(_input(cfg, "fx.csv"))
    panel = build_panel(daily, fx)
    files: dict[str, int] = {}

    # cross-sectional aggregates and their volatilities
    agg = daily_aggregates(daily)
    totals = daily.groupby("date", sort=True)[["volume", "trades"]].sum().reset_index()
    agg = agg.merge(totals, on="date", how="left")
    agg["usd_jpy"] = fx.rates_for(agg["date"].to_numpy().astype("datetime64[D]"))
    costs = None
    if (cfg.data_dir / "orders.csv").is_file():
        costs = _costs(cfg)
        by_day = costs.groupby("arrival_date", sort=True)[["mi_bps", "mt_bps", "is_bps"]].mean()
        agg = agg.merge(by_day.rename_axis("date").reset_index(), on="date", how="left")
    else:
        log.warning("deepdive: no orders.csv; cost pipelines skipped")
    files["aggregates.csv"] = report.write_csv(out / "aggregates.csv", list(agg.columns), agg)

    vols = pd.DataFrame({"date": agg["date"]})
    for col in ("EW_Spread", "VW_Spread", "EW_SpreadOverPrice", "EW_TradeSize", "volume", "trades", "usd_jpy"):
        vals = agg[col].to_numpy(dtype=float)
        vols[f"vol_{col}"] = (moving_vol_log(vals, opt.vol_window) if np.all(vals > 0)
                              else np.full(len(vals), np.nan))
    if costs is not None:
        for col in ("mi_bps", "mt_bps", "is_bps"):
            vols[f"vol_{col}"] = moving_vol_signed(agg[col].fillna(0.0).to_numpy(), 5, opt.vol_window)
    files["volatility.csv"] = report.write_csv(out / "volatility.csv", list(vols.columns), vols)
    _deepdive_charts(out, agg, vols, costs is not None, files)

    # screens
    screen = _cell("stationarity screen", stationarity_screen, panel, cfg.samples)
    files["stationarity.csv"] = report.write_csv(out / "stationarity.csv", report.STATIONARITY_COLUMNS,
                                                 screen.details)
    files["stationarity_counts.csv"] = report.write_csv(
        out / "stationarity_counts.csv", ("variable", "sample", "column", "value", "n", "skipped"),
        screen.table.to_frame())
    differenced = screen.differenced if opt.policy == "screen" else {v: v in DEFAULT_DIFFERENCED
                                                                     for v in screen.differenced}
    policy_rows = [{"variable": v, "differenced": d, "source": opt.policy} for v, d in differenced.items()]
    files["differencing.csv"] = report.write_csv(out / "differencing.csv", ("variable", "differenced", "source"),
                                                 policy_rows)
    for v, d in differenced.items():
        log.info("deepdive: %s entered %s", v, "in first differences" if d else "in levels")

    trends = _cell("trend screen", trend_screen, panel, cfg.samples, end_dates=(None, opt.trend_end))
    files["trend.csv"] = report.write_csv(out / "trend.csv", report.TREND_COLUMNS, trends.details)
    files["trend_counts.csv"] = report.write_csv(out / "trend_counts.csv",
                                                 ("variable", "sample", "column", "value", "n", "skipped"),
                                                 trends.table.to_frame())

    # regressions
    rows = []
    for w in cfg.samples:
        for variant in (1, 2, 3):
            for lag in Lag:
                spec = f"variant{variant}|lag={lag.label}"
                res = _cell(f"volume regression {w.label} {spec}", volume_regressions, panel, w, variant, lag,
                            differenced, opt.demean)
                rows += regression_rows("volume", w.label, spec, res)
    if costs is not None:
        regs = security_day_regressors(panel, differenced, opt.vol_window)
        liq, notional = _buckets(cfg)
        for w in cfg.samples:
            for metric in CostMetric:
                for scheme in sorted(notional):
                    spec = f"{metric.value}|{scheme}" + ("|interactions" if opt.interactions else "")
                    fit = _cell(f"cost regression {w.label} {spec}", cost_regressions, costs, regs, w, metric,
                                scheme, opt.interactions, True, liq, notional, opt.demean)
                    rows += regression_rows("cost", w.label, spec, fit.result)
    files["regressions.csv"] = report.write_csv(out / "regressions.csv", report.REGRESSION_COLUMNS, rows)
    _write_manifest(out, "deepdive_manifest.json", files, cfg.seed)
    return files


def _deepdive_charts(out: Path, agg: pd.DataFrame, vols: pd.DataFrame, with_costs: bool, files) -> None:
    dates = agg["date"].to_numpy()
    marks = {p.label: np.datetime64(p.ex_date) for p in PHASES}
    charts = [
        ("spreads.svg", "Average spread", {w: agg[f"{w}_Spread"] for w in ("EW", "VW", "TW")}, "yen"),
        ("spread_over_price.svg", "Spread / price", {w: agg[f"{w}_SpreadOverPrice"] for w in ("EW", "VW", "TW")},
         "ratio"),
        ("trade_size.svg", "Average trade size", {w: agg[f"{w}_TradeSize"] for w in ("EW", "VW", "TW")},
         "shares"),
        ("volume.svg", "Total volume", {"volume": agg["volume"]}, "shares"),
        ("trades.svg", "Total trade count", {"trades": agg["trades"]}, "trades"),
        ("volatility.svg", "Moving volatility of log changes",
         {c.removeprefix("vol_"): vols[c] for c in ("vol_EW_Spread", "vol_volume", "vol_trades", "vol_usd_jpy")},
         "stdev"),
    ]
    if with_costs:
        charts.append(("costs.svg", "Mean order cost by arrival date",
                       {"MI": agg["mi_bps"], "MT": agg["mt_bps"], "IS": agg["is_bps"]}, "bps"))
    for name, title, series, ylabel in charts:
        report.line_chart(out / name, title, dates, {k: v.to_numpy(dtype=float) for k, v in series.items()},
                          ylabel=ylabel, markers=marks)
        files[name] = 0


COMMANDS = {"gen": cmd_gen, "tca": cmd_tca, "mie": cmd_mie, "birdseye": cmd_birdseye, "deepdive": cmd_deepdive}


if __name__ == "__main__":
    sys.exit(main())
