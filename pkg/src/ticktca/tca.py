"""Order-level cost decomposition.

Implementation shortfall (total slippage) is split into the market impact
of the order's own fills and the market timing residual left by everyone
else. All quantities are cost-positive internally: an adverse price move
is a positive cost for either side. Use :func:`to_paper_sign` to flip to
the reporting convention in which impact is negative or zero.

Basis points are taken against the arrival notional ``S̄ * P_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd

from .errors import DataError, ValidationError
from .marketdata import FxTable, Order, Side, to_usd

BPS = 1e4


class MIMode(str, Enum):
    STANDARD = "standard"
    NET_NEW_LEVELS = "net-new-levels"


@dataclass(frozen=True, slots=True)
class TradingTrajectory:
    """Pending shares ``W_1 .. W_{T+1}`` before each fill."""

    W: tuple[float, ...]

    def executed(self) -> tuple[float, ...]:
        return tuple(a - b for a, b in zip(self.W, self.W[1:]))


@dataclass(frozen=True, slots=True)
class CostRecord:
    order_id: str
    security_id: str
    side: Side
    arrival_date: object
    is_ccy: float
    mi_ccy: float
    mt_ccy: float
    is_bps: float
    mi_bps: float
    mt_bps: float
    liquidity_demand_pct: float
    notional_usd: float
    n_fills: int


def _bps(amount: float, notional: float) -> float:
    if notional == 0:
        raise ValidationError("arrival notional S̄·P_0 is zero")
    return BPS * amount / notional


def paper_return(order: Order, final_price: float) -> float:
    """Frictionless P&L of trading ``S̄`` instantly at ``P_0`` and marking at ``P_T``."""
    if not final_price > 0:
        raise ValidationError("final price must be > 0")
    return order.side.sign * (order.total_shares * final_price - order.total_shares * order.reference_price)


def implementation_shortfall(order: Order) -> tuple[float, float]:
    """Total slippage as ``(yen, bps)``; positive means the fills cost more than arrival."""
    spent = math.fsum(f.shares * f.price for f in order.fills)
    ccy = order.side.sign * (spent - order.notional)
    return ccy, _bps(ccy, order.notional)


def _impact_terms(order: Order, mode: MIMode) -> list[float]:
    sign = order.side.sign
    prev = order.reference_price
    extreme = sign * order.reference_price
    terms = []
    for f in order.fills:
        if mode is MIMode.STANDARD:
            step = sign * (f.price - prev)
        else:
            # only the part of the move beyond the worst level seen so far
            step = sign * f.price - extreme
            extreme = max(extreme, sign * f.price)
        terms.append(max(step, 0.0) * f.shares)
        prev = f.price
    return terms


def market_impact(order: Order, mode: MIMode = MIMode.STANDARD) -> tuple[float, float]:
    """Accumulated adverse fill-to-fill price moves times fill size, as ``(yen, bps)``.

    The move into the first fill is measured from ``P_0``. In
    ``NET_NEW_LEVELS`` mode a move only counts where it pushes past the most
    adverse fill price established earlier in the order.
    """
    ccy = math.fsum(_impact_terms(order, MIMode(mode)))
    return ccy, _bps(ccy, order.notional)


def market_timing(order: Order, mode: MIMode = MIMode.STANDARD) -> tuple[float, float]:
    """Residual slippage ``IS - MI``; either sign."""
    is_ccy, _ = implementation_shortfall(order)
    mi_ccy, _ = market_impact(order, mode)
    ccy = is_ccy - mi_ccy
    return ccy, _bps(ccy, order.notional)


def decompose(order: Order, mode: MIMode = MIMode.STANDARD) -> tuple[float, float, float]:
    """Return ``(is_ccy, mi_ccy, mt_ccy)`` with ``is_ccy == mi_ccy + mt_ccy`` exactly.

    The timing term is computed first as ``IS - MI``; the reported shortfall
    is then re-formed as ``MI + MT``, which differs from the directly summed
    shortfall by at most one rounding.
    """
    raw_is, _ = implementation_shortfall(order)
    mi, _ = market_impact(order, mode)
    mt = raw_is - mi
    return mi + mt, mi, mt


def trajectory(order: Order) -> TradingTrajectory:
    remaining = [order.total_shares]
    for f in order.fills:
        remaining.append(remaining[-1] - f.shares)
    # the last entry is zero by the fully-filled invariant; pin it exactly
    remaining[-1] = 0.0
    return TradingTrajectory(tuple(remaining))


def cost_record(order: Order, daily_volume: float, fx: FxTable,
                mode: MIMode = MIMode.STANDARD) -> CostRecord:
    if not daily_volume > 0:
        raise DataError(f"order {order.order_id}: daily volume must be > 0")
    is_ccy, mi_ccy, mt_ccy = decompose(order, mode)
    mi_bps = _bps(mi_ccy, order.notional)
    mt_bps = _bps(mt_ccy, order.notional)
    return CostRecord(
        order_id=order.order_id,
        security_id=order.security_id,
        side=order.side,
        arrival_date=order.arrival_date,
        is_ccy=is_ccy,
        mi_ccy=mi_ccy,
        mt_ccy=mt_ccy,
        is_bps=mi_bps + mt_bps,
        mi_bps=mi_bps,
        mt_bps=mt_bps,
        liquidity_demand_pct=100.0 * order.total_shares / daily_volume,
        notional_usd=to_usd(order.notional, order.arrival_date, fx),
        n_fills=order.N,
    )


def to_paper_sign(values):
    """Flip cost-positive values to the reporting convention (costs negative)."""
    return -np.asarray(values) if not np.isscalar(values) else -values


# -- columnar path ------------------------------------------------------------

def decompose_arrays(order_pos: np.ndarray, price: np.ndarray, shares: np.ndarray,
                     reference_price: np.ndarray, side_sign: np.ndarray, total_shares: np.ndarray,
                     mode: MIMode = MIMode.STANDARD) -> dict[str, np.ndarray]:
    """Vectorised decomposition over many orders.

    Fills must be sorted by ``order_pos`` and then by sequence index;
    ``order_pos`` indexes the per-order arrays. Returns currency and bps
    arrays keyed ``is_ccy, mi_ccy, mt_ccy, is_bps, mi_bps, mt_bps`` plus
    ``n_fills``.
    """
    order_pos = np.asarray(order_pos, dtype=np.int64)
    price = np.asarray(price, dtype=float)
    shares = np.asarray(shares, dtype=float)
    p0 = np.asarray(reference_price, dtype=float)
    sign = np.asarray(side_sign, dtype=float)
    n = len(p0)
    if len(order_pos) and np.any(np.diff(order_pos) < 0):
        raise ValidationError("fills must be grouped by order")

    first = np.ones(len(order_pos), dtype=bool)
    first[1:] = order_pos[1:] != order_pos[:-1]
    fsign = sign[order_pos]
    if MIMode(mode) is MIMode.STANDARD:
        prev = np.empty_like(price)
        prev[1:] = price[:-1]
        prev[first] = p0[order_pos[first]]
        step = fsign * (price - prev)
    else:
        signed = pd.Series(fsign * price)
        running = signed.groupby(order_pos).cummax().to_numpy()
        prior = np.empty_like(running)
        prior[1:] = running[:-1]
        base = fsign * p0[order_pos]
        prior[first] = base[first]
        prior = np.maximum(prior, base)
        step = fsign * price - prior
    mi = np.bincount(order_pos, weights=np.maximum(step, 0.0) * shares, minlength=n)
    spent = np.bincount(order_pos, weights=price * shares, minlength=n)
    notional = np.asarray(total_shares, dtype=float) * p0
    raw_is = sign * (spent - notional)
    mt = raw_is - mi
    mi_bps = BPS * mi / notional
    mt_bps = BPS * mt / notional
    return {
        "is_ccy": mi + mt, "mi_ccy": mi, "mt_ccy": mt,
        "is_bps": mi_bps + mt_bps, "mi_bps": mi_bps, "mt_bps": mt_bps,
        "n_fills": np.bincount(order_pos, minlength=n),
    }


def cost_table(orders: pd.DataFrame, fills: pd.DataFrame, daily: pd.DataFrame, fx: FxTable,
               mode: MIMode = MIMode.STANDARD) -> pd.DataFrame:
    """Cost records for frames from :func:`ticktca.marketdata.read_order_frames`.

    Liquidity demand uses the order's security-day volume from ``daily``;
    orders without a matching positive-volume day raise :class:`DataError`.
    """
    sign = np.where(orders["side"].to_numpy() == Side.BUY.value, 1.0, -1.0)
    parts = decompose_arrays(fills["order_pos"].to_numpy(), fills["price_yen"].to_numpy(),
                             fills["shares"].to_numpy(), orders["arrival_price_yen"].to_numpy(),
                             sign, orders["total_shares"].to_numpy(), mode)
    vol = daily.set_index(["security_id", "date"])["volume"]
    key = pd.MultiIndex.from_arrays([orders["security_id"], orders["arrival_date"]])
    day_volume = vol.reindex(key).to_numpy()
    missing = ~(day_volume > 0)
    if missing.any():
        ids = orders["order_id"].to_numpy()[missing][:20]
        raise DataError(f"no positive daily volume for order(s): {', '.join(ids)}")
    notional_jpy = orders["total_shares"].to_numpy() * orders["arrival_price_yen"].to_numpy()
    rate = fx.rates_for(orders["arrival_date"].to_numpy().astype("datetime64[D]"))
    out = pd.DataFrame({
        "order_id": orders["order_id"].to_numpy(),
        "security_id": orders["security_id"].to_numpy(),
        "side": orders["side"].to_numpy(),
        "arrival_date": orders["arrival_date"].to_numpy(),
        "is_ccy": parts["is_ccy"], "mi_ccy": parts["mi_ccy"], "mt_ccy": parts["mt_ccy"],
        "is_bps": parts["is_bps"], "mi_bps": parts["mi_bps"], "mt_bps": parts["mt_bps"],
        "liq_pct": 100.0 * orders["total_shares"].to_numpy() / day_volume,
        "notional_usd": notional_jpy / rate,
        "n_fills": parts["n_fills"],
    })
    return out
