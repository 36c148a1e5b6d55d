from dataclasses import dataclass

import pandas as pd
import pytest

from ticktca.events import LIQUIDITY_BUCKETS, NOTIONAL_BUCKETS
from ticktca.marketdata import FxTable, adjust_frame, order_frames
from ticktca.pipelines import build_panel, security_day_regressors
from ticktca.synth import SynthConfig, SynthMarket, SynthOrders, generate_market, generate_orders
from ticktca.tca import cost_table


@dataclass
class World:
    config: SynthConfig
    market: SynthMarket
    orders: SynthOrders
    costs: pd.DataFrame
    panel: pd.DataFrame

    def regressors(self, differenced=None):
        return security_day_regressors(self.panel, differenced)


def build_world(config: SynthConfig) -> World:
    market = generate_market(config)
    orders = generate_orders(config, market)
    o, f = order_frames(orders.orders, orders.fills)
    fx = FxTable.from_frame(market.fx)
    costs = cost_table(o, f, market.daily, fx)
    costs["liq_bucket"] = LIQUIDITY_BUCKETS.assign(costs["liq_pct"].to_numpy())
    for k, b in NOTIONAL_BUCKETS.items():
        costs[f"notional_bucket_{k.lower()}"] = b.assign(costs["notional_usd"].to_numpy())
    panel = build_panel(adjust_frame(market.daily, market.splits), fx)
    return World(config, market, orders, costs, panel)


@pytest.fixture(scope="session")
def world() -> World:
    """The default synthetic dataset: 100 securities, 370 days, 250k orders."""
    return build_world(SynthConfig())


@pytest.fixture(scope="session")
def small_world() -> World:
    return build_world(SynthConfig(n_securities=8, n_orders=4000, seed=3))
