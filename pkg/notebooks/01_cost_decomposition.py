"""
Splitting slippage into impact and timing
=========================================

One buy order, four fills. The market drifts up while we trade, dips, then
comes back. Part of that drift is ours.
"""

# %%
import datetime as dt

from ticktca.marketdata import Fill, Order, Side
from ticktca.tca import MIMode, decompose, implementation_shortfall, market_impact, trajectory

order = Order("demo", "7203", Side.BUY, dt.date(2014, 3, 3), reference_price=1000.0, total_shares=4000.0,
              fills=(Fill(1, 1001.0, 1000.0), Fill(2, 1003.0, 1000.0), Fill(3, 1001.0, 1000.0),
                     Fill(4, 1003.0, 1000.0)))

# %%
# Shortfall against arrival: every fill paid above 1000
print("IS  (yen, bps):", implementation_shortfall(order))

# %%
# Impact only counts the adverse steps between consecutive fills (1, 2, nothing for the dip, 2 again)
print("MI  standard  :", market_impact(order, MIMode.STANDARD))
# Net new levels ignores the climb back to 1003, a level we already paid
print("MI  new levels:", market_impact(order, MIMode.NET_NEW_LEVELS))

# %%
is_ccy, mi, mt = decompose(order)
print(f"IS {is_ccy} = MI {mi} + MT {mt}")
print("pending before each fill:", trajectory(order).W)

# %%
# The same numbers for a whole synthetic book, via the columnar path
from ticktca.marketdata import FxTable, order_frames
from ticktca.synth import SynthConfig, generate_market, generate_orders
from ticktca.tca import cost_table

cfg = SynthConfig(n_securities=10, n_orders=5000, seed=1)
market = generate_market(cfg)
book = generate_orders(cfg, market)
costs = cost_table(*order_frames(book.orders, book.fills), market.daily, FxTable.from_frame(market.fx))
print(costs[["is_bps", "mi_bps", "mt_bps"]].describe().round(2))
