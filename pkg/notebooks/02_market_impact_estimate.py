"""
Simulated market impact for a hypothetical order
================================================

Build a 20-day volume and price-move profile, then ask what a 50k, 200k and
500k share order would cost under each trading style.
"""

# %%
import datetime as dt

import numpy as np

from ticktca.marketdata import SecurityDay
from ticktca.mie import SimParams, Style, build_profile, estimate_market_impact

rng = np.random.default_rng(0)
closes = 3500 * np.exp(np.cumsum(0.015 * rng.standard_normal(25)))
volumes = 2e6 * np.exp(0.3 * rng.standard_normal(25))
history = [SecurityDay("6758", dt.date(2014, 2, 3) + dt.timedelta(days=i), c, 2.0, v, 500)
           for i, (c, v) in enumerate(zip(closes, volumes))]

# tick size follows the TOPIX 100 calendar at the last history date
profile = build_profile(history, 20)
print("tick:", profile.tick_size, "reference:", round(profile.reference_price, 1))

# %%
for style in Style:
    params = SimParams(n_paths=200, seed=1, style=style)
    row = [estimate_market_impact(size, profile, params) for size in (50_000, 200_000, 500_000)]
    print(f"{style.value:>10}", "  ".join(f"{r.mean_bps:6.2f} ± {r.stdev_bps:5.2f}" for r in row))

# %%
# Bigger orders never cost less: the mean is monotone in size for a fixed seed
sizes = np.linspace(0, 600_000, 13)
means = [estimate_market_impact(s, profile, SimParams(n_paths=100)).mean_bps for s in sizes]
print(np.round(means, 2))
assert np.all(np.diff(means) >= 0)
