"""
Building a synthetic market
===========================

Draw a data pool, sample twenty providers and an acquirer from it, and look
at what a buyer can see before spending anything.
"""

import numpy as np

from damsim import MarketConfig, PoolConfig, build_market, gen_pool, public_view

# a small pool keeps the demo quick; the library default is dim=768
pool_cfg = PoolConfig(dim=32, seed=0)
market = build_market(pool_cfg, MarketConfig(noisy_providers=3), seed=1)
view = public_view(market)

print(f"{view.num_providers} providers, budget ${float(view.budget):.2f}")
print(f"acquirer holds {len(view.acquirer_set)} clean evaluation points")

# every listing exposes a handful of rows, per-feature quantiles and
# feature-label correlations, plus a linear price
for listing in view.listings[:5]:
    rel = listing.stats.label_correlations
    print(
        f"provider {listing.provider_id:2d}: size {listing.size:4d}, "
        f"${float(listing.pricing.unit_price) * 1000:.1f} per 1000 rows, "
        f"|corr| max {np.abs(rel).max():.3f}"
    )

# the private datasets stay with the market; label noise shows up only when
# their labels are checked against the pool's ground-truth rule
pool = gen_pool(pool_cfg)
noise = [np.mean(d.y != pool.true_labels(d.X, d.category)) for d in market.private_datasets]
print("label noise per provider:", np.round(noise, 2))
