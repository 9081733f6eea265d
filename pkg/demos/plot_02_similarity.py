"""
Ranking providers by similarity
===============================

Three ways to judge a provider from its public statistics: squared distance
between correlation vectors, the consistency dot product and the Lp
distances. Noisy providers should stand out under the correlation distance.
"""

import numpy as np

from damsim import MarketConfig, PoolConfig, build_market, gen_pool, public_view
from damsim.strategies import (
    consistency_scores,
    correlation_distances,
    lp_scores,
    percent_exclusions,
    rank_providers,
)

pool_cfg = PoolConfig(dim=32, seed=0)
market = build_market(pool_cfg, MarketConfig(noisy_providers=3), seed=1)
view = public_view(market)

# ground truth, for comparison only: which providers really have bad labels
pool = gen_pool(pool_cfg)
noise = np.array([np.mean(d.y != pool.true_labels(d.X, d.category)) for d in market.private_datasets])
print("noisiest providers:", rank_providers(noise)[:3])

q = correlation_distances(view).provider_scores
print("largest correlation distance:", rank_providers(q)[:4])
print("excluded at 20%:", percent_exclusions(q, 20))

# consistency is higher-is-better, the Lp distances lower-is-better
cofr = consistency_scores(view).provider_scores
print("best by consistency:", rank_providers(cofr)[:3])
for norm in (1, 2, "inf"):
    s = lp_scores(view, norm=norm).provider_scores
    print(f"best by L{norm}:", rank_providers(s, descending=False)[:3])
