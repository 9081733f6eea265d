import sys
import numpy as np
import pytest

from damsim import Dataset, MarketConfig, MarketInstance, PoolConfig, build_market, make_listing
from damsim.market import money


@pytest.fixture(scope="session")
def small_pool_cfg():
    return PoolConfig(dim=8, num_categories=5, seed=3)


@pytest.fixture(scope="session")
def small_market_cfg():
    return MarketConfig(num_providers=6, size_range=(50, 120), acquirer_size=80)


@pytest.fixture(scope="session")
def small_market(small_pool_cfg, small_market_cfg):
    return build_market(small_pool_cfg, small_market_cfg, seed=11)


def market_from_datasets(datasets, acquirer, total_price=100, budget=150, seed=0, n_shared=None):
    """Hand-built market over given provider datasets."""
    listings = []
    for i, d in enumerate(datasets):
        k = n_shared if n_shared is not None else min(5, len(d))
        listings.append(make_listing(d, total_price, k, seed, provider_id=i))
    return MarketInstance(tuple(listings), tuple(datasets), acquirer, money(budget), seed)


def random_dataset(n, dim, seed, w=None):
    g = np.random.default_rng(seed)
    X = g.standard_normal((n, dim))
    if w is None:
        y = g.integers(0, 2, n)
    else:
        y = (X @ w > 0).astype(int)
    return Dataset(X, y, np.zeros(n, dtype=int))


def copy_provider_market(seed, copy_index=7, dim=64, offset_scale=3.0):
    """Default-style market with one provider drawn from the acquirer's own distribution.

    The pool uses strong per-category offsets so that the category mixture
    actually shapes each provider's feature-label relationship.
    """
    from damsim import ProviderSpec, build_market, gen_pool
    from damsim.market import draw_provider_specs

    pc = PoolConfig(dim=dim, seed=seed, offset_scale=offset_scale)
    pool = gen_pool(pc)
    providers, acquirer = draw_provider_specs(pool, MarketConfig(), seed)
    providers[copy_index] = ProviderSpec(acquirer.category_weights, 2000, 0.0, seed + 12345)
    cfg = MarketConfig(provider_specs=tuple(providers), acquirer_spec=acquirer)
    return build_market(pc, cfg, seed, pool=pool)


def fuzz_market(seed, dim=32):
    """Seeded random market; sizes, prices, budget and K all vary."""
    g = np.random.default_rng(seed)
    k = int(g.integers(2, 12))
    total = int(g.integers(1, 200))
    budget = total + int(g.integers(0, 300))
    cfg = MarketConfig(
        num_providers=k,
        budget=budget,
        total_price=total,
        size_range=(int(g.integers(10, 40)), int(g.integers(40, 200))),
        acquirer_size=int(g.integers(20, 100)),
        noisy_providers=int(g.integers(0, k)),
    )
    return build_market(PoolConfig(dim=dim, num_categories=int(g.integers(1, 8)), seed=seed), cfg, seed)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
