"""Market construction and the public/private information boundary.

Money is exact: prices and budgets are :class:`fractions.Fraction` dollar
amounts.  Configured prices and budgets are rounded to whole millidollars,
so every budget split is integer arithmetic on millidollars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _jsonio, _seeding
from .datapool import (
    DataPool,
    Dataset,
    PoolConfig,
    ProviderSpec,
    gen_pool,
    sample_acquirer_set,
    sample_provider_dataset,
    uniform_weights,
)
from .errors import (
    AffordabilityError,
    ConfigError,
    EmptyInputError,
    FileFormatError,
    InsufficientDataError,
    ParameterError,
    QuantityError,
    SampleCountError,
)

NUM_DIVISIONS = 100


def money(x) -> Fraction:
    """Convert a dollar amount to an exact Fraction rounded to millidollars."""
    if isinstance(x, Fraction):
        milli = x * 1000
        if milli.denominator == 1:
            return x
        return Fraction(round(milli), 1000)
    return Fraction(round(Fraction(str(x)) * 1000), 1000)


def to_millidollars(x) -> int:
    return int(money(x) * 1000)


# ---------------------------------------------------------------------------
# summary statistics


def _lerp_sorted(s, num_divisions):
    """Quantiles of presorted columns (axis 0) at k/num_divisions."""
    n = s.shape[0]
    k = np.arange(num_divisions + 1)
    num = (n - 1) * k
    lo = num // num_divisions
    frac = (num % num_divisions) / num_divisions
    hi = np.minimum(lo + 1, n - 1)
    a, b = s[lo], s[hi]
    if s.ndim == 2:
        frac = frac[:, None]
    q = a + (b - a) * frac
    # rounding in (b - a) * frac may overshoot b by an ulp
    return np.minimum(np.maximum(q, a), b)


def compute_quantiles(values, num_divisions=NUM_DIVISIONS) -> np.ndarray:
    """Return ``num_divisions + 1`` quantiles at probabilities 0, 1/m, ..., 1.

    Linear interpolation between order statistics (the usual "type 7"
    definition): the value at probability k/m sits at position (n-1)k/m of
    the sorted sample.
    """
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise EmptyInputError("cannot take quantiles of an empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if int(num_divisions) < 1:
        raise ParameterError("num_divisions must be positive")
    return _lerp_sorted(np.sort(v), int(num_divisions))


def column_quantiles(M, num_divisions=NUM_DIVISIONS) -> np.ndarray:
    """Quantiles of every column of ``M``; one row per column."""
    M = np.asarray(M, dtype=np.float64)
    if M.shape[0] == 0:
        raise EmptyInputError("cannot take quantiles of an empty matrix")
    return _lerp_sorted(np.sort(M, axis=0), int(num_divisions)).T.copy()


def pearson_columns(X, y) -> np.ndarray:
    """Pearson correlation of each column of X with y; zero variance gives 0."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    sxx = np.einsum("ij,ij->j", xc, xc)
    syy = yc @ yc
    sxy = yc @ xc
    denom = np.sqrt(sxx * syy)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, sxy / np.where(denom > 0, denom, 1.0), 0.0)
    return np.clip(r, -1.0, 1.0)


def compute_feature_label_correlations(data: Dataset) -> np.ndarray:
    if len(data) < 2:
        raise InsufficientDataError(f"need at least 2 points for correlations, got {len(data)}")
    return pearson_columns(data.X, data.y)


@dataclass(frozen=True, eq=False)
class SummaryStatistics:
    quantiles: np.ndarray  # (dim + 1, 101); last row is the label
    label_correlations: np.ndarray

    @classmethod
    def of(cls, data: Dataset, num_divisions=NUM_DIVISIONS):
        cols = np.column_stack([data.X, data.y.astype(np.float64)])
        q = column_quantiles(cols, num_divisions)
        r = compute_feature_label_correlations(data)
        q.setflags(write=False)
        r.setflags(write=False)
        return cls(q, r)

    def to_dict(self):
        return {
            "quantiles": _jsonio.floats(self.quantiles),
            "label_correlations": _jsonio.floats(self.label_correlations),
        }

    @classmethod
    def from_dict(cls, d):
        q = np.array(d["quantiles"], dtype=np.float64)
        r = np.array(d["label_correlations"], dtype=np.float64)
        q.setflags(write=False)
        r.setflags(write=False)
        return cls(q, r)


# ---------------------------------------------------------------------------
# pricing


@dataclass(frozen=True)
class PricingFunction:
    total_price: Fraction
    dataset_size: int
    kind: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "total_price", money(self.total_price))
        if self.total_price < 0:
            raise ConfigError("total_price", "must be nonnegative")
        if int(self.dataset_size) < 1:
            raise ConfigError("dataset_size", "must be positive")
        if self.kind != "linear":
            raise ConfigError("kind", f"unsupported pricing kind {self.kind!r}")

    @property
    def unit_price(self) -> Fraction:
        return self.total_price / self.dataset_size

    def to_dict(self):
        return {
            "kind": self.kind,
            "total_price": _jsonio.money_out(self.total_price),
            "dataset_size": int(self.dataset_size),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(_jsonio.money_in(d["total_price"]), int(d["dataset_size"]), d["kind"])


def price(pricing: PricingFunction, q: int) -> Fraction:
    """Exact cost of buying ``q`` samples."""
    q = int(q)
    if q < 0:
        raise QuantityError(f"quantity must be nonnegative, got {q}")
    if q > pricing.dataset_size:
        raise QuantityError(f"quantity {q} exceeds dataset size {pricing.dataset_size}")
    return pricing.total_price * q / pricing.dataset_size


def max_affordable(pricing: PricingFunction, budget) -> int:
    """Largest q with price(q) <= budget, capped at the dataset size."""
    budget = Fraction(budget)
    if budget < 0:
        raise ParameterError("budget must be nonnegative")
    if pricing.total_price == 0:
        return pricing.dataset_size
    return min(pricing.dataset_size, math.floor(budget * pricing.dataset_size / pricing.total_price))


# ---------------------------------------------------------------------------
# listings and markets


@dataclass(frozen=True, eq=False)
class ProviderListing:
    provider_id: int
    shared_samples: Dataset
    stats: SummaryStatistics
    pricing: PricingFunction
    size: int

    def to_dict(self):
        return {
            "provider_id": int(self.provider_id),
            "size": int(self.size),
            "pricing": self.pricing.to_dict(),
            "shared_samples": self.shared_samples.to_dict(),
            "stats": self.stats.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["provider_id"]),
            Dataset.from_dict(d["shared_samples"]),
            SummaryStatistics.from_dict(d["stats"]),
            PricingFunction.from_dict(d["pricing"]),
            int(d["size"]),
        )


def make_listing(private: Dataset, total_price, n_shared: int, seed: int, provider_id: int = 0) -> ProviderListing:
    """Publish a provider: shared samples, statistics over the full data, and pricing."""
    n = len(private)
    if n_shared < 1:
        raise SampleCountError("n_shared must be positive")
    if n_shared > n:
        raise SampleCountError(f"cannot share {n_shared} samples from a dataset of {n}")
    g = _seeding.rng(seed, provider_id, _seeding.SHARED)
    idx = g.choice(n, size=n_shared, replace=False)
    return ProviderListing(
        provider_id=provider_id,
        shared_samples=private.take(idx),
        stats=SummaryStatistics.of(private),
        pricing=PricingFunction(total_price, n),
        size=n,
    )


@dataclass(frozen=True)
class MarketConfig:
    """How providers and the acquirer are drawn for one market instance.

    ``provider_specs`` and ``acquirer_spec`` override the seeded draws when
    given.  Otherwise each provider gets a Dirichlet(``provider_concentration``)
    category mixture, a size uniform in ``size_range`` and a flip rate uniform
    in ``flip_range``; ``noisy_providers`` of them instead get
    ``noisy_flip_rate``.
    """

    num_providers: int = 20
    budget: Fraction = Fraction(150)
    total_price: Fraction = Fraction(100)
    n_shared: int = 5
    size_range: tuple = (800, 2000)
    acquirer_size: int = 400
    provider_concentration: float = 0.3
    flip_range: tuple = (0.0, 0.1)
    noisy_providers: int = 0
    noisy_flip_rate: float = 0.45
    provider_specs: Optional[tuple] = None
    acquirer_spec: Optional[ProviderSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "budget", money(self.budget))
        object.__setattr__(self, "total_price", money(self.total_price))
        object.__setattr__(self, "size_range", tuple(int(v) for v in self.size_range))
        object.__setattr__(self, "flip_range", tuple(float(v) for v in self.flip_range))
        if self.provider_specs is not None:
            object.__setattr__(self, "provider_specs", tuple(self.provider_specs))
            if len(self.provider_specs) != self.num_providers:
                raise ConfigError("provider_specs", "length must equal num_providers")
        if self.num_providers < 1:
            raise ConfigError("num_providers", "must be positive")
        if self.budget < 0:
            raise ConfigError("budget", "must be nonnegative")
        if self.n_shared < 1:
            raise ConfigError("n_shared", "must be positive")
        lo, hi = self.size_range
        if not 1 <= lo <= hi:
            raise ConfigError("size_range", "need 1 <= low <= high")
        if lo < self.n_shared:
            raise ConfigError("size_range", "smallest dataset must hold n_shared samples")
        if self.acquirer_size < 2:
            raise ConfigError("acquirer_size", "must be at least 2")
        if self.provider_concentration <= 0:
            raise ConfigError("provider_concentration", "must be positive")
        a, b = self.flip_range
        if not 0 <= a <= b <= 0.5:
            raise ConfigError("flip_range", "need 0 <= low <= high <= 0.5")
        if not 0 <= self.noisy_providers <= self.num_providers:
            raise ConfigError("noisy_providers", "must lie in [0, num_providers]")
        if not 0 <= self.noisy_flip_rate <= 0.5:
            raise ConfigError("noisy_flip_rate", "must lie in [0, 0.5]")

    def to_dict(self):
        return {
            "num_providers": self.num_providers,
            "budget": _jsonio.money_out(self.budget),
            "total_price": _jsonio.money_out(self.total_price),
            "n_shared": self.n_shared,
            "size_range": list(self.size_range),
            "acquirer_size": self.acquirer_size,
            "provider_concentration": float(self.provider_concentration),
            "flip_range": list(self.flip_range),
            "noisy_providers": self.noisy_providers,
            "noisy_flip_rate": float(self.noisy_flip_rate),
            "provider_specs": None if self.provider_specs is None else [s.to_dict() for s in self.provider_specs],
            "acquirer_spec": None if self.acquirer_spec is None else self.acquirer_spec.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["budget"] = _jsonio.money_in(d["budget"])
        d["total_price"] = _jsonio.money_in(d["total_price"])
        if d.get("provider_specs") is not None:
            d["provider_specs"] = tuple(ProviderSpec.from_dict(s) for s in d["provider_specs"])
        if d.get("acquirer_spec") is not None:
            d["acquirer_spec"] = ProviderSpec.from_dict(d["acquirer_spec"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class PublicView:
    """Everything an acquisition strategy may see.  Holds no private data."""

    listings: tuple
    budget: Fraction
    acquirer_set: Dataset

    @property
    def num_providers(self):
        return len(self.listings)

    @property
    def sizes(self):
        return [l.size for l in self.listings]

    def to_dict(self):
        return {
            "budget": _jsonio.money_out(self.budget),
            "listings": [l.to_dict() for l in self.listings],
            "acquirer_set": self.acquirer_set.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(ProviderListing.from_dict(l) for l in d["listings"]),
            _jsonio.money_in(d["budget"]),
            Dataset.from_dict(d["acquirer_set"]),
        )


@dataclass(frozen=True, eq=False)
class MarketInstance:
    listings: tuple
    private_datasets: tuple = field(repr=False)
    acquirer_set: Dataset
    budget: Fraction
    seed: int
    pool_config: Optional[PoolConfig] = None
    market_config: Optional[MarketConfig] = None

    def __post_init__(self):
        if len(self.listings) != len(self.private_datasets):
            raise ConfigError("listings", "listings and private datasets differ in count")
        for l, d in zip(self.listings, self.private_datasets):
            if l.size != len(d):
                raise ConfigError("listings", f"provider {l.provider_id} size does not match its dataset")
            if price(l.pricing, l.size) > self.budget:
                raise AffordabilityError(
                    f"provider {l.provider_id}: full dataset costs {float(price(l.pricing, l.size))}"
                    f" > budget {float(self.budget)}"
                )

    @property
    def num_providers(self):
        return len(self.listings)

    def to_dict(self, public_only=False):
        d = {
            "format_version": _jsonio.FORMAT_VERSION,
            "seed": int(self.seed),
            "public": public_view(self).to_dict(),
        }
        if not public_only:
            d["private"] = {"datasets": [ds.to_dict() for ds in self.private_datasets]}
        return d


def public_view(market: MarketInstance) -> PublicView:
    return PublicView(tuple(market.listings), market.budget, market.acquirer_set)


def draw_provider_specs(pool: DataPool, cfg: MarketConfig, seed: int):
    """Seeded provider and acquirer specs for one market instance."""
    g = _seeding.rng(pool.config.seed, seed, _seeding.MARKET)
    C = pool.num_categories
    K = cfg.num_providers
    if cfg.provider_specs is not None:
        providers = list(cfg.provider_specs)
    else:
        noisy = set(g.choice(K, size=cfg.noisy_providers, replace=False).tolist()) if cfg.noisy_providers else set()
        providers = []
        for i in range(K):
            w = g.dirichlet(np.full(C, cfg.provider_concentration))
            w = w / w.sum()
            size = int(g.integers(cfg.size_range[0], cfg.size_range[1], endpoint=True))
            flip = cfg.noisy_flip_rate if i in noisy else float(g.uniform(*cfg.flip_range))
            providers.append(ProviderSpec(tuple(w), size, flip, _seeding.derive_seed(seed, i, 0)))
    acquirer = cfg.acquirer_spec
    if acquirer is None:
        acquirer = ProviderSpec(uniform_weights(C), cfg.acquirer_size, 0.0, _seeding.derive_seed(seed, 2**32, 1))
    return providers, acquirer


def build_market(pool_cfg: PoolConfig, market_cfg: MarketConfig, seed: int, pool: DataPool = None) -> MarketInstance:
    """Sample every provider dataset and the acquirer set, then publish listings."""
    if pool is None:
        pool = gen_pool(pool_cfg)
    providers, acquirer = draw_provider_specs(pool, market_cfg, seed)
    if market_cfg.total_price > market_cfg.budget:
        raise AffordabilityError(
            f"total price {float(market_cfg.total_price)} exceeds budget {float(market_cfg.budget)}"
        )
    private = []
    listings = []
    for i, spec in enumerate(providers):
        data = sample_provider_dataset(pool, spec)
        private.append(data)
        listings.append(make_listing(data, market_cfg.total_price, market_cfg.n_shared, seed, provider_id=i))
    acq = sample_acquirer_set(pool, acquirer)
    return MarketInstance(
        tuple(listings), tuple(private), acq, market_cfg.budget, int(seed), pool.config, market_cfg
    )


def benchmark_seeds(base_seed: int, count: int = 5):
    return [_seeding.derive_seed(base_seed, i) for i in range(1, count + 1)]


def build_benchmark(pool_cfg: PoolConfig, market_cfg: MarketConfig, base_seed: int = 0, count: int = 5):
    """Build ``count`` market instances over one shared data pool."""
    pool = gen_pool(pool_cfg)
    return [build_market(pool_cfg, market_cfg, s, pool=pool) for s in benchmark_seeds(base_seed, count)]


# ---------------------------------------------------------------------------
# market files


def market_from_dict(d, path="<dict>"):
    """Rebuild a market from its file form.  Public-only files have no private section."""
    try:
        view = PublicView.from_dict(d["public"])
        seed = int(d["seed"])
        if "private" not in d:
            return view, seed, None
        datasets = tuple(Dataset.from_dict(x) for x in d["private"]["datasets"])
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(path, f"malformed market file ({e})") from e
    market = MarketInstance(view.listings, datasets, view.acquirer_set, view.budget, seed)
    return view, seed, market


def load_public_view(path) -> PublicView:
    d = _jsonio.read(path)
    try:
        return PublicView.from_dict(d["public"])
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(path, f"malformed public section ({e})") from e


def load_market(path) -> MarketInstance:
    _, _, market = market_from_dict(_jsonio.read(path), path)
    if market is None:
        raise FileFormatError(path, "file is public-only; private datasets are required for evaluation")
    return market
