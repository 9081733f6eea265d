"""Deterministic simulator of budget-constrained data acquisition markets."""

from .datapool import DataPool, DataPoint, Dataset, PoolConfig, ProviderSpec, gen_pool, sample_acquirer_set, sample_provider_dataset
from .errors import DamError
from .evaluation import EvaluationReport, MarketScore, ScoreConfig, evaluate, execute_purchase, run_benchmark, score
from .market import (
    MarketConfig,
    MarketInstance,
    PricingFunction,
    ProviderListing,
    PublicView,
    SummaryStatistics,
    build_benchmark,
    build_market,
    compute_feature_label_correlations,
    compute_quantiles,
    make_listing,
    max_affordable,
    price,
    public_view,
)
from .model import LogisticModel, TrainConfig, accuracy, loss_and_grad, rfe, train
from .strategies import (
    PurchaseDecision,
    StrategyConfig,
    StrategyKind,
    parse_strategy,
    strategy_all,
    strategy_cofr,
    strategy_lp,
    strategy_percent,
    strategy_rfe,
    strategy_single,
)

__all__ = [
    "DataPool",
    "DataPoint",
    "Dataset",
    "PoolConfig",
    "ProviderSpec",
    "gen_pool",
    "sample_acquirer_set",
    "sample_provider_dataset",
    "DamError",
    "EvaluationReport",
    "MarketScore",
    "ScoreConfig",
    "evaluate",
    "execute_purchase",
    "run_benchmark",
    "score",
    "MarketConfig",
    "MarketInstance",
    "PricingFunction",
    "ProviderListing",
    "PublicView",
    "SummaryStatistics",
    "build_benchmark",
    "build_market",
    "compute_feature_label_correlations",
    "compute_quantiles",
    "make_listing",
    "max_affordable",
    "price",
    "public_view",
    "LogisticModel",
    "TrainConfig",
    "accuracy",
    "loss_and_grad",
    "rfe",
    "train",
    "PurchaseDecision",
    "StrategyConfig",
    "StrategyKind",
    "parse_strategy",
    "strategy_all",
    "strategy_cofr",
    "strategy_lp",
    "strategy_percent",
    "strategy_rfe",
    "strategy_single",
]

__version__ = "0.1.0"
