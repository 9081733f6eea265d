"""Executing decisions against the sealed datasets and scoring them."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _jsonio, _seeding
from .datapool import Dataset
from .errors import BudgetExceededError, DamError, ParameterError, QuantityError
from .market import MarketInstance, price, public_view
from .model import TrainConfig, accuracy, train
from .strategies import PurchaseDecision, StrategyConfig, parse_strategy

SCALE = 100.0


@dataclass(frozen=True)
class ScoreConfig:
    alpha: float = 0.98

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class MarketScore:
    accuracy: float
    cost: Fraction
    score: float
    purchased_counts: tuple

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "cost": _jsonio.money_out(self.cost),
            "score": self.score,
            "purchased_counts": list(self.purchased_counts),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["accuracy"]), _jsonio.money_in(d["cost"]), float(d["score"]), tuple(d["purchased_counts"]))


@dataclass(frozen=True)
class EvaluationReport:
    strategy: str
    per_market: tuple
    average_score: float

    @classmethod
    def of(cls, strategy, scores: Sequence[MarketScore]):
        scores = tuple(scores)
        return cls(str(strategy), scores, float(np.mean([s.score for s in scores])))

    def to_dict(self):
        return {
            "strategy": self.strategy,
            "per_market": [s.to_dict() for s in self.per_market],
            "average_score": self.average_score,
        }


def score(accuracy_: float, cost, budget, cfg: ScoreConfig = ScoreConfig()) -> float:
    """100 * (alpha * accuracy + (1 - alpha) * (budget - cost) / budget)."""
    if not 0.0 <= accuracy_ <= 1.0:
        raise ParameterError(f"accuracy must lie in [0, 1], got {accuracy_}")
    if budget <= 0:
        raise ParameterError("budget must be positive")
    if cost < 0:
        raise ParameterError("cost must be nonnegative")
    if cost > budget:
        raise BudgetExceededError(f"cost {float(cost)} exceeds budget {float(budget)}")
    if isinstance(cost, Fraction) or isinstance(budget, Fraction):
        saving = float((Fraction(budget) - Fraction(cost)) / Fraction(budget))
    else:
        saving = (budget - cost) / budget
    a = cfg.alpha
    return SCALE * (a * accuracy_ + (1.0 - a) * saving)


def execute_purchase(market: MarketInstance, decision: PurchaseDecision, seed: int = 0):
    """Draw the purchased samples; returns (dataset, exact cost).

    Provider ``i`` ships ``counts[i]`` rows drawn uniformly without
    replacement, keyed by (market seed, seed, i).
    """
    K = market.num_providers
    if len(decision.counts) != K:
        raise ParameterError(f"decision has {len(decision.counts)} entries for {K} providers")
    cost = Fraction(0)
    for l, c in zip(market.listings, decision.counts):
        if c < 0 or c > l.size:
            raise QuantityError(f"provider {l.provider_id}: count {c} outside [0, {l.size}]")
        cost += price(l.pricing, c)
    if cost > market.budget:
        raise BudgetExceededError(f"decision costs {float(cost)} > budget {float(market.budget)}")
    parts = []
    for i, (data, c) in enumerate(zip(market.private_datasets, decision.counts)):
        if c == 0:
            continue
        g = _seeding.rng(market.seed, seed, i, _seeding.PURCHASE)
        parts.append(data.take(g.permutation(len(data))[:c]))
    return Dataset.concat(parts, dim=market.acquirer_set.dim), cost


def evaluate(
    market: MarketInstance,
    decision: PurchaseDecision,
    train_cfg: TrainConfig = TrainConfig(),
    score_cfg: ScoreConfig = ScoreConfig(),
    seed: int = 0,
) -> MarketScore:
    bought, cost = execute_purchase(market, decision, seed)
    model = train(bought, train_cfg)
    acc = accuracy(model, market.acquirer_set)
    return MarketScore(acc, cost, score(acc, cost, market.budget, score_cfg), tuple(decision.counts))


class MarketFailure(DamError):
    def __init__(self, index, err):
        self.index = index
        self.exit_code = getattr(err, "exit_code", 3)
        super().__init__(f"market {index}: {err}")


def run_benchmark(
    markets: Sequence[MarketInstance],
    strategy,
    strategy_cfg: StrategyConfig = StrategyConfig(),
    score_cfg: ScoreConfig = ScoreConfig(),
    expected_markets: int = 5,
    return_decisions: bool = False,
):
    """Evaluate one strategy on every market; rows come back in market order."""
    if expected_markets is not None and len(markets) != expected_markets:
        raise ParameterError(f"expected {expected_markets} markets, got {len(markets)}")
    kind = parse_strategy(strategy) if isinstance(strategy, str) else strategy
    scores, decisions = [], []
    for i, m in enumerate(markets, start=1):
        try:
            d = kind.decide(public_view(m), strategy_cfg)
            scores.append(evaluate(m, d, strategy_cfg.train, score_cfg))
        except DamError as e:
            raise MarketFailure(i, e) from e
        decisions.append(d)
    report = EvaluationReport.of(kind, scores)
    return (report, decisions) if return_decisions else report


def report_csv(reports: Sequence[EvaluationReport], header_comment: str = None) -> str:
    """Strategy by market CSV table with an average column; scores to four decimals."""
    n = max(len(r.per_market) for r in reports)
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy"] + [f"market_{i}" for i in range(1, n + 1)] + ["average"])
    for r in reports:
        w.writerow([r.strategy] + [f"{s.score:.4f}" for s in r.per_market] + [f"{r.average_score:.4f}"])
    return buf.getvalue()


def report_markdown(reports: Sequence[EvaluationReport]) -> str:
    n = max(len(r.per_market) for r in reports)
    head = ["Allocation strategy"] + [f"Market {i}" for i in range(1, n + 1)] + ["Average"]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in reports:
        cells = [r.strategy] + [f"{s.score:.2f}" for s in r.per_market] + [f"{r.average_score:.2f}"]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
