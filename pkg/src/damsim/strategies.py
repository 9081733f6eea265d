"""Acquisition strategies.

Every strategy is a pure function of a :class:`~damsim.market.PublicView`
(plus the acquirer's own data, which the view also carries) and returns a
:class:`PurchaseDecision`.  None of them can reach private datasets.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import median
from typing import Optional, Sequence

import numpy as np

from . import _jsonio
from .datapool import Dataset
from .errors import AllocationError, BudgetExceededError, FileFormatError, ParameterError
from .market import PublicView, compute_feature_label_correlations, max_affordable, price, to_millidollars
from .model import TrainConfig, rfe, train

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PurchaseDecision:
    counts: tuple
    fractions: tuple
    cost: Fraction
    info: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def from_counts(cls, counts: Sequence[int], view: PublicView, **info):
        if len(counts) != view.num_providers:
            raise ParameterError(f"expected {view.num_providers} counts, got {len(counts)}")
        cost = Fraction(0)
        fractions = []
        for c, l in zip(counts, view.listings):
            cost += price(l.pricing, c)
            fractions.append(c / l.size)
        return cls(tuple(int(c) for c in counts), tuple(fractions), cost, info)

    @classmethod
    def from_fractions(cls, fractions: Sequence[float], view: PublicView, **info):
        return cls.from_counts(counts_from_fractions(fractions, view.sizes), view, **info)

    def check(self, view: PublicView):
        """Raise if the decision overspends or oversells."""
        for c, l in zip(self.counts, view.listings):
            if not 0 <= c <= l.size:
                raise ParameterError(f"provider {l.provider_id}: count {c} outside [0, {l.size}]")
        if self.cost > view.budget:
            raise BudgetExceededError(f"decision costs {float(self.cost)} > budget {float(view.budget)}")

    def to_dict(self):
        return {
            "fractions": list(self.fractions),
            "counts": list(self.counts),
            "cost": _jsonio.money_out(self.cost),
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, d, path="<dict>"):
        try:
            return cls(
                tuple(int(c) for c in d["counts"]),
                tuple(float(f) for f in d["fractions"]),
                _jsonio.money_in(d["cost"]),
                d.get("info", {}),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FileFormatError(path, f"malformed decision ({e})") from e


def counts_from_fractions(fractions, sizes):
    """floor(q_i * |D_i|), tolerant of the rounding in q_i = c / |D_i|."""
    out = []
    for f, s in zip(fractions, sizes):
        if not 0.0 <= f <= 1.0:
            raise ParameterError(f"fraction {f} outside [0, 1]")
        out.append(min(s, math.floor(f * s + 1e-9)))
    return out


@dataclass(frozen=True)
class SimilarityProfile:
    acquirer_vector: np.ndarray
    provider_scores: np.ndarray
    features: Optional[tuple] = None


@dataclass(frozen=True)
class StrategyConfig:
    train: TrainConfig = TrainConfig()
    rfe_k: int = 5
    skip_factor: Optional[float] = 1.5
    percent_split_by_k: bool = False

    def to_dict(self):
        return {
            "train": self.train.to_dict(),
            "rfe_k": self.rfe_k,
            "skip_factor": self.skip_factor,
            "percent_split_by_k": self.percent_split_by_k,
        }


def _acquirer(view, acquirer_data):
    return view.acquirer_set if acquirer_data is None else acquirer_data


# ---------------------------------------------------------------------------
# budget-splitting strategies


def strategy_single(i: int, view: PublicView) -> PurchaseDecision:
    """Buy as much of provider ``i`` as the budget allows."""
    K = view.num_providers
    if not 0 <= i < K:
        raise ParameterError(f"provider index {i} outside [0, {K})")
    counts = [0] * K
    counts[i] = max_affordable(view.listings[i].pricing, view.budget)
    return PurchaseDecision.from_counts(counts, view, strategy=f"single:{i}")


def strategy_all(view: PublicView, subset: Optional[Sequence[int]] = None, divisor: Optional[int] = None) -> PurchaseDecision:
    """Split the budget equally across ``subset`` (default: every provider).

    The per-provider allowance is ``floor(budget / n)`` in millidollars;
    the remainder stays unspent.  ``divisor`` overrides ``n``.
    """
    K = view.num_providers
    subset = list(range(K)) if subset is None else sorted(set(int(j) for j in subset))
    if not subset:
        raise ParameterError("strategy_all needs at least one provider")
    if any(not 0 <= j < K for j in subset):
        raise ParameterError(f"provider subset {subset} outside [0, {K})")
    n = len(subset) if divisor is None else int(divisor)
    allowance = Fraction(to_millidollars(view.budget) // n, 1000)
    counts = [0] * K
    for j in subset:
        counts[j] = max_affordable(view.listings[j].pricing, allowance)
    return PurchaseDecision.from_counts(counts, view, allowance=float(allowance), providers=subset)


def correlation_distances(view: PublicView, acquirer_data: Dataset = None) -> SimilarityProfile:
    """Squared Euclidean distance between acquirer and provider label correlations."""
    r_acq = compute_feature_label_correlations(_acquirer(view, acquirer_data))
    scores = np.array([np.sum((r_acq - l.stats.label_correlations) ** 2) for l in view.listings])
    return SimilarityProfile(r_acq, scores)


def percent_exclusions(distances, p: int) -> list:
    """Indices of the ceil(p K / 100) providers with the largest distance.

    Among equal distances the higher provider index is excluded first.
    """
    K = len(distances)
    n_out = math.ceil(p * K / 100)
    order = sorted(range(K), key=lambda j: (-distances[j], -j))
    return sorted(order[:n_out])


def strategy_percent(p: int, view: PublicView, acquirer_data: Dataset = None, split_by_k: bool = False) -> PurchaseDecision:
    """Drop the p% least-similar providers, then split the budget over the rest."""
    if not isinstance(p, (int, np.integer)) or not 0 <= p <= 100:
        raise ParameterError(f"percent must be an integer in [0, 100], got {p!r}")
    K = view.num_providers
    if p == 0:
        excluded = []
        q = None
    else:
        q = correlation_distances(view, acquirer_data).provider_scores
        excluded = percent_exclusions(q, p)
    keep = [j for j in range(K) if j not in set(excluded)]
    if not keep:
        raise ParameterError(f"excluding {p}% of {K} providers leaves none")
    log.info("percent:%d excludes providers %s", p, excluded)
    d = strategy_all(view, keep, divisor=K if split_by_k else None)
    d.info.update(strategy=f"percent:{p}", excluded=excluded)
    return d


# ---------------------------------------------------------------------------
# coefficient/relevance consistency


def minmax(v) -> np.ndarray:
    """Map v to [0, 1] by (v - min) / (max - min); constant vectors map to zeros."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return v.copy()
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def _normalized_pairs(view, acquirer_data, feature_set, cfg):
    data = _acquirer(view, acquirer_data)
    feats = list(range(data.dim)) if feature_set is None else [int(k) for k in feature_set]
    model = train(data, cfg, feature_subset=feats)
    coef = minmax(model.weights)
    rel = [minmax(l.stats.label_correlations[feats]) for l in view.listings]
    return model.weights, coef, rel, tuple(feats)


def consistency_scores(view: PublicView, acquirer_data: Dataset = None, feature_set=None, cfg: TrainConfig = TrainConfig()) -> SimilarityProfile:
    """Dot product of normalized acquirer coefficients and each provider's normalized relevance."""
    raw, coef, rel, feats = _normalized_pairs(view, acquirer_data, feature_set, cfg)
    return SimilarityProfile(raw, np.array([coef @ r for r in rel]), feats)


def lp_distance(a, b, norm):
    diff = np.abs(np.asarray(a) - np.asarray(b))
    if norm in (np.inf, "inf"):
        return float(diff.max(initial=0.0))
    if norm == 1:
        return float(diff.sum())
    if norm == 2:
        return float(np.sqrt(diff @ diff))
    raise ParameterError(f"unsupported norm {norm!r}; use 1, 2 or inf")


def lp_scores(view: PublicView, acquirer_data: Dataset = None, norm=2, cfg: TrainConfig = TrainConfig()) -> SimilarityProfile:
    """Lp distance between normalized coefficients and normalized relevance (lower is better)."""
    raw, coef, rel, feats = _normalized_pairs(view, acquirer_data, None, cfg)
    return SimilarityProfile(raw, np.array([lp_distance(coef, r, norm) for r in rel]), feats)


def rank_providers(scores, descending=True) -> list:
    """Best-first provider order; ties go to the lower index."""
    s = np.asarray(scores, dtype=np.float64)
    key = (lambda j: (-s[j], j)) if descending else (lambda j: (s[j], j))
    return sorted(range(len(s)), key=key)


def expensive_providers(view: PublicView, skip_factor: Optional[float] = 1.5) -> list:
    """Providers whose per-sample price exceeds ``skip_factor`` times the market median."""
    if skip_factor is None:
        return []
    unit = [l.pricing.unit_price for l in view.listings]
    threshold = Fraction(str(skip_factor)) * Fraction(median(unit))
    return [j for j, u in enumerate(unit) if u > threshold]


def top2_allocate(ranking: Sequence[int], view: PublicView, skip_factor: Optional[float] = 1.5) -> PurchaseDecision:
    """Fill the best provider, then spend what is left on the runner-up."""
    skipped = set(expensive_providers(view, skip_factor))
    ranked = [j for j in ranking if j not in skipped]
    if not ranked:
        raise AllocationError("no provider survives the unit-cost filter")
    K = view.num_providers
    counts = [0] * K
    first = ranked[0]
    counts[first] = max_affordable(view.listings[first].pricing, view.budget)
    if counts[first] == 0:
        log.warning("budget cannot buy a single sample from provider %d", first)
    remaining = view.budget - price(view.listings[first].pricing, counts[first])
    if len(ranked) > 1:
        second = ranked[1]
        counts[second] = max_affordable(view.listings[second].pricing, remaining)
    return PurchaseDecision.from_counts(counts, view, ranking=list(ranked), skipped=sorted(skipped))


def strategy_rfe(view: PublicView, acquirer_data: Dataset = None, cfg: StrategyConfig = StrategyConfig()) -> PurchaseDecision:
    data = _acquirer(view, acquirer_data)
    feats = rfe(data, min(cfg.rfe_k, data.dim), cfg.train)
    prof = consistency_scores(view, data, feats, cfg.train)
    d = top2_allocate(rank_providers(prof.provider_scores, descending=True), view, cfg.skip_factor)
    d.info.update(strategy="rfe", features=list(feats), scores=prof.provider_scores.tolist())
    return d


def strategy_cofr(view: PublicView, acquirer_data: Dataset = None, cfg: StrategyConfig = StrategyConfig()) -> PurchaseDecision:
    prof = consistency_scores(view, acquirer_data, None, cfg.train)
    d = top2_allocate(rank_providers(prof.provider_scores, descending=True), view, cfg.skip_factor)
    d.info.update(strategy="cofr", scores=prof.provider_scores.tolist())
    return d


def strategy_lp(view: PublicView, acquirer_data: Dataset = None, norm=2, cfg: StrategyConfig = StrategyConfig()) -> PurchaseDecision:
    prof = lp_scores(view, acquirer_data, norm, cfg.train)
    d = top2_allocate(rank_providers(prof.provider_scores, descending=False), view, cfg.skip_factor)
    d.info.update(strategy=f"lp:{_norm_name(norm)}", scores=prof.provider_scores.tolist())
    return d


def _norm_name(norm):
    return "inf" if norm in (np.inf, "inf") else str(int(norm))


# ---------------------------------------------------------------------------
# strategy strings


@dataclass(frozen=True)
class StrategyKind:
    """A parsed strategy string such as ``single:3``, ``percent:20`` or ``lp:inf``."""

    name: str
    param: object = None

    def __str__(self):
        if self.name in ("all", "rfe", "cofr"):
            return self.name
        if self.name == "lp":
            return f"lp:{_norm_name(self.param)}"
        return f"{self.name}:{self.param}"

    def decide(self, view: PublicView, cfg: StrategyConfig = StrategyConfig(), acquirer_data=None) -> PurchaseDecision:
        if self.name == "single":
            if self.param >= view.num_providers:
                raise ParameterError(f"provider index {self.param} outside [0, {view.num_providers})")
            d = strategy_single(self.param, view)
        elif self.name == "all":
            d = strategy_all(view)
            d.info["strategy"] = "all"
        elif self.name == "percent":
            d = strategy_percent(self.param, view, acquirer_data, cfg.percent_split_by_k)
        elif self.name == "rfe":
            d = strategy_rfe(view, acquirer_data, cfg)
        elif self.name == "cofr":
            d = strategy_cofr(view, acquirer_data, cfg)
        else:
            d = strategy_lp(view, acquirer_data, self.param, cfg)
        d.check(view)
        return d


STRATEGY_FORMS = ("single:<i>", "all", "percent:<p>", "rfe", "cofr", "lp:1", "lp:2", "lp:inf")


def parse_strategy(text: str) -> StrategyKind:
    name, _, arg = text.strip().lower().partition(":")
    try:
        if name in ("all", "rfe", "cofr") and not arg:
            return StrategyKind(name)
        if name == "single":
            i = int(arg)
            if i < 0:
                raise ValueError
            return StrategyKind("single", i)
        if name == "percent":
            p = int(arg)
            if not 0 <= p <= 100:
                raise ValueError
            return StrategyKind("percent", p)
        if name == "lp":
            if arg == "inf":
                return StrategyKind("lp", "inf")
            if arg in ("1", "2"):
                return StrategyKind("lp", int(arg))
    except ValueError:
        pass
    raise ParameterError(f"unknown strategy {text!r}; valid forms: {', '.join(STRATEGY_FORMS)}")
