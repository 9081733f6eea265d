from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from damsim import (
    Dataset,
    EvaluationReport,
    MarketConfig,
    MarketScore,
    PoolConfig,
    PurchaseDecision,
    ScoreConfig,
    build_benchmark,
    evaluate,
    execute_purchase,
    public_view,
    run_benchmark,
    score,
    strategy_single,
)
from damsim.errors import BudgetExceededError, ParameterError, QuantityError
from damsim.evaluation import MarketFailure, report_csv, report_markdown

from conftest import copy_provider_market, market_from_datasets, random_dataset


def test_score_extremes():
    assert score(1.0, 0, 150) == 100.0
    assert score(0.75, 150, 150, ScoreConfig(0.98)) == pytest.approx(73.5, abs=1e-9)
    assert score(0.75, 100, 150, ScoreConfig(0.98)) == pytest.approx(74.1667, abs=1e-4)


def test_score_exact_identities():
    for acc in (0.0, 0.3, 0.75, 1.0):
        for b in (1, 150, Fraction(7, 3)):
            assert score(acc, b, b) == 100 * (0.98 * acc)
            assert score(acc, 0, b) == 100 * (0.98 * acc + (1 - 0.98))


def test_score_rejects_overspend():
    with pytest.raises(BudgetExceededError):
        score(0.5, 151, 150)
    with pytest.raises(ParameterError):
        score(1.5, 0, 150)
    with pytest.raises(ParameterError):
        ScoreConfig(alpha=1.2)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 150), st.integers(0, 150), st.floats(0, 1))
def test_score_monotone(a1, a2, c1, c2, alpha):
    cfg = ScoreConfig(alpha)
    lo_a, hi_a = sorted((a1, a2))
    lo_c, hi_c = sorted((c1, c2))
    assert score(lo_a, lo_c, 150, cfg) <= score(hi_a, lo_c, 150, cfg) + 1e-12
    assert score(lo_a, hi_c, 150, cfg) <= score(lo_a, lo_c, 150, cfg) + 1e-12
    assert 0 <= score(lo_a, lo_c, 150, cfg) <= 100 + 1e-12


# -- execute -----------------------------------------------------------------


def test_zero_decision_buys_nothing(small_market):
    v = public_view(small_market)
    d = PurchaseDecision.from_counts([0] * v.num_providers, v)
    data, cost = execute_purchase(small_market, d)
    assert len(data) == 0 and cost == 0


def test_full_purchase_is_permutation(small_market):
    v = public_view(small_market)
    d = strategy_single(2, v)
    data, cost = execute_purchase(small_market, d)
    src = small_market.private_datasets[2]
    assert cost == 100
    assert sorted(map(bytes, data.X)) == sorted(map(bytes, src.X))


def test_purchase_deterministic_and_subset(small_market):
    v = public_view(small_market)
    counts = [min(7, n) for n in v.sizes]
    d = PurchaseDecision.from_counts(counts, v)
    a, _ = execute_purchase(small_market, d, seed=4)
    b, _ = execute_purchase(small_market, d, seed=4)
    assert a.identical(b)
    pool_rows = {r.tobytes() for ds in small_market.private_datasets for r in ds.X}
    assert all(r.tobytes() in pool_rows for r in a.X)
    # per-provider multiset membership
    start = 0
    for i, c in enumerate(counts):
        rows = {r.tobytes() for r in small_market.private_datasets[i].X}
        part = a.X[start : start + c]
        assert len({r.tobytes() for r in part}) == c
        assert all(r.tobytes() in rows for r in part)
        start += c


def test_execute_rejects_overspend(small_market):
    v = public_view(small_market)
    counts = list(v.sizes)
    bad = PurchaseDecision(tuple(counts), tuple([1.0] * len(counts)), Fraction(0))
    with pytest.raises(BudgetExceededError):
        execute_purchase(small_market, bad)


def test_execute_rejects_oversell(small_market):
    v = public_view(small_market)
    counts = [0] * v.num_providers
    counts[0] = v.sizes[0] + 1
    with pytest.raises(QuantityError):
        execute_purchase(small_market, PurchaseDecision(tuple(counts), (0.0,) * len(counts), Fraction(0)))


def test_cost_151_on_150_budget():
    ds = [random_dataset(1000, 2, seed=i) for i in range(2)]
    m = market_from_datasets(ds, random_dataset(40, 2, seed=5), total_price=100, budget=150)
    d = PurchaseDecision((1000, 510), (1.0, 0.51), Fraction(151))
    with pytest.raises(BudgetExceededError):
        evaluate(m, d)


# -- evaluate ----------------------------------------------------------------


def test_zero_decision_on_balanced_eval_set():
    acq = Dataset(np.random.default_rng(0).standard_normal((200, 3)), [0, 1] * 100, np.zeros(200))
    m = market_from_datasets([random_dataset(100, 3, seed=1)], acq)
    v = public_view(m)
    s = evaluate(m, PurchaseDecision.from_counts([0], v))
    assert s.accuracy == 0.5
    assert s.score == pytest.approx(100 * (0.98 * 0.5 + 0.02), abs=1e-12)
    assert s.score == pytest.approx(51.0, abs=1e-9)


def test_copy_provider_purchase_beats_nothing():
    m = copy_provider_market(1, dim=16)
    v = public_view(m)
    zero = evaluate(m, PurchaseDecision.from_counts([0] * 20, v))
    full = evaluate(m, strategy_single(7, v))
    assert full.accuracy > zero.accuracy


@pytest.fixture(scope="module")
def tiny_bench():
    return build_benchmark(PoolConfig(dim=6, num_categories=4, seed=1), MarketConfig(num_providers=5, size_range=(40, 90), acquirer_size=60), 3)


def test_run_benchmark_rows_and_bounds(tiny_bench):
    r = run_benchmark(tiny_bench, "all")
    assert len(r.per_market) == 5
    assert all(0 <= s.score <= 100 for s in r.per_market)
    assert r.average_score == pytest.approx(np.mean([s.score for s in r.per_market]), abs=1e-12)


def test_run_benchmark_deterministic(tiny_bench):
    a = run_benchmark(tiny_bench, "cofr")
    b = run_benchmark(tiny_bench, "cofr")
    assert report_csv([a]) == report_csv([b])


def test_run_benchmark_wrong_market_count(tiny_bench):
    with pytest.raises(ParameterError):
        run_benchmark(tiny_bench[:3], "all")


def test_run_benchmark_annotates_failing_market(tiny_bench):
    with pytest.raises(MarketFailure) as exc:
        run_benchmark(tiny_bench, "single:9")
    assert exc.value.index == 1


def test_report_average_of_constant_scores():
    ms = MarketScore(0.7, Fraction(150), 68.6, (1, 2))
    r = EvaluationReport.of("all", [ms] * 5)
    assert r.average_score == 68.6


def test_report_layout(tiny_bench):
    reps = [run_benchmark(tiny_bench, s) for s in ("all", "percent:20")]
    lines = report_csv(reps, header_comment="x").splitlines()
    assert lines[0] == "# x"
    assert lines[1] == "strategy,market_1,market_2,market_3,market_4,market_5,average"
    assert [l.split(",")[0] for l in lines[2:]] == ["all", "percent:20"]
    md = report_markdown(reps)
    assert md.splitlines()[0].startswith("| Allocation strategy | Market 1")
