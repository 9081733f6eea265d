"""
Five-market benchmark
=====================

Score every built-in strategy on a five-market benchmark and print the
table as markdown.
"""

from damsim import MarketConfig, PoolConfig, build_benchmark, run_benchmark
from damsim.evaluation import report_markdown

markets = build_benchmark(PoolConfig(dim=32, seed=0), MarketConfig(noisy_providers=3), base_seed=0)

strategies = ["all", "percent:20", "percent:40", "single:0", "rfe", "cofr", "lp:1", "lp:2", "lp:inf"]
reports = [run_benchmark(markets, s) for s in strategies]

print(report_markdown(reports))

best = max(reports, key=lambda r: r.average_score)
print(f"best average: {best.strategy} at {best.average_score:.2f}")
