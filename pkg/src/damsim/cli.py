"""Command-line front end: ``damsim gen | run | report``.

Exit codes: 0 success, 1 unexpected failure, 2 usage error (bad flags or
unknown strategy), 3 invalid data or configuration, 4 file-system error,
5 a decision exceeded the budget.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path

from . import _jsonio, _seeding
from .datapool import PoolConfig
from .errors import DamError, FileFormatError, IncompleteDataError, ParameterError
from .evaluation import EvaluationReport, MarketFailure, MarketScore, ScoreConfig, evaluate, report_csv, report_markdown
from .market import MarketConfig, benchmark_seeds, build_market, gen_pool, market_from_dict, money
from .model import TrainConfig
from .strategies import StrategyConfig, parse_strategy

log = logging.getLogger("damsim")

MANIFEST = "manifest.json"
RUN_MANIFEST = "run_manifest.json"


class UsageError(DamError):
    exit_code = 2


def _with_digest(manifest):
    manifest = dict(manifest)
    manifest.pop("digest", None)
    manifest["digest"] = _jsonio.digest(manifest)
    return manifest


# ---------------------------------------------------------------------------
# gen


def _gen_manifest(args):
    if args.manifest:
        m = _jsonio.read(args.manifest)
        if m.get("kind") != "market-manifest":
            raise FileFormatError(args.manifest, "not a market manifest")
        m.pop("files", None)
        return _with_digest(m)
    pool = PoolConfig(dim=args.dim, seed=args.seed)
    market = MarketConfig(
        num_providers=args.k,
        budget=money(args.budget),
        total_price=money(args.price),
        n_shared=args.n_shared,
        acquirer_size=args.acquirer_size,
        noisy_providers=args.noisy,
    )
    return _with_digest(
        {
            "format_version": _jsonio.FORMAT_VERSION,
            "kind": "market-manifest",
            "generator": dict(_seeding.GENERATOR),
            "pool": pool.to_dict(),
            "market": market.to_dict(),
            "base_seed": args.seed,
            "market_seeds": benchmark_seeds(args.seed, args.count),
            "public_only": bool(args.public_only),
        }
    )


def cmd_gen(args):
    manifest = _gen_manifest(args)
    pool_cfg = PoolConfig.from_dict(manifest["pool"])
    market_cfg = MarketConfig.from_dict(manifest["market"])
    pool = gen_pool(pool_cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for i, seed in enumerate(manifest["market_seeds"], start=1):
        m = build_market(pool_cfg, market_cfg, seed, pool=pool)
        d = m.to_dict(public_only=manifest["public_only"])
        d["manifest_digest"] = manifest["digest"]
        d["market_index"] = i
        name = f"market_{i}.json"
        _jsonio.write(out / name, d, compact=True)
        files.append(name)
        log.info("wrote %s", out / name)
    _jsonio.write(out / MANIFEST, dict(manifest, files=files))
    return 0


# ---------------------------------------------------------------------------
# run


def _market_files(markets_dir):
    d = Path(markets_dir)
    if not d.is_dir():
        raise FileNotFoundError(f"markets directory not found: {d}")
    mpath = d / MANIFEST
    manifest = _jsonio.read(mpath) if mpath.exists() else None
    if manifest and "files" in manifest:
        files = [d / f for f in manifest["files"]]
    else:
        files = sorted(d.glob("market_*.json"), key=lambda p: int(re.findall(r"\d+", p.stem)[-1]))
    if not files:
        raise FileNotFoundError(f"no market files in {d}")
    return manifest, files


def slug(strategy):
    return str(strategy).replace(":", "-")


def cmd_run(args):
    try:
        kind = parse_strategy(args.strategy)
    except ParameterError as e:
        raise UsageError(str(e)) from e
    manifest, files = _market_files(args.markets)
    cfg = StrategyConfig(
        train=TrainConfig(),
        rfe_k=args.rfe_k,
        skip_factor=None if args.skip_factor <= 0 else args.skip_factor,
        percent_split_by_k=args.percent_split_by_k,
    )
    score_cfg = ScoreConfig(alpha=args.alpha)
    loaded = []
    for path in files:
        view, seed, market = market_from_dict(_jsonio.read(path), path)
        loaded.append((path, view, market))
    view0 = loaded[0][1]
    run_manifest = _with_digest(
        {
            "format_version": _jsonio.FORMAT_VERSION,
            "kind": "run-manifest",
            "market_manifest_digest": None if manifest is None else manifest.get("digest"),
            "pool_seed": None if manifest is None else manifest["pool"]["seed"],
            "market_seeds": None if manifest is None else manifest["market_seeds"],
            "strategy": str(kind),
            "alpha": score_cfg.alpha,
            "budget": _jsonio.money_out(view0.budget),
            "k": view0.num_providers,
            "dim": view0.acquirer_set.dim,
            "n_shared": len(view0.listings[0].shared_samples),
            "strategy_config": cfg.to_dict(),
        }
    )
    out = Path(args.out) if args.out else Path(args.markets) / "runs"
    out = out / slug(kind)
    out.mkdir(parents=True, exist_ok=True)
    _jsonio.write(out / RUN_MANIFEST, run_manifest)
    n = len(loaded)
    header = {
        "format_version": _jsonio.FORMAT_VERSION,
        "manifest_digest": run_manifest["digest"],
        "strategy": str(kind),
        "num_markets": n,
    }
    for i, (path, view, market) in enumerate(loaded, start=1):
        # strategies see only the public section, whatever the file holds
        try:
            decision = kind.decide(view, cfg)
        except DamError as e:
            raise MarketFailure(i, e) from e
        _jsonio.write(out / f"decision_market_{i}.json", dict(header, market_index=i, decision=decision.to_dict()))
        if market is None:
            log.warning("%s is public-only; skipping evaluation", path)
            continue
        ms = evaluate(market, decision, cfg.train, score_cfg)
        _jsonio.write(out / f"score_market_{i}.json", dict(header, market_index=i, score=ms.to_dict()))
        log.info("market %d: %s score %.4f (accuracy %.4f, cost %.3f)", i, kind, ms.score, ms.accuracy, float(ms.cost))
    return 0


# ---------------------------------------------------------------------------
# report


def _strategy_order(name):
    head, _, arg = name.partition(":")
    rank = {"all": 0, "percent": 1, "single": 2, "rfe": 3, "cofr": 4, "lp": 5}.get(head, 6)
    if arg == "inf":
        sub = float("inf")
    else:
        try:
            sub = float(arg)
        except ValueError:
            sub = 0.0
    return (rank, sub, name)


def load_score_files(inputs):
    paths = []
    for inp in inputs:
        p = Path(inp)
        if p.is_dir():
            paths.extend(sorted(p.rglob("score_market_*.json")))
        elif p.exists():
            paths.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    if not paths:
        raise IncompleteDataError("no score files found")
    grouped = {}
    for path in paths:
        try:
            d = _jsonio.read(path)
            strategy = d["strategy"]
            idx = int(d["market_index"])
            n = int(d["num_markets"])
            ms = MarketScore.from_dict(d["score"])
            digest = d["manifest_digest"]
        except (ValueError, KeyError, TypeError) as e:
            raise FileFormatError(path, f"malformed score file ({e})") from e
        g = grouped.setdefault(strategy, {"n": n, "scores": {}, "digests": set()})
        g["scores"][idx] = ms
        g["digests"].add(digest)
    reports, digests = [], []
    for strategy in sorted(grouped, key=_strategy_order):
        g = grouped[strategy]
        missing = [i for i in range(1, g["n"] + 1) if i not in g["scores"]]
        if missing:
            raise IncompleteDataError(f"strategy {strategy}: missing market column(s) {missing}")
        reports.append(EvaluationReport.of(strategy, [g["scores"][i] for i in range(1, g["n"] + 1)]))
        digests.extend(sorted(g["digests"]))
    return reports, digests


def cmd_report(args):
    reports, digests = load_score_files(args.inputs)
    digest = _jsonio.digest(digests)
    if args.format == "markdown":
        text = report_markdown(reports)
    else:
        text = report_csv(reports, header_comment=f"format_version={_jsonio.FORMAT_VERSION} manifest_digest={digest}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        if args.json:
            _jsonio.write(
                Path(args.out).with_suffix(".json"),
                {
                    "format_version": _jsonio.FORMAT_VERSION,
                    "manifest_digest": digest,
                    "reports": [r.to_dict() for r in reports],
                },
            )
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="damsim", description=__doc__.splitlines()[0])
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate market instance files")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--count", type=int, default=5, help="number of market instances")
    g.add_argument("--k", type=int, default=20, help="providers per market")
    g.add_argument("--dim", type=int, default=64)
    g.add_argument("--budget", type=float, default=150.0)
    g.add_argument("--price", type=float, default=100.0, help="total price of each dataset")
    g.add_argument("--n-shared", type=int, default=5)
    g.add_argument("--acquirer-size", type=int, default=400)
    g.add_argument("--noisy", type=int, default=0, help="providers given heavy label noise")
    g.add_argument("--public-only", action="store_true")
    g.add_argument("--manifest", help="replay a previous gen manifest (other generation flags ignored)")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run a strategy on generated markets")
    r.add_argument("--markets", required=True)
    r.add_argument("--strategy", required=True, help="single:<i> | all | percent:<p> | rfe | cofr | lp:1 | lp:2 | lp:inf")
    r.add_argument("--out", help="output root (default: <markets>/runs)")
    r.add_argument("--alpha", type=float, default=0.98)
    r.add_argument("--rfe-k", type=int, default=5)
    r.add_argument("--skip-factor", type=float, default=1.5, help="<= 0 disables the unit-cost filter")
    r.add_argument("--percent-split-by-k", action="store_true", help="strategy percent: split the budget by K")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("report", help="tabulate score files")
    t.add_argument("inputs", nargs="+", help="run directories or score files")
    t.add_argument("--out")
    t.add_argument("--format", choices=["csv", "markdown"], default="csv")
    t.add_argument("--json", action="store_true", help="also write full detail next to --out")
    t.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except DamError as e:
        log.error("%s", e)
        return getattr(e, "exit_code", 3)
    except OSError as e:
        log.error("%s", e)
        return 4


if __name__ == "__main__":
    sys.exit(main())
