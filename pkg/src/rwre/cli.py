"""Command-line harness.

    rwre run <config.json> [--threads N] [--out DIR] [--no-figures]
    rwre list [--json]
    rwre check <config.json>
    rwre env sample --family two-point --alpha 0.2 --seed 7 --lo -4 --hi 12
    rwre stats exact --family two-point --s 3 --seed 7 --target 50 --depth 32

Exit codes: 0 all thresholds pass, 1 some check failed, 2 invalid config.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .environment import (
    ladder_decompose,
    sample_window_P,
    sample_window_Q,
    solomon_classify,
    solve_s,
)
from .experiments import (
    ConfigError,
    dist_from_config,
    experiment_catalog,
    resolve_config,
)
from .quenched import hitting_prob, quenched_mean_T, quenched_var_T
from .reporting import (
    execute_config,
    write_per_seed_csv,
    write_report,
    write_samples_csv,
)

__all__ = ["main", "build_parser"]


def _add_dist_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=["two-point", "homogeneous"])
    parser.add_argument("--alpha", type=float, help="two-point: P(omega = 1/3)")
    parser.add_argument("--s", type=float, help="two-point: pick alpha from tail exponent s")
    parser.add_argument("--p", type=float, help="homogeneous: omega = p everywhere")
    parser.add_argument("--atoms", help='explicit law as JSON {"atoms": [...], "kappa": ...}')


def _dist_from_args(args) -> "EnvDistribution":
    if args.atoms:
        return dist_from_config(json.loads(args.atoms))
    obj: dict = {"family": args.family}
    for key in ("alpha", "s", "p"):
        val = getattr(args, key)
        if val is not None:
            obj[key] = val
    return dist_from_config(obj)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwre", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config and write report + CSVs + figures")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--out", type=Path, default=None, help="output directory (default: next to config)")
    p_run.add_argument("--no-figures", action="store_true")

    p_list = sub.add_parser("list", help="catalog of experiments and their oracles")
    p_list.add_argument("--json", action="store_true")

    p_check = sub.add_parser("check", help="validate a config without running it")
    p_check.add_argument("config", type=Path)

    p_env = sub.add_parser("env", help="environment utilities")
    env_sub = p_env.add_subparsers(dest="env_command", required=True)
    p_sample = env_sub.add_parser("sample", help="draw one environment window")
    _add_dist_args(p_sample)
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--lo", type=int, default=0)
    p_sample.add_argument("--hi", type=int, default=16)
    p_sample.add_argument("--law", choices=["P", "Q"], default="P")
    p_sample.add_argument("--left-depth", type=int, default=16, help="Q law: conditioned sites left of 0")
    p_sample.add_argument("--blocks", type=int, default=0, help="also print this many ladder blocks")
    p_sample.add_argument("--json", action="store_true")

    p_stats = sub.add_parser("stats", help="closed-form quenched statistics")
    stats_sub = p_stats.add_subparsers(dest="stats_command", required=True)
    p_exact = stats_sub.add_parser("exact", help="exact crossing moments in a sampled window")
    _add_dist_args(p_exact)
    p_exact.add_argument("--seed", type=int, required=True)
    p_exact.add_argument("--target", type=int, default=50, help="hitting target n for T_n from 0")
    p_exact.add_argument("--depth", type=int, default=64, help="reflection depth (sites left of 0)")
    p_exact.add_argument("--site", type=int, default=None, help="also print exit split from this site")
    p_exact.add_argument("--json", action="store_true")

    return parser


def _cmd_run(args) -> int:
    try:
        raw = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        config = resolve_config(raw)
    except ConfigError as exc:
        print(f"config error at field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("config error at field 'threads': must be >= 1", file=sys.stderr)
        return 2

    report, samples = execute_config(config, threads=args.threads)
    out_dir = args.out if args.out is not None else args.config.resolve().parent
    out_dir.mkdir(parents=True, exist_ok=True)
    name = config["experiment"]
    cfg_hash = report["configHash"]

    for seed, tables in samples.items():
        for table_name, table in tables.items():
            path = out_dir / f"{name}_seed{seed}_{table_name}.csv"
            write_samples_csv(path, table["columns"], table["rows"], cfg_hash, seed)
    write_per_seed_csv(out_dir / f"{name}_per_seed.csv", report)
    if not args.no_figures:
        from .figures import render_figures

        render_figures(report, samples, out_dir)
    write_report(out_dir / f"{name}_report.json", report)

    for entry in report["perSeed"]:
        if "error" in entry:
            print(f"seed {entry['seed']}: ERROR {entry['error']}")
        else:
            print(f"seed {entry['seed']}: {'pass' if entry['pass'] else 'FAIL'}")
    agg = dict(report["aggregate"])
    passed = bool(agg.pop("pass", False))
    print(f"aggregate: {'pass' if passed else 'FAIL'} {json.dumps(agg, sort_keys=True)}")
    print(f"report: {out_dir / (name + '_report.json')}")
    return 0 if passed else 1


def _cmd_list(args) -> int:
    catalog = experiment_catalog()
    if args.json:
        print(json.dumps(catalog, indent=2, sort_keys=True))
        return 0
    width = max(len(e["name"]) for e in catalog)
    for entry in catalog:
        print(f"{entry['name']:<{width}}  {entry['summary']}")
        print(f"{'':<{width}}  oracle: {entry['oracle']}")
    return 0


def _cmd_check(args) -> int:
    try:
        raw = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        config = resolve_config(raw)
    except ConfigError as exc:
        print(f"config error at field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    print(json.dumps(config, indent=2, sort_keys=True))
    print("config ok")
    return 0


def _cmd_env_sample(args) -> int:
    try:
        dist = _dist_from_args(args)
        if args.law == "Q":
            env = sample_window_Q(dist, args.seed, args.left_depth, args.hi)
        else:
            env = sample_window_P(dist, args.seed, args.lo, args.hi)
    except ConfigError as exc:
        print(f"config error at field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    sites = list(range(env.lo, env.hi + 1))
    if args.json:
        payload = {
            "lo": env.lo,
            "hi": env.hi,
            "seed": args.seed,
            "law": args.law,
            "omega": [env.omega_at(x) for x in sites],
        }
        if args.blocks > 0:
            ladder = ladder_decompose(env, 0, args.blocks)
            payload["nu"] = [int(v) for v in ladder.nu]
            payload["M"] = [float(v) for v in ladder.M]
        print(json.dumps(payload, indent=2))
        return 0
    print(f"window [{env.lo}, {env.hi}] under {args.law}, seed {args.seed}")
    print("site omega rho")
    for x in sites:
        print(f"{x} {env.omega_at(x):.6f} {env.rho_at(x):.6f}")
    if args.blocks > 0:
        ladder = ladder_decompose(env, 0, args.blocks)
        print("block nu_left nu_right M")
        for i in range(1, ladder.block_count + 1):
            left, right = ladder.block_span(i)
            print(f"{i} {left} {right} {ladder.M[i - 1]:.6g}")
    return 0


def _cmd_stats_exact(args) -> int:
    try:
        dist = _dist_from_args(args)
        n, depth = args.target, args.depth
        env = sample_window_P(dist, args.seed, -depth, n)
        mean_t = quenched_mean_T(env, n, depth)
        var_t = quenched_var_T(env, n, depth)
        tail = solve_s(dist)
        cls = solomon_classify(dist)
    except ConfigError as exc:
        print(f"config error at field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    payload = {
        "seed": args.seed,
        "target": n,
        "reflectionDepth": depth,
        "quenchedMeanT": mean_t,
        "quenchedVarT": var_t,
        "tailExponent": tail.s if tail.s != float("inf") else "Infinity",
        "speed": cls.speed,
        "regime": cls.regime,
    }
    if args.site is not None:
        up, down = hitting_prob(env, env.lo, args.site, n)
        payload["exitSite"] = args.site
        payload["exitUp"] = up
        payload["exitDown"] = down
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list":
        return _cmd_list(args)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "env":
        return _cmd_env_sample(args)
    if args.command == "stats":
        return _cmd_stats_exact(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
