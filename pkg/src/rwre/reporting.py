"""Run reports: canonical serialization, hashing, and the seed runner.

A report is byte-reproducible for a given config and thread count equal to
any other thread count; wall-clock data lives only under the `timing` key,
which `canonical_payload` strips before comparison.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from hashlib import sha256
from pathlib import Path

import numpy as np

from .experiments import aggregate_results, run_experiment_seed

__all__ = [
    "jsonable",
    "canonical_json",
    "config_hash",
    "execute_config",
    "canonical_payload",
    "write_report",
    "write_samples_csv",
    "write_per_seed_csv",
]


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats into
    plain JSON-safe values (non-finite floats become their repr strings)."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not math.isfinite(f):
            return repr(f)
        return f
    return obj


def canonical_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return sha256(canonical_json(config).encode("utf-8")).hexdigest()


def _timed_seed_task(args):
    name, dist_json, seed, params = args
    t0 = time.perf_counter()
    try:
        result = run_experiment_seed(name, dist_json, seed, params)
    except Exception as exc:  # fail-soft: one bad seed must not sink the run
        result = {"seed": seed, "error": f"{type(exc).__name__}: {exc}", "pass": False}
    return result, time.perf_counter() - t0


def execute_config(config: dict, threads: int = 1) -> tuple[dict, dict]:
    """Run every seed of a resolved config and aggregate.

    Returns (report, samples) where samples maps seed -> named sample tables
    destined for CSV files.  The report never contains raw samples.
    """
    name = config["experiment"]
    dist_json = config["dist"]
    seeds = config["seeds"]
    params = config["params"]
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()

    tasks = [(name, dist_json, seed, params) for seed in seeds]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_timed_seed_task, tasks))
    else:
        outcomes = [_timed_seed_task(t) for t in tasks]

    samples: dict[int, dict] = {}
    per_seed = []
    durations = {}
    for (result, seconds), seed in zip(outcomes, seeds):
        durations[str(seed)] = round(seconds, 3)
        if "samples" in result:
            samples[seed] = result.pop("samples")
        per_seed.append(jsonable(result))

    aggregate = jsonable(aggregate_results(name, dist_json, seeds, per_seed, params))
    report = {
        "experiment": name,
        "configHash": config_hash(config),
        "config": jsonable(config),
        "perSeed": per_seed,
        "aggregate": aggregate,
        "timing": {
            "startedAt": started,
            "totalSeconds": round(time.perf_counter() - t0, 3),
            "perSeedSeconds": durations,
        },
    }
    return report, samples


def canonical_payload(report: dict) -> bytes:
    """Report bytes with wall-clock data removed; equal across thread counts."""
    trimmed = {k: v for k, v in report.items() if k != "timing"}
    return canonical_json(trimmed).encode("utf-8")


def write_report(path: Path, report: dict) -> None:
    path.write_text(json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n")


def write_samples_csv(path: Path, columns, rows, cfg_hash: str, seed: int) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config={cfg_hash} seed={seed}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def write_per_seed_csv(path: Path, report: dict) -> None:
    """Flat per-seed table: seed, pass, then every scalar statistic."""
    keys: list[str] = []
    for entry in report["perSeed"]:
        for k, v in entry.get("statistics", {}).items():
            if isinstance(v, (int, float, bool, str)) and k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config={report['configHash']}\n")
        writer = csv.writer(fh)
        writer.writerow(["seed", "pass", "error"] + keys)
        for entry in report["perSeed"]:
            stats = entry.get("statistics", {})
            writer.writerow(
                [entry["seed"], entry.get("pass", ""), entry.get("error", "")]
                + [stats.get(k, "") for k in keys]
            )
