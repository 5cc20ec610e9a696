"""Matplotlib renderers for run reports.

One summary figure per run plus, where a seed carries raw samples, a detail
figure for the first such seed.  All output is written next to the report.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_figures"]


def _norm_cdf(x):
    return 0.5 * (1.0 + np.vectorize(math.erf)(x / math.sqrt(2.0)))


def _save(fig, out_dir: Path, name: str, written: list[Path]) -> None:
    path = out_dir / name
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    written.append(path)


def _seed_stats(report):
    return [e for e in report["perSeed"] if "statistics" in e]


def _fig_exact_check(report, samples, out_dir, written):
    entry = _seed_stats(report)[0]
    stats = entry["statistics"]
    thr = entry["thresholds"]
    pairs = [
        ("hitting", stats["hittingMaxAbsDiff"], thr["hitting"]),
        ("variance", stats["varMaxRelDiff"], thr["variance"]),
        ("mean", stats["meanMaxRelDiff"], thr["variance"]),
        ("homogeneous", stats["homogeneousMaxRelDiff"], thr["homogeneous"]),
        ("solve_s", stats["solveSMaxErr"], thr["solveS"]),
    ]
    fig, ax = plt.subplots(figsize=(6, 3))
    y = np.arange(len(pairs))
    ax.barh(y, [max(p[1], 1e-18) for p in pairs], color="steelblue")
    for i, p in enumerate(pairs):
        ax.plot([p[2], p[2]], [i - 0.4, i + 0.4], color="crimson")
    ax.set_yticks(y, [p[0] for p in pairs])
    ax.set_xscale("log")
    ax.set_xlabel("max error (red tick = threshold)")
    ax.set_title("exact-check: oracle agreement")
    _save(fig, out_dir, "exact-check_summary.png", written)


def _fig_speed(report, samples, out_dir, written):
    entries = _seed_stats(report)
    agg = report["aggregate"]
    ratios = [e["statistics"]["xOverN"] for e in entries]
    v = agg["vOracle"]
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(range(len(ratios)), ratios, "o", ms=3, label="X_n / n per seed")
    ax.axhline(v, color="crimson", label="exact speed")
    ax.axhspan(0.95 * v, 1.05 * v, color="crimson", alpha=0.1)
    ax.axhline(agg["vRegen"], color="darkgreen", ls="--", label="regeneration estimate")
    ax.set_xlabel("seed index")
    ax.set_ylabel("speed")
    ax.legend(fontsize=8)
    ax.set_title("speed: LLN check")
    _save(fig, out_dir, "speed_summary.png", written)


def _fig_clt(report, samples, out_dir, written):
    entries = _seed_stats(report)
    ks = [e["statistics"]["ks"] for e in entries]
    ksw = [e["statistics"]["ksWrongCentering"] for e in entries]
    thr = entries[0]["thresholds"]["ks"]
    fig, ax = plt.subplots(figsize=(6, 3))
    x = np.arange(len(ks))
    ax.bar(x - 0.2, ks, 0.4, label="quenched centering", color="steelblue")
    ax.bar(x + 0.2, ksw, 0.4, label="annealed centering", color="darkorange")
    ax.axhline(thr, color="crimson", ls="--", label="threshold")
    ax.set_xlabel("environment (seed index)")
    ax.set_ylabel("KS distance to N(0,1)")
    ax.legend(fontsize=8)
    ax.set_title("clt: per-environment KS")
    _save(fig, out_dir, "clt_summary.png", written)

    for entry in entries:
        seed = entry["seed"]
        if seed not in samples or "hitting_times" not in samples[seed]:
            continue
        rows = samples[seed]["hitting_times"]["rows"]
        t = np.array([r[1] for r in rows], dtype=float)
        mu = entry["statistics"]["quenchedMeanT"]
        sd = math.sqrt(entry["statistics"]["quenchedVarT"])
        z = np.sort((t - mu) / sd)
        grid = np.linspace(-4, 4, 400)
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.step(z, np.arange(1, len(z) + 1) / len(z), where="post", label="empirical")
        ax.plot(grid, _norm_cdf(grid), color="crimson", label="N(0,1)")
        ax.set_xlim(-4, 4)
        ax.legend(fontsize=8)
        ax.set_title(f"clt: standardized hitting-time CDF, seed {seed}")
        _save(fig, out_dir, f"clt_seed{seed}_cdf.png", written)
        break


def _fig_stable(report, samples, out_dir, written):
    entries = _seed_stats(report)
    fig, ax = plt.subplots(figsize=(6, 3))
    x = np.arange(len(entries))
    s = entries[0]["statistics"]["s"]
    ax.bar(x - 0.15, [e["statistics"]["hillM1"] for e in entries], 0.3, label="Hill(M_1)")
    ax.axhline(s, color="crimson", ls="--", label="tail exponent s")
    if "hillVarSummand" in entries[0]["statistics"]:
        ax.bar(
            x + 0.15,
            [e["statistics"]["hillVarSummand"] for e in entries],
            0.3,
            label="Hill(var summand)",
            color="darkorange",
        )
        ax.axhline(s / 2.0, color="darkorange", ls=":", label="s/2")
    ax.set_xlabel("seed index")
    ax.legend(fontsize=8)
    ax.set_title("stable: tail index estimates")
    _save(fig, out_dir, "stable_summary.png", written)


def _fig_localize(report, samples, out_dir, written):
    entries = _seed_stats(report)
    occ = [(i, e["statistics"]["occupation"]) for i, e in enumerate(entries)
           if "occupation" in e["statistics"]]
    thr = entries[0]["thresholds"]["occupation"]
    fig, ax = plt.subplots(figsize=(6, 3))
    if occ:
        ax.plot([i for i, _ in occ], [o for _, o in occ], "o", ms=4)
    ax.axhline(thr, color="crimson", ls="--", label="threshold")
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("seed index (witness fired and simulated)")
    ax.set_ylabel("occupation probability")
    ax.legend(fontsize=8)
    ax.set_title("localize: window occupation at t_m")
    _save(fig, out_dir, "localize_summary.png", written)


def _fig_laplace(report, samples, out_dir, written):
    entries = _seed_stats(report)
    fig, ax = plt.subplots(figsize=(6, 3))
    lam = np.linspace(0.0, 5.0, 201)
    ax.plot(lam, 1.0 / (1.0 + lam), color="crimson", label="1 / (1 + lambda)")
    shown = 0
    for entry in entries:
        seed = entry["seed"]
        if seed not in samples or "crossing_times" not in samples[seed]:
            continue
        rows = samples[seed]["crossing_times"]["rows"]
        t = np.array([r[1] for r in rows], dtype=float)
        phi = np.array([np.mean(np.exp(-l * t)) for l in lam])
        ax.plot(lam, phi, alpha=0.7, label=f"seed {seed}")
        shown += 1
        if shown >= 3:
            break
    ax.set_xlabel("lambda")
    ax.set_ylabel("Laplace transform of scaled crossing time")
    ax.legend(fontsize=8)
    ax.set_title("laplace: deepest-block crossing vs exponential law")
    _save(fig, out_dir, "laplace_summary.png", written)


def _fig_dominant(report, samples, out_dir, written):
    agg = report["aggregate"]
    fig, ax = plt.subplots(figsize=(4.5, 3))
    rates = [agg.get("dominantFoundRate", 0.0), agg.get("uniformFoundRate", 0.0)]
    rates = [r if isinstance(r, (int, float)) else 0.0 for r in rates]
    ax.bar(["dominant block", "uniform blocks"], rates, color=["steelblue", "darkorange"])
    ax.set_ylim(0, 1)
    ax.set_ylabel("frequency over seeds")
    ax.set_title("dominant: event frequencies")
    _save(fig, out_dir, "dominant_summary.png", written)


def _fig_ldp(report, samples, out_dir, written):
    entries = _seed_stats(report)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    drew = False
    for entry in entries:
        seed = entry["seed"]
        if seed not in samples or "rate_table" not in samples[seed]:
            continue
        rows = samples[seed]["rate_table"]["rows"]
        v = [r[0] for r in rows]
        j = [r[1] for r in rows]
        ax.plot(v, j, "o-", ms=3, label=f"Jbar, seed {seed}")
        v_hat = entry["statistics"]["vHat"]
        ax.axvline(v_hat, color="gray", ls=":", label="empirical speed")
        drew = True
        break
    if drew:
        ax.set_xlabel("v")
        ax.set_ylabel("rate")
        ax.legend(fontsize=8)
    ax.set_title("ldp: empirical rate function")
    _save(fig, out_dir, "ldp_summary.png", written)


_RENDERERS = {
    "exact-check": _fig_exact_check,
    "speed": _fig_speed,
    "clt": _fig_clt,
    "stable": _fig_stable,
    "localize": _fig_localize,
    "laplace": _fig_laplace,
    "dominant": _fig_dominant,
    "ldp": _fig_ldp,
}


def render_figures(report: dict, samples: dict, out_dir: Path) -> list[Path]:
    written: list[Path] = []
    if not _seed_stats(report):
        return written
    renderer = _RENDERERS.get(report["experiment"])
    if renderer is not None:
        renderer(report, samples, out_dir, written)
    return written
