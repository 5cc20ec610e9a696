"""Command-line surface: exit codes, artifact layout, and the JSON/CSV
serialization helpers behind the report files.

Everything goes through cli.main(argv) in-process so capsys sees the output
and coverage follows the same code paths as the installed entry point.
"""

import json
import math

import numpy as np
import pytest

from rwre.cli import main
from rwre.environment import (
    sample_window_P,
    sample_window_Q,
    solomon_classify,
    two_point_family,
)
from rwre.experiments import experiment_catalog, resolve_config
from rwre.figures import render_figures
from rwre.quenched import quenched_mean_T, quenched_var_T
from rwre.reporting import (
    canonical_json,
    canonical_payload,
    config_hash,
    execute_config,
    jsonable,
    write_samples_csv,
)


def invoke(capsys, *argv):
    rc = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def write_config(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def speed_config(walk_err=1.0, regen_err=1.0):
    # Tiny scales: artifact layout is under test here, not estimator quality.
    return {
        "experiment": "speed",
        "dist": {"family": "two-point", "alpha": 0.2},
        "seeds": [0, 1],
        "params": {
            "n": 2000,
            "regenIncrements": 500,
            "regenWalkers": 8,
            "thresholds": {"walkRelErr": walk_err, "regenRelErr": regen_err},
        },
    }


def clt_config():
    return {
        "experiment": "clt",
        "dist": {"family": "two-point", "s": 4.0},
        "seeds": [0, 1],
        "params": {
            "n": 100,
            "replicas": 60,
            "reflectionDepth": 32,
            "thresholds": {"ks": 1.0, "minPassFraction": 0.0},
        },
    }


# ---------------------------------------------------------------- list/check


def test_list_plain(capsys):
    rc, out, err = invoke(capsys, "list")
    assert rc == 0 and err == ""
    for entry in experiment_catalog():
        assert entry["name"] in out
        assert entry["oracle"] in out


def test_list_json_matches_catalog(capsys):
    rc, out, _ = invoke(capsys, "list", "--json")
    assert rc == 0
    assert json.loads(out) == experiment_catalog()


def test_check_ok(tmp_path, capsys):
    raw = speed_config()
    path = write_config(tmp_path, raw)
    rc, out, err = invoke(capsys, "check", path)
    assert rc == 0 and err == ""
    lines = out.rstrip("\n").splitlines()
    assert lines[-1] == "config ok"
    echoed = json.loads("\n".join(lines[:-1]))
    assert echoed == resolve_config(raw)


def test_check_rejects_bad_field(tmp_path, capsys):
    raw = speed_config()
    raw["params"]["bogus"] = 1
    path = write_config(tmp_path, raw)
    rc, out, err = invoke(capsys, "check", path)
    assert rc == 2
    assert "params.bogus" in err


def test_check_unreadable_config(tmp_path, capsys):
    rc, _, err = invoke(capsys, "check", tmp_path / "missing.json")
    assert rc == 2 and "config error" in err

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc, _, err = invoke(capsys, "check", bad)
    assert rc == 2 and "config error" in err


# ----------------------------------------------------------------------- run


def test_run_writes_artifacts(tmp_path, capsys):
    raw = speed_config()
    path = write_config(tmp_path, raw)
    out_dir = tmp_path / "out"
    rc, out, err = invoke(capsys, "run", path, "--out", out_dir)
    assert rc == 0 and err == ""

    report_path = out_dir / "speed_report.json"
    report = json.loads(report_path.read_text())
    assert report["configHash"] == config_hash(resolve_config(raw))
    assert [e["seed"] for e in report["perSeed"]] == [0, 1]
    assert report["aggregate"]["pass"] is True
    assert "timing" in report

    per_seed = (out_dir / "speed_per_seed.csv").read_text().splitlines()
    assert per_seed[0] == f"# config={report['configHash']}"
    assert per_seed[1].startswith("seed,pass")
    assert len(per_seed) == 4  # header comment + columns + two seeds

    fig = out_dir / "speed_summary.png"
    assert fig.exists() and fig.stat().st_size > 0

    assert "seed 0: pass" in out and "seed 1: pass" in out
    assert "aggregate: pass" in out
    assert str(report_path) in out


def test_run_failing_threshold_exits_1(tmp_path, capsys):
    path = write_config(tmp_path, speed_config(walk_err=1e-12))
    out_dir = tmp_path / "out"
    rc, out, _ = invoke(capsys, "run", path, "--out", out_dir, "--no-figures")
    assert rc == 1
    assert "aggregate: FAIL" in out
    # the report is still written for post-mortem
    assert (out_dir / "speed_report.json").exists()


def test_run_no_figures(tmp_path, capsys):
    path = write_config(tmp_path, speed_config())
    out_dir = tmp_path / "out"
    rc, _, _ = invoke(capsys, "run", path, "--out", out_dir, "--no-figures")
    assert rc == 0
    assert list(out_dir.glob("*.png")) == []


def test_run_invalid_config_exits_2(tmp_path, capsys):
    raw = speed_config()
    del raw["seeds"]
    path = write_config(tmp_path, raw)
    rc, _, err = invoke(capsys, "run", path)
    assert rc == 2 and "seeds" in err


def test_run_rejects_bad_thread_count(tmp_path, capsys):
    path = write_config(tmp_path, speed_config())
    rc, _, err = invoke(capsys, "run", path, "--threads", "0")
    assert rc == 2 and "threads" in err


def test_run_payload_identical_across_thread_counts(tmp_path, capsys):
    path = write_config(tmp_path, clt_config())
    dirs = {1: tmp_path / "t1", 3: tmp_path / "t3"}
    for threads, out_dir in dirs.items():
        rc, _, _ = invoke(
            capsys, "run", path, "--out", out_dir, "--threads", threads, "--no-figures"
        )
        assert rc == 0

    payloads = {
        t: canonical_payload(json.loads((d / "clt_report.json").read_text()))
        for t, d in dirs.items()
    }
    assert payloads[1] == payloads[3]

    for name in ("clt_per_seed.csv", "clt_seed0_hitting_times.csv", "clt_seed1_hitting_times.csv"):
        assert (dirs[1] / name).read_bytes() == (dirs[3] / name).read_bytes()


# ---------------------------------------------------------------- env sample


def test_env_sample_plain_matches_direct_draw(capsys):
    rc, out, err = invoke(
        capsys, "env", "sample", "--family", "two-point", "--alpha", 0.2,
        "--seed", 3, "--lo", 0, "--hi", 6,
    )
    assert rc == 0 and err == ""
    lines = out.rstrip("\n").splitlines()
    assert lines[0] == "window [0, 6] under P, seed 3"
    assert lines[1] == "site omega rho"

    env = sample_window_P(two_point_family(0.2), 3, 0, 6)
    assert len(lines) == 2 + 7
    for row, site in zip(lines[2:], range(0, 7)):
        x, om, rho = row.split()
        assert int(x) == site
        assert float(om) == pytest.approx(env.omega_at(site), abs=5e-7)
        assert float(rho) == pytest.approx(env.rho_at(site), abs=5e-6)


def test_env_sample_json_q_law_with_blocks(capsys):
    rc, out, _ = invoke(
        capsys, "env", "sample", "--family", "two-point", "--alpha", 0.2,
        "--seed", 5, "--law", "Q", "--left-depth", 8, "--hi", 12,
        "--blocks", 3, "--json",
    )
    assert rc == 0
    payload = json.loads(out)
    assert payload["lo"] == -8 and payload["hi"] == 12
    assert payload["law"] == "Q" and payload["seed"] == 5

    env = sample_window_Q(two_point_family(0.2), 5, 8, 12)
    assert payload["omega"] == [env.omega_at(x) for x in range(-8, 13)]

    assert payload["nu"][0] == 0
    assert payload["nu"] == sorted(payload["nu"]) and len(set(payload["nu"])) == 4
    assert len(payload["M"]) == 3 and all(m > 0 for m in payload["M"])


def test_env_sample_without_dist_exits_2(capsys):
    rc, _, err = invoke(capsys, "env", "sample", "--seed", 1)
    assert rc == 2 and "config error" in err


def test_env_sample_q_requires_transience(capsys):
    # alpha = 1/2 gives E[log rho] = 0; the conditioned law does not exist
    rc, _, err = invoke(
        capsys, "env", "sample", "--family", "two-point", "--alpha", 0.5,
        "--seed", 1, "--law", "Q",
    )
    assert rc == 2 and "config error" in err


# --------------------------------------------------------------- stats exact


def test_stats_exact_json_matches_library(capsys):
    rc, out, _ = invoke(
        capsys, "stats", "exact", "--family", "two-point", "--alpha", 0.2,
        "--seed", 9, "--target", 20, "--depth", 32, "--site", 10, "--json",
    )
    assert rc == 0
    payload = json.loads(out)

    dist = two_point_family(0.2)
    env = sample_window_P(dist, 9, -32, 20)
    assert payload["quenchedMeanT"] == pytest.approx(quenched_mean_T(env, 20, 32))
    assert payload["quenchedVarT"] == pytest.approx(quenched_var_T(env, 20, 32))
    assert payload["tailExponent"] == pytest.approx(2.0, abs=1e-9)
    assert payload["speed"] == pytest.approx(solomon_classify(dist).speed)
    assert payload["regime"] == "transient-right"
    assert payload["reflectionDepth"] == 32 and payload["target"] == 20

    assert payload["exitSite"] == 10
    assert 0 < payload["exitUp"] < 1 and 0 < payload["exitDown"] < 1
    assert payload["exitUp"] + payload["exitDown"] == pytest.approx(1.0, abs=1e-12)


def test_stats_exact_infinite_tail_sentinel(capsys):
    rc, out, _ = invoke(
        capsys, "stats", "exact", "--family", "homogeneous", "--p", 0.75,
        "--seed", 0, "--target", 10, "--json",
    )
    assert rc == 0
    payload = json.loads(out)
    assert payload["tailExponent"] == "Infinity"
    assert payload["speed"] == pytest.approx(0.5)
    assert payload["regime"] == "transient-right"


def test_stats_exact_plain_output(capsys):
    rc, out, _ = invoke(
        capsys, "stats", "exact", "--family", "homogeneous", "--p", 0.75, "--seed", 0,
    )
    assert rc == 0
    assert "quenchedMeanT:" in out and "regime: transient-right" in out


def test_stats_exact_bad_target_exits_2(capsys):
    rc, _, err = invoke(
        capsys, "stats", "exact", "--family", "two-point", "--alpha", 0.2,
        "--seed", 0, "--target", 0,
    )
    assert rc == 2 and "config error" in err


# ------------------------------------------------------- serialization layer


def test_jsonable_conversions():
    obj = {
        "f": np.float64(1.5),
        "i": np.int32(3),
        "b": np.bool_(True),
        "arr": np.array([1, 2]),
        "inf": math.inf,
        "nan": float("nan"),
        "tup": (1, 2),
        7: "int key",
    }
    out = jsonable(obj)
    assert out["f"] == 1.5 and isinstance(out["f"], float)
    assert out["i"] == 3 and isinstance(out["i"], int)
    assert out["b"] is True
    assert out["arr"] == [1, 2]
    assert out["inf"] == "inf" and out["nan"] == "nan"
    assert out["tup"] == [1, 2]
    assert out["7"] == "int key"
    json.dumps(out)  # round-trippable by construction


def test_canonical_json_is_order_invariant():
    a = {"x": 1, "y": {"b": 2, "a": 3}}
    b = {"y": {"a": 3, "b": 2}, "x": 1}
    assert canonical_json(a) == canonical_json(b)
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64 and set(config_hash(a)) <= set("0123456789abcdef")


def test_canonical_payload_strips_timing():
    base = {"experiment": "x", "perSeed": [], "aggregate": {"pass": True}}
    r1 = dict(base, timing={"totalSeconds": 1.0})
    r2 = dict(base, timing={"totalSeconds": 99.0, "startedAt": "later"})
    assert canonical_payload(r1) == canonical_payload(r2)
    assert b"timing" not in canonical_payload(r1)


def test_write_samples_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    write_samples_csv(path, ["a", "b"], [[1, 2.5], [3, 4.0]], "deadbeef", 7)
    lines = path.read_text().splitlines()
    assert lines[0] == "# config=deadbeef seed=7"
    assert lines[1] == "a,b"
    assert lines[2] == "1,2.5" and lines[3] == "3,4.0"


def test_render_figures_smoke(tmp_path):
    config = resolve_config(clt_config())
    report, samples = execute_config(config, threads=1)
    paths = render_figures(report, samples, tmp_path)
    names = {p.name for p in paths}
    assert "clt_summary.png" in names
    assert "clt_seed0_cdf.png" in names
    for p in paths:
        assert p.exists() and p.stat().st_size > 0
