"""Seeded Monte Carlo: quenched paths, hitting times, reflected coupling,
regeneration extraction and harvesting.

Replica r draws its step-t uniform as a pure function of
(master seed, r, t), so a batch kernel, a scalar loop, and any partition of
replicas across workers produce bit-identical trajectories.  Aggregation is
always done in replica order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .environment import (
    EnvDistribution,
    EnvironmentWindow,
    LadderDecomposition,
    WindowError,
    ladder_decompose,
    sample_window_P,
)
from .quenched import reflection_blocks
from .rng import CounterStream, derive, derive_array, uniform, uniform_array, zigzag

__all__ = [
    "PathSample",
    "HittingSample",
    "RegenerationRecord",
    "DistDD",
    "simulate_hitting",
    "simulate_reflected",
    "extract_regenerations",
    "simulate_walk_dD",
    "harvest_regenerations",
    "hitting_times_fixed_env",
    "reflected_times_fixed_env",
    "crossing_times_static_barrier",
    "walk_final_positions",
    "occupation_at_time",
]

_NO_BARRIER = np.iinfo(np.int64).min


@dataclass(frozen=True)
class PathSample:
    """A realized nearest-neighbor path: sites[t] is the position after t steps.

    sites is one-dimensional for d=1, else an (steps+1, d) matrix.
    """

    sites: np.ndarray
    steps: int
    seed_tuple: tuple[int, int]

    def __post_init__(self):
        sites = np.asarray(self.sites)
        if sites.shape[0] != self.steps + 1:
            raise ValueError("sites length must be steps + 1")
        diffs = np.abs(np.diff(sites, axis=0))
        norms = diffs if sites.ndim == 1 else diffs.sum(axis=1)
        if len(norms) and not np.all(norms == 1):
            raise ValueError("path is not nearest-neighbor")
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)


@dataclass(frozen=True)
class HittingSample:
    """First passage to `target`; censored means the horizon ran out first
    (T then equals the horizon, a lower bound on the true hitting time)."""

    target: int
    T: int
    censored: bool


@dataclass(frozen=True)
class RegenerationRecord:
    """Regeneration increments (displacement, duration) in direction ell.

    durations[k], displacements[k] describe the k-th increment; the last one
    is provisional when it ends at the final candidate of a finite path
    (nothing beyond the path can confirm it).  displacements is (K,) for
    d=1, else (K, d).  ell_int is the integer direction vector c*ell.
    """

    durations: np.ndarray
    displacements: np.ndarray
    ell_int: np.ndarray
    provisional_last: bool

    def __post_init__(self):
        dur = np.asarray(self.durations, dtype=np.int64)
        disp = np.asarray(self.displacements, dtype=np.int64)
        ell = np.asarray(self.ell_int, dtype=np.int64)
        if np.any(dur < 1):
            raise ValueError("durations must be >= 1")
        proj = disp * ell[0] if disp.ndim == 1 else disp @ ell
        if np.any(proj <= 0):
            raise ValueError("every displacement must advance in direction ell")
        l1 = np.abs(disp) if disp.ndim == 1 else np.abs(disp).sum(axis=1)
        if np.any(l1 > dur):
            raise ValueError("|displacement|_1 cannot exceed duration")
        for name, arr in (("durations", dur), ("displacements", disp), ("ell_int", ell)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def count(self) -> int:
        return len(self.durations)

    def confirmed(self) -> "RegenerationRecord":
        """Drop the provisional last increment, if any."""
        if not self.provisional_last:
            return self
        return RegenerationRecord(
            durations=self.durations[:-1],
            displacements=self.displacements[:-1],
            ell_int=self.ell_int,
            provisional_last=False,
        )

    def speed_estimate(self) -> float:
        """v_hat = total displacement along ell / total duration."""
        disp = self.displacements
        proj = disp * self.ell_int[0] if disp.ndim == 1 else disp @ self.ell_int
        scale = math.sqrt(float(self.ell_int @ self.ell_int))
        return float(proj.sum()) / float(self.durations.sum()) / scale


def simulate_hitting(
    env: EnvironmentWindow, target: int, horizon: int, rng: CounterStream
) -> HittingSample:
    """Walk from 0 until it first hits target (one uniform per step);
    censoring, not failure, when the horizon is reached."""
    if target <= 0:
        raise ValueError("target must be positive")
    if horizon < target:
        raise ValueError("horizon must be at least target")
    pos = 0
    for t in range(horizon):
        if pos - 1 < env.lo:
            env = env.extended(lo=env.lo - max(64, env.hi - env.lo))
        om = env.omega[pos - env.lo]
        pos += 1 if rng.next_uniform() < om else -1
        if pos == target:
            return HittingSample(target=target, T=t + 1, censored=False)
    return HittingSample(target=target, T=horizon, censored=True)


def _ladder_covering(env: EnvironmentWindow, target: int) -> LadderDecomposition:
    blocks = max(4, target)
    while True:
        ladder = ladder_decompose(env, 0, blocks)
        if ladder.nu[-1] >= target:
            return ladder
        blocks *= 2


def simulate_reflected(
    env: EnvironmentWindow, target: int, n: int, horizon: int, rng: CounterStream
) -> tuple[HittingSample, HittingSample, bool]:
    """Coupled (reflected, plain) walks from one uniform stream.

    The reflected walk treats the ladder point b(n) blocks behind its
    furthest ladder progress as an omega = 1 site.  Shared uniforms keep
    X_bar >= X pathwise: at equal sites the reflected walk's effective omega
    is >= the plain one's, and unequal positions differ by an even gap.
    Returns (reflected sample, plain sample, coupled_equal) where
    coupled_equal is True iff the reflected walk never sat on an active
    barrier (the paths then agree step for step).
    """
    if target <= 0:
        raise ValueError("target must be positive")
    if horizon < target:
        raise ValueError("horizon must be at least target")
    b = reflection_blocks(n)
    ladder = _ladder_covering(env, target)
    nu = ladder.nu
    if env.seed is not None and env.hi < nu[-1]:
        env = env.extended(hi=int(nu[-1]))
    pos_bar = 0
    pos = 0
    kmax = 0
    barrier = _NO_BARRIER
    t_bar: int | None = None
    t_plain: int | None = None
    coupled_equal = True
    for t in range(horizon):
        if min(pos, pos_bar) - 1 < env.lo:
            if env.seed is None:
                raise WindowError("walk left the hand-built window")
            env = env.extended(lo=env.lo - max(64, env.hi - env.lo))
        u = rng.next_uniform()
        if t_bar is None:
            if pos_bar == barrier:
                coupled_equal = False
                pos_bar += 1
            else:
                om_bar = env.omega[pos_bar - env.lo]
                pos_bar += 1 if u < om_bar else -1
            while kmax < ladder.block_count and pos_bar >= nu[kmax + 1]:
                kmax += 1
            barrier = int(nu[kmax - b]) if kmax - b >= 0 else _NO_BARRIER
            if pos_bar == target:
                t_bar = t + 1
        if t_plain is None:
            om = env.omega[pos - env.lo]
            pos += 1 if u < om else -1
            if pos == target:
                t_plain = t + 1
        if t_bar is not None and t_plain is not None:
            break
    bar = HittingSample(target, t_bar if t_bar is not None else horizon, t_bar is None)
    plain = HittingSample(target, t_plain if t_plain is not None else horizon, t_plain is None)
    return bar, plain, coupled_equal


def extract_regenerations(path: PathSample, ell: Sequence[int] | int = 1) -> RegenerationRecord:
    """Regeneration increments of a finite path in direction ell.

    A time n >= 1 is a candidate when the projection exceeds everything
    before it and nothing at or after it drops below.  Every increment
    between consecutive candidates is confirmed except the one ending at the
    last candidate, which later path (unseen here) could still invalidate.
    """
    ell_arr = np.atleast_1d(np.asarray(ell, dtype=np.int64))
    sites = path.sites
    proj = sites * ell_arr[0] if sites.ndim == 1 else sites @ ell_arr
    if len(proj) < 2:
        raise ValueError("path too short for any regeneration")
    prefix_max = np.maximum.accumulate(proj)
    suffix_min = np.minimum.accumulate(proj[::-1])[::-1]
    cand = np.nonzero((proj[1:] > prefix_max[:-1]) & (proj[1:] == suffix_min[1:]))[0] + 1
    if len(cand) == 0:
        raise ValueError("no confirmed regeneration in path")
    times = np.concatenate([[0], cand])
    durations = np.diff(times)
    disp = sites[cand] - sites[times[:-1]]
    return RegenerationRecord(
        durations=durations,
        displacements=disp,
        ell_int=ell_arr,
        provisional_last=True,
    )


@dataclass(frozen=True)
class DistDD:
    """Finite law of a d-dimensional site's step distribution.

    Each atom is (p, weight) where p lists probabilities for the 2d steps
    in the fixed order +e1, -e1, +e2, -e2, ...; uniform ellipticity kappa.
    """

    d: int
    atoms: tuple[tuple[tuple[float, ...], float], ...]
    kappa: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        total = math.fsum(w for _, w in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError("atom weights must sum to 1")
        for p, _ in self.atoms:
            if len(p) != 2 * self.d:
                raise ValueError("each site law needs 2d step probabilities")
            if abs(math.fsum(p) - 1.0) > 1e-12:
                raise ValueError("site law not normalized")
            if min(p) < self.kappa:
                raise ValueError("site law violates ellipticity")

    @property
    def steps(self) -> np.ndarray:
        out = np.zeros((2 * self.d, self.d), dtype=np.int64)
        for axis in range(self.d):
            out[2 * axis, axis] = 1
            out[2 * axis + 1, axis] = -1
        return out


def _site_key(site: tuple[int, ...]) -> int:
    key = 0x5157
    for c in site:
        key = derive(key, zigzag(int(c)))
    return key


def simulate_walk_dD(dist_dd: DistDD, seed: int, steps: int) -> PathSample:
    """d-dimensional quenched walk from the origin; the environment is
    realized lazily and purely from (seed, site)."""
    env_seed = derive(seed, 0)
    walk_seed = derive(seed, 1)
    atom_cums = [np.cumsum(p) for p, _ in dist_dd.atoms]
    weight_cum = np.cumsum([w for _, w in dist_dd.atoms])
    weight_cum[-1] = 1.0
    site_laws: dict[tuple[int, ...], np.ndarray] = {}
    step_vecs = dist_dd.steps
    pos = np.zeros(dist_dd.d, dtype=np.int64)
    sites = np.zeros((steps + 1, dist_dd.d), dtype=np.int64)
    for t in range(steps):
        key = tuple(int(c) for c in pos)
        law = site_laws.get(key)
        if law is None:
            u_site = uniform(env_seed, _site_key(key))
            atom_idx = int(np.searchsorted(weight_cum, u_site, side="right"))
            atom_idx = min(atom_idx, len(atom_cums) - 1)
            law = atom_cums[atom_idx]
            site_laws[key] = law
        u = uniform(walk_seed, t)
        direction = int(np.searchsorted(law, u, side="right"))
        direction = min(direction, 2 * dist_dd.d - 1)
        pos = pos + step_vecs[direction]
        sites[t + 1] = pos
    if dist_dd.d == 1:
        return PathSample(sites=sites[:, 0], steps=steps, seed_tuple=(seed, 0))
    return PathSample(sites=sites, steps=steps, seed_tuple=(seed, 0))


# ---------------------------------------------------------------------------
# batch kernels (bit-identical to the scalar loops; replica r, step t uniforms
# are uniform(derive(master, r), t) in both)
# ---------------------------------------------------------------------------


def hitting_times_fixed_env(
    env: EnvironmentWindow,
    target: int,
    horizon: int,
    master_seed: int,
    replicas: int,
    start: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """First-passage times to target for `replicas` independent walks in one
    environment.  Returns (T, censored)."""
    walk_seeds = derive_array(master_seed, np.arange(replicas, dtype=np.uint64))
    pos = np.full(replicas, start, dtype=np.int64)
    T = np.full(replicas, horizon, dtype=np.int64)
    active = np.ones(replicas, dtype=bool)
    t = 0
    lo, om = env.lo, env.omega
    while t < horizon and active.any():
        if pos[active].min() - 1 < lo:
            env = env.extended(lo=lo - max(64, env.hi - env.lo))
            lo, om = env.lo, env.omega
        idx = np.nonzero(active)[0]
        u = uniform_array(walk_seeds[idx], t)
        cur = pos[idx]
        move = np.where(u < om[cur - lo], 1, -1)
        cur = cur + move
        pos[idx] = cur
        t += 1
        hit = cur == target
        if hit.any():
            hit_idx = idx[hit]
            T[hit_idx] = t
            active[hit_idx] = False
    return T, active.copy()


def crossing_times_static_barrier(
    env: EnvironmentWindow,
    start: int,
    target: int,
    barrier: int | None,
    horizon: int,
    master_seed: int,
    replicas: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Crossing times start -> target with a fixed reflecting site (omega=1
    at `barrier`), the common case for single-block crossings where the
    barrier cannot move mid-crossing.  Returns (T, censored)."""
    walk_seeds = derive_array(master_seed, np.arange(replicas, dtype=np.uint64))
    pos = np.full(replicas, start, dtype=np.int64)
    T = np.full(replicas, horizon, dtype=np.int64)
    active = np.ones(replicas, dtype=bool)
    bar = _NO_BARRIER if barrier is None else barrier
    lo, om = env.lo, env.omega
    t = 0
    while t < horizon and active.any():
        if pos[active].min() - 1 < lo:
            env = env.extended(lo=lo - max(64, env.hi - env.lo))
            lo, om = env.lo, env.omega
        idx = np.nonzero(active)[0]
        u = uniform_array(walk_seeds[idx], t)
        cur = pos[idx]
        move = np.where((u < om[cur - lo]) | (cur == bar), 1, -1)
        cur = cur + move
        pos[idx] = cur
        t += 1
        hit = cur == target
        if hit.any():
            hit_idx = idx[hit]
            T[hit_idx] = t
            active[hit_idx] = False
    return T, active.copy()


def reflected_times_fixed_env(
    env: EnvironmentWindow,
    target: int,
    n: int,
    horizon: int,
    master_seed: int,
    replicas: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Batch version of simulate_reflected in one environment.

    Returns (T_bar, T, coupled_equal, censored_either); bit-identical to the
    scalar loop replica by replica.
    """
    b = reflection_blocks(n)
    ladder = _ladder_covering(env, target)
    nu = ladder.nu
    if env.seed is not None and env.hi < nu[-1]:
        env = env.extended(hi=int(nu[-1]))
    walk_seeds = derive_array(master_seed, np.arange(replicas, dtype=np.uint64))
    pos_bar = np.zeros(replicas, dtype=np.int64)
    pos = np.zeros(replicas, dtype=np.int64)
    kmax = np.zeros(replicas, dtype=np.int64)
    barrier = np.full(replicas, _NO_BARRIER, dtype=np.int64)
    t_bar = np.full(replicas, horizon, dtype=np.int64)
    t_plain = np.full(replicas, horizon, dtype=np.int64)
    done_bar = np.zeros(replicas, dtype=bool)
    done_plain = np.zeros(replicas, dtype=bool)
    coupled = np.ones(replicas, dtype=bool)
    t = 0
    while t < horizon and not (done_bar.all() and done_plain.all()):
        idx = np.nonzero(~(done_bar & done_plain))[0]
        lo_needed = min(int(pos[idx].min()), int(pos_bar[idx].min())) - 1
        if lo_needed < env.lo:
            env = env.extended(lo=env.lo - max(64, env.hi - env.lo))
        lo, om = env.lo, env.omega
        u = uniform_array(walk_seeds[idx], t)

        live_bar = ~done_bar[idx]
        cur_bar = pos_bar[idx]
        on_barrier = cur_bar == barrier[idx]
        move_bar = np.where((u < om[cur_bar - lo]) | on_barrier, 1, -1)
        new_bar = np.where(live_bar, cur_bar + move_bar, cur_bar)
        coupled[idx[live_bar & on_barrier]] = False
        pos_bar[idx] = new_bar

        live_plain = ~done_plain[idx]
        cur = pos[idx]
        move = np.where(u < om[cur - lo], 1, -1)
        new = np.where(live_plain, cur + move, cur)
        pos[idx] = new

        t += 1
        # advance ladder progress and barriers for the reflected walk
        k = kmax[idx]
        adv = live_bar.copy()
        while True:
            can = adv & (k < ladder.block_count) & (new_bar >= nu[np.minimum(k + 1, ladder.block_count)])
            if not can.any():
                break
            k = k + can.astype(np.int64)
            adv = can
        kmax[idx] = k
        barrier[idx] = np.where(k - b >= 0, nu[np.maximum(k - b, 0)], _NO_BARRIER)

        hit_bar = idx[live_bar & (new_bar == target)]
        t_bar[hit_bar] = t
        done_bar[hit_bar] = True
        hit = idx[live_plain & (new == target)]
        t_plain[hit] = t
        done_plain[hit] = True
    censored = ~(done_bar & done_plain)
    return t_bar, t_plain, coupled, censored


def walk_final_positions(
    dist: EnvDistribution,
    seeds: Sequence[int],
    steps: int,
    record_at: Sequence[int] | None = None,
    lo_margin: int = 128,
) -> np.ndarray:
    """Positions of one walk per seed, each in its own fresh environment,
    after `steps` steps (or at each time in record_at; returns a
    (len(record_at), len(seeds)) matrix then, else a vector).

    Seed s uses env seed derive(derive(s, 0), 0) and walk seed
    derive(derive(s, 0), 1), so running seeds one at a time or all in one
    batch gives identical trajectories.
    """
    record = sorted(set(record_at)) if record_at is not None else [steps]
    if record[-1] != steps:
        raise ValueError("last record time must equal steps")
    walkers = len(seeds)
    roots = np.array([derive(int(s), 0) for s in seeds], dtype=np.uint64)
    env_seeds = derive_array(roots, np.uint64(0))
    walk_seeds = derive_array(roots, np.uint64(1))
    hi0 = max(256, int(steps * 0.35) + 64)
    if walkers == 1:
        # width-1 numpy batches are all overhead; the scalar loop draws the
        # same uniforms by construction, so results are identical
        env = sample_window_P(dist, int(env_seeds[0]), -lo_margin, hi0)
        omega = env.omega
        lo1, hi1 = env.lo, env.hi
        wseed = int(walk_seeds[0])
        pos1 = 0
        out = np.empty((len(record), 1), dtype=np.int64)
        mark = 0
        for t in range(steps):
            if pos1 >= hi1:
                env = env.extended(hi=hi1 * 2)
                omega, hi1 = env.omega, env.hi
            if pos1 - 1 < lo1:
                env = env.extended(lo=lo1 - max(128, (hi1 - lo1) // 4))
                omega, lo1 = env.omega, env.lo
            pos1 += 1 if uniform(wseed, t) < omega[pos1 - lo1] else -1
            if t + 1 == record[mark]:
                out[mark, 0] = pos1
                mark += 1
        return out if record_at is not None else out[0]
    envs = [
        sample_window_P(dist, int(env_seeds[w]), -lo_margin, hi0) for w in range(walkers)
    ]
    om = np.stack([e.omega for e in envs])
    lo = -lo_margin
    hi = hi0
    pos = np.zeros(walkers, dtype=np.int64)
    out = np.empty((len(record), walkers), dtype=np.int64)
    mark = 0
    w_idx = np.arange(walkers)
    for t in range(steps):
        if pos.max() >= hi:
            hi = hi * 2
            envs = [e.extended(hi=hi) for e in envs]
            om = np.stack([e.omega for e in envs])
        if pos.min() - 1 < lo:
            lo = lo - max(128, (hi - lo) // 4)
            envs = [e.extended(lo=lo) for e in envs]
            om = np.stack([e.omega for e in envs])
        u = uniform_array(walk_seeds, t)
        cur_om = om[w_idx, pos - lo]
        pos = pos + np.where(u < cur_om, 1, -1)
        if t + 1 == record[mark]:
            out[mark] = pos
            mark += 1
    return out if record_at is not None else out[0]


def occupation_at_time(
    env: EnvironmentWindow,
    when: int,
    window: tuple[int, int],
    master_seed: int,
    replicas: int,
) -> float:
    """Fraction of `replicas` quenched paths sitting in [window[0], window[1])
    at time `when` (plain walk, no reflection)."""
    walk_seeds = derive_array(master_seed, np.arange(replicas, dtype=np.uint64))
    pos = np.zeros(replicas, dtype=np.int64)
    lo, om = env.lo, env.omega
    for t in range(when):
        if pos.min() - 1 < lo:
            env = env.extended(lo=lo - max(64, env.hi - env.lo))
            lo, om = env.lo, env.omega
        if pos.max() + 1 > env.hi:
            env = env.extended(hi=env.hi + max(64, env.hi - env.lo))
            lo, om = env.lo, env.omega
        u = uniform_array(walk_seeds, t)
        pos = pos + np.where(u < om[pos - lo], 1, -1)
    return float(np.mean((pos >= window[0]) & (pos < window[1])))


def harvest_regenerations(
    dist: EnvDistribution | DistDD,
    ell: Sequence[int] | int,
    count: int,
    seed: int,
    walkers: int = 64,
    max_rounds: int = 40,
) -> RegenerationRecord:
    """`count` confirmed regeneration increments from fresh environments.

    Each walker's first increment is dropped: under the unconditioned path
    law only the increments after the first regeneration follow the
    conditioned (never-backtrack) law that makes the sequence i.i.d.; the
    first has a different distribution.  The provisional last increment is
    dropped too.  Paths grow by doubling until each walker has its share,
    so the look-ahead for confirmation is the entire remaining path.
    """
    if isinstance(dist, DistDD):
        return _harvest_dd(dist, ell, count, seed, walkers, max_rounds)
    per_walker = -(-count // walkers)
    roots = derive_array(seed, np.arange(walkers, dtype=np.uint64))
    env_seeds = derive_array(roots, np.uint64(0))
    walk_seeds = derive_array(roots, np.uint64(1))
    chunk = max(256, 8 * per_walker)
    all_dur: list[np.ndarray] = []
    all_disp: list[np.ndarray] = []
    for w in range(walkers):
        env = sample_window_P(dist, int(env_seeds[w]), -128, max(256, chunk // 2))
        steps = chunk
        for _ in range(max_rounds):
            path = _walk_path_1d(env, int(walk_seeds[w]), steps)
            try:
                rec = extract_regenerations(
                    PathSample(sites=path, steps=steps, seed_tuple=(seed, w)), ell
                )
            except ValueError:
                steps *= 2
                continue
            usable = rec.count - 2  # drop first (different law) and provisional last
            if usable >= per_walker:
                all_dur.append(rec.durations[1 : 1 + per_walker])
                all_disp.append(rec.displacements[1 : 1 + per_walker])
                break
            steps *= 2
        else:
            raise RuntimeError(
                f"walker {w}: confirmation budget exceeded after {max_rounds} doublings"
            )
    durations = np.concatenate(all_dur)[:count]
    displacements = np.concatenate(all_disp)[:count]
    return RegenerationRecord(
        durations=durations,
        displacements=displacements,
        ell_int=np.atleast_1d(np.asarray(ell, dtype=np.int64)),
        provisional_last=False,
    )


def _walk_path_1d(env: EnvironmentWindow, walk_seed: int, steps: int) -> np.ndarray:
    """Full path of one walk; uniforms keyed by (walk_seed, t)."""
    pos = 0
    out = np.empty(steps + 1, dtype=np.int64)
    out[0] = 0
    lo, hi, om = env.lo, env.hi, env.omega
    for t in range(steps):
        if pos - 1 < lo:
            env = env.extended(lo=lo - max(64, hi - lo))
            lo, hi, om = env.lo, env.hi, env.omega
        elif pos + 1 > hi:
            env = env.extended(hi=hi + max(256, hi - lo))
            lo, hi, om = env.lo, env.hi, env.omega
        u = uniform(walk_seed, t)
        pos += 1 if u < om[pos - lo] else -1
        out[t + 1] = pos
    return out


def _harvest_dd(
    dist: DistDD,
    ell: Sequence[int],
    count: int,
    seed: int,
    walkers: int,
    max_rounds: int,
) -> RegenerationRecord:
    per_walker = -(-count // walkers)
    all_dur: list[np.ndarray] = []
    all_disp: list[np.ndarray] = []
    for w in range(walkers):
        walker_seed = derive(seed, w)
        steps = max(512, 16 * per_walker)
        for _ in range(max_rounds):
            path = simulate_walk_dD(dist, walker_seed, steps)
            try:
                rec = extract_regenerations(path, ell)
            except ValueError:
                steps *= 2
                continue
            if rec.count - 2 >= per_walker:
                all_dur.append(rec.durations[1 : 1 + per_walker])
                all_disp.append(rec.displacements[1 : 1 + per_walker])
                break
            steps *= 2
        else:
            raise RuntimeError(f"walker {w}: confirmation budget exceeded")
    durations = np.concatenate(all_dur)[:count]
    displacements = np.concatenate(all_disp, axis=0)[:count]
    return RegenerationRecord(
        durations=durations,
        displacements=displacements,
        ell_int=np.asarray(ell, dtype=np.int64),
        provisional_last=False,
    )
