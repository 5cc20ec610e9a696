"""Environment model: site distributions, sampled windows, ladder structure.

The environment of a one-dimensional walk is the i.i.d. field omega_x of
right-step probabilities.  Everything downstream is driven by a handful of
deterministic functionals of a realized window:

    rho_x   = (1 - omega_x) / omega_x        (odds against moving right)
    Pi_{i,j} = prod_{k=i}^{j} rho_k           (empty product = 1)
    W_j      = sum_{k<=j} Pi_{k,j}            (left series, truncated here)
    V(x)     = signed partial sums of log rho (the potential)

Ladder locations are the strict descending records of V; the block maxima
M_k measure trap depth and carry the heavy tails.  The tail exponent s is
the positive root of E[rho^s] = 1.

Windows are sampled lazily and purely: omega_x is a function of
(seed, law, x) only, so overlapping or extended windows agree bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .rng import derive, uniform_array, zigzag_array

__all__ = [
    "EnvDistribution",
    "EnvironmentWindow",
    "LadderDecomposition",
    "TailExponent",
    "Classification",
    "RejectionBudgetError",
    "WindowError",
    "rho",
    "pi_product",
    "w_sum",
    "potential",
    "ladder_decompose",
    "solve_s",
    "solomon_classify",
    "sample_window_P",
    "sample_window_Q",
    "window_from_values",
    "two_point_family",
    "homogeneous_family",
    "alpha_for_s",
]

_WEIGHT_TOL = 1e-12
# Partial log-products within +/- this of 0 are treated as "product equals 1"
# (ties must not count as strict descents; exact for the dyadic families).
_TIE_GUARD = 1e-12

_TAG_SITES = 1
_TAG_QLEFT = 2
_TAG_QDEEP = 3


class WindowError(Exception):
    """A window does not cover the sites an operation needs."""


class RejectionBudgetError(Exception):
    """Conditioned sampling exhausted its attempt budget."""

    def __init__(self, attempts: int):
        super().__init__(f"rejection budget exceeded after {attempts} attempts")
        self.attempts = attempts


def rho(omega: float) -> float:
    """Odds ratio (1 - omega) / omega for a single site probability."""
    if not 0.0 < omega < 1.0:
        raise ValueError(f"omega must lie in (0,1), got {omega}")
    return (1.0 - omega) / omega


@dataclass(frozen=True)
class EnvDistribution:
    """Finite discrete law of a site probability omega, with ellipticity bound.

    atoms: tuple of (omega, weight) pairs; weights sum to 1 within 1e-12.
    kappa: uniform ellipticity bound; every omega lies in [kappa, 1-kappa].
    """

    atoms: tuple[tuple[float, float], ...]
    kappa: float

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("at least one atom required")
        if not 0.0 < self.kappa <= 0.5:
            raise ValueError(f"kappa must lie in (0, 1/2], got {self.kappa}")
        total = math.fsum(w for _, w in self.atoms)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {total}, not 1 within {_WEIGHT_TOL}")
        for om, w in self.atoms:
            if w <= 0.0:
                raise ValueError(f"weights must be positive, got {w}")
            if not self.kappa <= om <= 1.0 - self.kappa:
                raise ValueError(f"atom omega={om} violates ellipticity kappa={self.kappa}")
        object.__setattr__(self, "atoms", tuple((float(o), float(w)) for o, w in self.atoms))
        object.__setattr__(self, "kappa", float(self.kappa))

    @cached_property
    def omegas(self) -> np.ndarray:
        return np.array([o for o, _ in self.atoms])

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    @cached_property
    def cum_weights(self) -> np.ndarray:
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c

    @cached_property
    def rhos(self) -> np.ndarray:
        return (1.0 - self.omegas) / self.omegas

    def rho_moment(self, gamma: float) -> float:
        """E[rho^gamma], exactly evaluable for a finite atom set."""
        return float(math.fsum(w * r**gamma for r, w in zip(self.rhos, self.weights)))

    def mean_rho(self) -> float:
        return self.rho_moment(1.0)

    def mean_log_rho(self) -> float:
        return float(math.fsum(w * math.log(r) for r, w in zip(self.rhos, self.weights)))

    def to_json(self) -> str:
        return json.dumps(
            {"atoms": [{"omega": o, "weight": w} for o, w in self.atoms], "kappa": self.kappa}
        )

    @classmethod
    def from_json(cls, text: str) -> "EnvDistribution":
        data = json.loads(text) if isinstance(text, str) else text
        atoms = tuple((a["omega"], a["weight"]) for a in data["atoms"])
        return cls(atoms=atoms, kappa=data["kappa"])


def two_point_family(alpha: float) -> EnvDistribution:
    """The rho in {2, 1/2} family: P(omega=1/3) = alpha, P(omega=2/3) = 1-alpha.

    Tail exponent in closed form: s = log2((1-alpha)/alpha).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    return EnvDistribution(atoms=((1 / 3, alpha), (2 / 3, 1.0 - alpha)), kappa=1 / 3)


def alpha_for_s(s: float) -> float:
    """Inverse of s = log2((1-alpha)/alpha) for the two-point family."""
    return 1.0 / (1.0 + 2.0**s)


def homogeneous_family(p: float) -> EnvDistribution:
    """Degenerate one-atom law omega = p (classical biased walk)."""
    return EnvDistribution(atoms=((p, 1.0),), kappa=min(p, 1.0 - p))


@dataclass(frozen=True, eq=False)
class EnvironmentWindow:
    """Realized omega values on [lo, hi], immutable, reproducible from the seed.

    law is "P" for unconditioned sampling or "Q" for the left-conditioned
    approximation (sites in [-left_depth, -1] rejected until every partial
    product Pi_{-k,-1} is below 1).  Hand-built windows carry seed=None and
    cannot be extended.
    """

    lo: int
    hi: int
    seed: int | None
    dist: EnvDistribution | None
    omega: np.ndarray
    law: str = "P"
    left_depth: int = 0

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("hi must be >= lo")
        om = np.asarray(self.omega, dtype=np.float64)
        if om.shape != (self.hi - self.lo + 1,):
            raise ValueError("omega array does not match [lo, hi]")
        om = om.copy()
        om.setflags(write=False)
        object.__setattr__(self, "omega", om)

    @cached_property
    def rhos(self) -> np.ndarray:
        r = (1.0 - self.omega) / self.omega
        r.setflags(write=False)
        return r

    @cached_property
    def log_rhos(self) -> np.ndarray:
        lr = np.log(self.rhos)
        lr.setflags(write=False)
        return lr

    def index(self, x: int) -> int:
        if not self.lo <= x <= self.hi:
            raise WindowError(f"site {x} outside window [{self.lo}, {self.hi}]")
        return x - self.lo

    def covers(self, i: int, j: int) -> bool:
        return self.lo <= i and j <= self.hi

    def omega_at(self, x: int) -> float:
        return float(self.omega[self.index(x)])

    def rho_at(self, x: int) -> float:
        return float(self.rhos[self.index(x)])

    def rho_slice(self, i: int, j: int) -> np.ndarray:
        """rho values for sites i..j inclusive (empty when i > j)."""
        if i > j:
            return np.empty(0)
        return self.rhos[self.index(i) : self.index(j) + 1]

    def extended(self, lo: int | None = None, hi: int | None = None) -> "EnvironmentWindow":
        """Re-sample a wider window from the same seed; existing sites unchanged."""
        new_lo = self.lo if lo is None else min(lo, self.lo)
        new_hi = self.hi if hi is None else max(hi, self.hi)
        if new_lo == self.lo and new_hi == self.hi:
            return self
        if self.seed is None:
            raise WindowError("hand-built window cannot be extended")
        if self.law == "P":
            return sample_window_P(self.dist, self.seed, new_lo, new_hi)
        base = sample_window_Q(self.dist, self.seed, self.left_depth, new_hi)
        if new_lo >= -self.left_depth:
            return base
        # below the conditioned depth the truncated Q approximation reverts
        # to unconditioned sites, keyed per absolute index like any window
        deep = _draw_sites(self.dist, derive(self.seed, _TAG_QDEEP), new_lo, -self.left_depth - 1)
        return EnvironmentWindow(
            lo=new_lo,
            hi=new_hi,
            seed=self.seed,
            dist=self.dist,
            omega=np.concatenate([deep, base.omega]),
            law="Q",
            left_depth=self.left_depth,
        )


def window_from_values(
    omega_values: Sequence[float], lo: int = 0, dist: EnvDistribution | None = None
) -> EnvironmentWindow:
    """Hand-built window for worked examples and tests; not extendable."""
    om = np.asarray(list(omega_values), dtype=np.float64)
    return EnvironmentWindow(lo=lo, hi=lo + len(om) - 1, seed=None, dist=dist, omega=om)


def _omega_from_uniforms(dist: EnvDistribution, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(dist.cum_weights, u, side="right")
    idx = np.minimum(idx, len(dist.atoms) - 1)
    return dist.omegas[idx]


def _draw_sites(dist: EnvDistribution, site_seed: int, lo: int, hi: int) -> np.ndarray:
    sites = np.arange(lo, hi + 1, dtype=np.int64)
    u = uniform_array(site_seed, zigzag_array(sites))
    return _omega_from_uniforms(dist, u)


def sample_window_P(dist: EnvDistribution, seed: int, lo: int, hi: int) -> EnvironmentWindow:
    """i.i.d. window under the unconditioned law; omega_x pure in (seed, x)."""
    if hi < lo:
        raise ValueError("hi must be >= lo")
    om = _draw_sites(dist, derive(seed, _TAG_SITES), lo, hi)
    return EnvironmentWindow(lo=lo, hi=hi, seed=seed, dist=dist, omega=om, law="P")


def left_condition_holds(log_rhos_left: np.ndarray) -> bool:
    """True iff every partial product Pi_{-k,-1} over the supplied left block
    (site order -D..-1) is strictly below 1, with ties counted as 1."""
    partial = np.cumsum(log_rhos_left[::-1])
    return bool(np.all(partial < -_TIE_GUARD))


def sample_window_Q(
    dist: EnvDistribution,
    seed: int,
    left_depth: int,
    hi: int,
    max_attempts: int = 256,
) -> EnvironmentWindow:
    """Depth-truncated approximation of the left-conditioned law.

    Sites >= 0 are drawn exactly as under sample_window_P with the same seed
    (the conditioning never touches them).  Sites in [-left_depth, -1] are
    drawn by rejection until Pi_{-k,-1} < 1 for every k <= left_depth.  The
    full conditioning quantifies over all k >= 1; the truncation to
    left_depth is the documented approximation, so left_depth should be
    recorded with any result that depends on the left tail.
    """
    if left_depth < 1:
        raise ValueError("left_depth must be >= 1")
    if dist.mean_log_rho() >= 0:
        raise ValueError("Q sampling requires E[log rho] < 0")
    right = _draw_sites(dist, derive(seed, _TAG_SITES), 0, hi) if hi >= 0 else None
    attempt_root = derive(seed, _TAG_QLEFT)
    for attempt in range(max_attempts):
        left_seed = derive(attempt_root, attempt)
        om_left = _draw_sites(dist, left_seed, -left_depth, -1)
        lr = np.log((1.0 - om_left) / om_left)
        if left_condition_holds(lr):
            om = om_left if right is None else np.concatenate([om_left, right])
            return EnvironmentWindow(
                lo=-left_depth,
                hi=hi,
                seed=seed,
                dist=dist,
                omega=om,
                law="Q",
                left_depth=left_depth,
            )
    raise RejectionBudgetError(max_attempts)


def pi_product(env: EnvironmentWindow, i: int, j: int) -> float:
    """Pi_{i,j} = prod of rho over sites i..j; 1 for an empty range (i > j)."""
    if i > j:
        return 1.0
    env.index(i), env.index(j)
    return float(np.prod(env.rho_slice(i, j)))


def w_sum(env: EnvironmentWindow, j: int, depth: int) -> float:
    """Truncated left series W_j = sum_{k=j-depth+1}^{j} Pi_{k,j}.

    Equivalent to the full W_j of the reflected walk whose barrier sits at
    site j-depth (the barrier site's rho is 0, ending the series).
    Non-decreasing in depth.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    env.index(j - depth + 1), env.index(j)
    rhos = env.rho_slice(j - depth + 1, j)
    w = 0.0
    for r in rhos:
        w = r * (1.0 + w)
    return float(w)


def truncated_w_series(rhos: np.ndarray) -> np.ndarray:
    """W values at each site of a contiguous range whose left barrier sits
    just before rhos[0]: out[m] = sum_{k<=m} Pi_{k,m} over the range only."""
    out = np.empty(len(rhos))
    w = 0.0
    for m, r in enumerate(rhos):
        w = r * (1.0 + w)
        out[m] = w
    return out


def potential(env: EnvironmentWindow, x: int) -> float:
    """V(x): sum of log rho over [0, x-1] for x >= 1, 0 at x=0,
    minus the sum over [x, -1] for x <= -1."""
    if x == 0:
        return 0.0
    if x >= 1:
        env.index(0), env.index(x - 1)
        return float(math.fsum(env.log_rhos[env.index(0) : env.index(x - 1) + 1]))
    env.index(x), env.index(-1)
    return -float(math.fsum(env.log_rhos[env.index(x) : env.index(-1) + 1]))


@dataclass(frozen=True)
class LadderDecomposition:
    """Ladder locations nu_0 < nu_1 < ... and per-block maxima M_k.

    nu has block_count+1 entries; M[k-1] is the max of Pi_{nu_{k-1}, j} over
    j in [nu_{k-1}, nu_k).  Blocks between ladder points are the i.i.d.
    units of the conditioned environment law.
    """

    nu: np.ndarray
    M: np.ndarray
    block_count: int

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=np.int64)
        M = np.asarray(self.M, dtype=np.float64)
        if len(nu) != self.block_count + 1 or len(M) != self.block_count:
            raise ValueError("ladder arrays inconsistent with block_count")
        if np.any(np.diff(nu) <= 0):
            raise ValueError("ladder locations must be strictly increasing")
        nu.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "M", M)

    def block_span(self, i: int) -> tuple[int, int]:
        """(nu_{i-1}, nu_i) for block i in [1, block_count]."""
        if not 1 <= i <= self.block_count:
            raise IndexError(f"block index {i} outside [1, {self.block_count}]")
        return int(self.nu[i - 1]), int(self.nu[i])


def ladder_decompose(
    env: EnvironmentWindow, from_site: int = 0, block_count: int = 1
) -> LadderDecomposition:
    """Scan right from from_site for block_count ladder locations.

    nu_{i} is the first n > nu_{i-1} with Pi_{nu_{i-1}, n-1} < 1; the running
    in-block product also yields M_k exactly (products within a block stay in
    [kappa/(1-kappa), M_k], so no under/overflow).  Seeded windows are grown
    on demand internally; since sampling is pure, a caller that needs sites
    up to nu[-1] can extend its own window and will see identical values.
    Ties Pi = 1 are not descents.
    """
    if block_count < 1:
        raise ValueError("block_count must be >= 1")
    env.index(from_site)
    nu = [from_site]
    maxima: list[float] = []
    p = 1.0
    best = -math.inf
    j = from_site
    while len(maxima) < block_count:
        if j > env.hi:
            if env.seed is None:
                raise WindowError(
                    f"window exhausted at {env.hi} after {len(maxima)} of {block_count} blocks"
                )
            grow = max(2 * (env.hi - env.lo + 1), 1024)
            env = env.extended(hi=env.hi + grow)
        r = float(env.rhos[j - env.lo])
        p *= r
        if p > best:
            best = p
        if p < 1.0:
            nu.append(j + 1)
            maxima.append(best)
            p = 1.0
            best = -math.inf
        j += 1
    return LadderDecomposition(
        nu=np.array(nu, dtype=np.int64), M=np.array(maxima), block_count=block_count
    )


@dataclass(frozen=True)
class TailExponent:
    """Root s of E[rho^s] = 1 with a sign-certifying bracket.

    s is math.inf when no atom has rho > 1 (the moment never returns to 1).
    """

    s: float
    bracket: tuple[float, float]
    tol: float


def solve_s(dist: EnvDistribution, tol: float = 1e-10) -> TailExponent:
    """Bisection for the positive root of gamma -> E[rho^gamma] - 1.

    The function is convex, 0 at gamma=0, with negative slope there exactly
    when E[log rho] < 0; the upper end of the bracket is found by doubling.
    """
    if dist.mean_log_rho() >= 0:
        raise ValueError("tail exponent defined only for E[log rho] < 0")
    if float(np.max(dist.rhos)) <= 1.0:
        return TailExponent(s=math.inf, bracket=(math.inf, math.inf), tol=tol)

    def f(gamma: float) -> float:
        return dist.rho_moment(gamma) - 1.0

    hi = 1.0
    doublings = 0
    while f(hi) < 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 200:
            raise ArithmeticError("bracket doubling failed to find a sign change")
    lo = hi / 2.0
    while f(lo) >= 0.0:
        lo /= 2.0
        if lo < 1e-300:
            raise ArithmeticError("no negative region found; degenerate distribution")
    s = float(optimize.bisect(f, lo, hi, xtol=tol))
    b_lo, b_hi = s - tol, s + tol
    while f(b_lo) >= 0.0:
        b_lo -= tol
    while f(b_hi) <= 0.0:
        b_hi += tol
    return TailExponent(s=s, bracket=(b_lo, b_hi), tol=tol)


class Classification(NamedTuple):
    regime: str
    speed: float


def solomon_classify(dist: EnvDistribution) -> Classification:
    """Transience/recurrence by the sign of E[log rho], with the exact speed.

    Rightward speed is (1 - E[rho]) / (1 + E[rho]) when E[rho] < 1 and 0
    otherwise; the leftward case is the mirror image in 1/rho.
    """
    drift = dist.mean_log_rho()
    if drift == 0.0:
        return Classification("recurrent", 0.0)
    if drift < 0.0:
        m = dist.mean_rho()
        speed = (1.0 - m) / (1.0 + m) if m < 1.0 else 0.0
        return Classification("transient-right", speed)
    m_inv = dist.rho_moment(-1.0)
    speed = -(1.0 - m_inv) / (1.0 + m_inv) if m_inv < 1.0 else 0.0
    return Classification("transient-left", speed)
