"""Exact quenched statistics: hitting probabilities, crossing moments, centering.

All quantities here are deterministic functionals of a realized environment
window, no Monte Carlo.  Crossing times of distinct unit steps are
independent under the quenched law, so means and variances add across
crossings; each per-crossing term is a finite truncated series in the
rho-products, evaluated by the stable left-to-right recursions

    W(x) = rho_x * (1 + W(x-1))                W(barrier) = 0
    S(x) = rho_x * (S(x-1) + A(x-1)),          A = W + W^2,  S(barrier) = 0

with per-crossing mean 1 + 2 W(x) and variance 4 A(x) + 8 S(x).  A barrier
site behaves as omega = 1 (rho = 0), which simply zeroes the recursions.

Two reflection conventions coexist, deliberately:
  * quenched_mean_T / quenched_var_T truncate at a fixed site -depth
    (site-count reflection);
  * block_moments truncates at the ladder point b(n) = floor(ln(n)^2)
    blocks back (block-count reflection).
Results record which rule produced them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .environment import (
    EnvDistribution,
    EnvironmentWindow,
    LadderDecomposition,
    WindowError,
    w_sum,
)

__all__ = [
    "BlockMoments",
    "CenteringSeries",
    "InsufficientLadderError",
    "hitting_prob",
    "quenched_mean_T",
    "quenched_mean_T_marks",
    "quenched_var_T",
    "truncation_bound",
    "reflection_blocks",
    "block_moments",
    "block_moments_range",
    "reflected_mean_total",
    "write_block_csv",
    "centering_Z",
    "annealed_mean_crossing",
    "annealed_sq_crossing",
    "clt_sigma2",
]


class InsufficientLadderError(Exception):
    """block_moments needs ladder blocks [i - b(n), i] to exist."""


def _cross_products(rhos: np.ndarray) -> np.ndarray:
    """Cumulative products Pi_{i, i+k}; falls back to log space when they
    leave float range (downstream ratios are invariant under the shift)."""
    with np.errstate(over="ignore"):
        prods = np.cumprod(rhos)
    if len(prods) == 0 or (np.all(np.isfinite(prods)) and prods.max() < 1e250):
        return prods
    lp = np.cumsum(np.log(rhos))
    return np.exp(lp - lp.max())


def hitting_prob(env: EnvironmentWindow, i: int, x: int, j: int) -> tuple[float, float]:
    """(P^x(T_j < T_i), P^x(T_i < T_j)) for the walk started at x in [i, j].

    Both are ratios of R-sums sharing the denominator R_{i,j-1}; the
    numerators are the head and tail of one cumulative-product sum, so the
    pair sums to 1 up to a single rounding.
    """
    if not i <= x <= j:
        raise ValueError(f"need i <= x <= j, got {(i, x, j)}")
    if i == j:
        raise ValueError("degenerate interval: i == j")
    env.index(i), env.index(j)
    prods = _cross_products(env.rho_slice(i, j - 1))
    denom = math.fsum(prods)
    head = math.fsum(prods[: x - i])
    tail = math.fsum(prods[x - i :])
    return head / denom, tail / denom


def _crossing_terms(rhos: Sequence[float], skip: int) -> tuple[list[float], list[float]]:
    """Run the W/S recursions over a contiguous range whose barrier sits just
    left of rhos[0]; emit per-crossing mean and variance terms from index
    `skip` on."""
    means: list[float] = []
    variances: list[float] = []
    w = 0.0
    s = 0.0
    a = 0.0
    for idx, r in enumerate(rhos):
        s = r * (s + a)
        w = r * (1.0 + w)
        a = w + w * w
        if idx >= skip:
            means.append(1.0 + 2.0 * w)
            variances.append(4.0 * a + 8.0 * s)
    return means, variances


def _site_truncated_terms(
    env: EnvironmentWindow, n: int, reflection_depth: int
) -> tuple[list[float], list[float]]:
    """Per-crossing terms for x = 0..n-1 with the barrier at site
    -reflection_depth (at 0 itself when the depth is 0)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if reflection_depth < 0:
        raise ValueError("reflection_depth must be >= 0")
    barrier = -reflection_depth
    if barrier + 1 <= n - 1:
        env.index(barrier + 1)
        env.index(n - 1)
    rhos = env.rho_slice(barrier + 1, n - 1)
    if reflection_depth >= 1:
        means, variances = _crossing_terms(rhos, skip=reflection_depth - 1)
    else:
        # barrier at 0: that crossing is deterministic
        means, variances = _crossing_terms(rhos, skip=0)
        means.insert(0, 1.0)
        variances.insert(0, 0.0)
    if len(means) != n:
        raise AssertionError("crossing-term bookkeeping error")
    return means, variances


def quenched_mean_T(env: EnvironmentWindow, n: int, reflection_depth: int) -> float:
    """Expected hitting time of n from 0 with W truncated at site
    -reflection_depth; compensated summation of 1 + 2 W(x) over crossings."""
    means, _ = _site_truncated_terms(env, n, reflection_depth)
    return math.fsum(means)


def quenched_var_T(env: EnvironmentWindow, n: int, reflection_depth: int) -> float:
    """Variance of the hitting time of n from 0 under the same truncation;
    non-negative sum of independent per-crossing variances."""
    _, variances = _site_truncated_terms(env, n, reflection_depth)
    return math.fsum(variances)


def quenched_mean_T_marks(
    env: EnvironmentWindow, marks: Sequence[int], reflection_depth: int
) -> list[float]:
    """Truncated E_omega T_m for every m in the ascending positive `marks`,
    from a single pass of the crossing recursion."""
    marks = list(marks)
    if any(m <= 0 for m in marks) or any(a >= b for a, b in zip(marks, marks[1:])):
        raise ValueError("marks must be positive and strictly increasing")
    means, _ = _site_truncated_terms(env, marks[-1], reflection_depth)
    partial = np.cumsum(means)
    return [float(partial[m - 1]) for m in marks]


def truncation_bound(env: EnvironmentWindow, n: int, reflection_depth: int) -> float:
    """Upper bound on the mean mass dropped by truncating at -depth:
    2 (1 + W_est) Pi_{-depth,-1} R_{0,n-1}.

    W_est uses any window left of the barrier when available, otherwise the
    stationary mean E rho / (1 - E rho) (infinite when E rho >= 1, in which
    case the bound is honestly infinite).
    """
    barrier = -reflection_depth
    if reflection_depth < 1:
        raise ValueError("bound defined for reflection_depth >= 1")
    extra = barrier - env.lo
    if extra >= 1:
        w_est = w_sum(env, barrier - 1, extra)
    elif env.dist is not None and env.dist.mean_rho() < 1.0:
        m = env.dist.mean_rho()
        w_est = m / (1.0 - m)
    else:
        return math.inf
    pi_left = float(np.prod(env.rho_slice(barrier, -1)))
    r_right = math.fsum(_cross_products(env.rho_slice(0, n - 1)))
    return 2.0 * (1.0 + w_est) * pi_left * r_right


def reflection_blocks(n: int) -> int:
    """Reflection depth in ladder blocks, floor((ln n)^2), clamped to >= 1.

    The clamp keeps the crossing-mean lower bound mu >= M_i valid: a barrier
    at nu_{i-1} itself would drop the in-block product term entirely.
    """
    if n < 1:
        raise ValueError("scale n must be >= 1")
    return max(1, int(math.floor(math.log(n) ** 2)))


@dataclass(frozen=True)
class BlockMoments:
    """Reflected crossing moments of one ladder block.

    mu and sigma2 are the quenched mean and variance of the crossing
    nu_{i-1} -> nu_i for the walk reflected at nu_{i-1-b} (omega there 1),
    b = reflection_depth blocks.  Lower bounds mu >= M and sigma2 >= M^2
    hold for every b >= 1; both grow with b toward the unreflected values.
    """

    index: int
    nu_left: int
    nu_right: int
    M: float
    mu: float
    sigma2: float
    reflection_depth: int
    scale_n: int


def block_moments(
    env: EnvironmentWindow, ladder: LadderDecomposition, i: int, n: int
) -> BlockMoments:
    """Exact mu_{i,n} and sigma2_{i,n} for ladder block i at scale n.

    The barrier is the ladder location b(n) blocks back and stays fixed for
    the whole crossing (it moves only when the next ladder point is hit).
    Requires ladder context: block index i must exceed b(n).
    """
    if not 1 <= i <= ladder.block_count:
        raise IndexError(f"block index {i} outside [1, {ladder.block_count}]")
    b = reflection_blocks(n)
    if i - 1 - b < 0:
        raise InsufficientLadderError(
            f"block {i} at scale n={n} needs ladder block {i - 1 - b}; "
            "scan blocks with index > b(n) or extend the ladder"
        )
    barrier = int(ladder.nu[i - 1 - b])
    left, right = ladder.block_span(i)
    if not env.covers(barrier + 1, right - 1):
        raise WindowError(
            f"window [{env.lo}, {env.hi}] does not cover crossing range "
            f"[{barrier + 1}, {right - 1}]"
        )
    rhos = env.rho_slice(barrier + 1, right - 1)
    means, variances = _crossing_terms(rhos, skip=left - barrier - 1)
    mu = math.fsum(means)
    sigma2 = math.fsum(variances)
    return BlockMoments(
        index=i,
        nu_left=left,
        nu_right=right,
        M=float(ladder.M[i - 1]),
        mu=mu,
        sigma2=sigma2,
        reflection_depth=b,
        scale_n=n,
    )


def block_moments_range(
    env: EnvironmentWindow,
    ladder: LadderDecomposition,
    i_from: int,
    i_to: int,
    n: int,
) -> list[BlockMoments]:
    """block_moments for every block index in [i_from, i_to]."""
    return [block_moments(env, ladder, i, n) for i in range(i_from, i_to + 1)]


def reflected_mean_total(
    env: EnvironmentWindow,
    ladder: LadderDecomposition,
    from_block: int,
    upto_block: int,
    n: int,
) -> float:
    """Expected total time of the block-reflected walk from nu_{from_block}
    to nu_{upto_block}, accumulated site-by-site in one global compensated
    sum (the barrier in force at site x is that of the block containing x).

    Equals the sum of the per-block mu values exactly; kept as a distinct
    accumulation order for cross-checking.  from_block must exceed b(n) so
    that every block has its ladder context.
    """
    b = reflection_blocks(n)
    if not 0 <= from_block < upto_block <= ladder.block_count:
        raise IndexError("need 0 <= from_block < upto_block <= block_count")
    if from_block - b < 0:
        raise InsufficientLadderError(
            f"from_block={from_block} lacks context at scale n={n} (b={b})"
        )
    terms: list[float] = []
    for i in range(from_block + 1, upto_block + 1):
        barrier = int(ladder.nu[i - 1 - b])
        left, right = ladder.block_span(i)
        rhos = env.rho_slice(barrier + 1, right - 1)
        means, _ = _crossing_terms(rhos, skip=left - barrier - 1)
        terms.extend(means)
    return math.fsum(terms)


_BLOCK_CSV_COLUMNS = ["blockIndex", "nuLeft", "nuRight", "M", "mu", "sigma2", "reflectionDepth"]


def write_block_csv(path: str, moments: Iterable[BlockMoments], header_comment: str | None = None) -> None:
    """Block-moment table as CSV with the fixed column set."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(_BLOCK_CSV_COLUMNS)
        for bm in moments:
            writer.writerow(
                [
                    bm.index,
                    bm.nu_left,
                    bm.nu_right,
                    repr(bm.M),
                    repr(bm.mu),
                    repr(bm.sigma2),
                    bm.reflection_depth,
                ]
            )


@dataclass(frozen=True)
class CenteringSeries:
    """Environment centering Z on a grid of scaled times.

    values[k] = Z at j = floor(n * t_grid[k] * vP), where
    Z_j = sum_{j'=1}^{j} (vP * Sbar(shifted env at j') - 1) and
    Sbar = 1 + 2 W is the one-crossing quenched mean.  Z(0) = 0.
    """

    t_grid: np.ndarray
    values: np.ndarray
    vP: float


def centering_Z(
    env: EnvironmentWindow,
    n: int,
    vP: float,
    t_grid: Sequence[float],
    depth: int | None = None,
) -> CenteringSeries:
    """Partial sums of the centered crossing means with truncated W.

    The W recursion starts at the window's left edge by default (depth
    None); a homogeneous environment with vP = (1-rho)/(1+rho) gives terms
    that vanish at the deep-truncation fixed point, so Z stays ~0.
    """
    if vP <= 0:
        raise ValueError("vP must be positive")
    t = np.asarray(sorted(t_grid), dtype=np.float64)
    if len(t) == 0 or t[0] < 0:
        raise ValueError("t_grid must be non-empty and non-negative")
    j_marks = np.floor(n * t * vP).astype(np.int64)
    j_max = int(j_marks.max())
    start = env.lo if depth is None else 1 - depth
    if start < env.lo:
        raise WindowError("requested depth exceeds window")
    if j_max >= 1:
        env.index(j_max)
    rhos = env.rho_slice(start, j_max)
    # Kahan running sum with snapshots at the marked j values
    marks = {}
    total = 0.0
    comp = 0.0
    w = 0.0
    site = start
    for r in rhos:
        w = r * (1.0 + w)
        if site >= 1:
            term = vP * (1.0 + 2.0 * w) - 1.0
            y = term - comp
            t_new = total + y
            comp = (t_new - total) - y
            total = t_new
            marks[site] = total
        site += 1
    values = np.array([0.0 if j < 1 else marks[int(j)] for j in j_marks])
    return CenteringSeries(t_grid=t, values=values, vP=vP)


def annealed_mean_crossing(dist: EnvDistribution) -> float:
    """E over environments of the one-crossing quenched mean 1 + 2 W
    (finite iff E rho < 1): 1 + 2 E rho / (1 - E rho)."""
    m = dist.mean_rho()
    if m >= 1.0:
        return math.inf
    return 1.0 + 2.0 * m / (1.0 - m)


def annealed_sq_crossing(dist: EnvDistribution) -> float:
    """E over environments of the quenched second moment of one crossing.

    Uses independence of the left product and the shifted crossing mean:
    E[tau^2] = 2 E[Sbar^2] - E[Sbar] + 2 (m/(1-m)) E[Sbar^2], with
    E[W], E[W^2] from the stationarity recursion W = rho (1 + W') and
    m = E rho, q = E rho^2 (finite iff q < 1)."""
    m = dist.mean_rho()
    q = dist.rho_moment(2.0)
    if q >= 1.0:
        return math.inf
    ew = m / (1.0 - m)
    ew2 = q * (1.0 + 2.0 * ew) / (1.0 - q)
    es = 1.0 + 2.0 * ew
    es2 = 1.0 + 4.0 * ew + 4.0 * ew2
    return 2.0 * es2 - es + 2.0 * (m / (1.0 - m)) * es2


def clt_sigma2(dist: EnvDistribution) -> float:
    """Annealed crossing-time variance parameter: E[tau^2] - E[Sbar^2]."""
    m = dist.mean_rho()
    q = dist.rho_moment(2.0)
    if q >= 1.0:
        return math.inf
    ew = m / (1.0 - m)
    ew2 = q * (1.0 + 2.0 * ew) / (1.0 - q)
    es2 = 1.0 + 4.0 * ew + 4.0 * ew2
    return annealed_sq_crossing(dist) - es2
