"""Large-deviation machinery: empirical log-MGF of regeneration increments,
Fenchel-Legendre conjugation, the projected rate function Jbar, and the
closed-form homogeneous-floor quantities (lambda_bar, phi, psi, r).

The empirical log-MGF keeps its sample as aggregated (unique increment,
count) pairs, so it can be re-evaluated exactly at any lambda during
refinement instead of interpolating a noisy grid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .walks import RegenerationRecord

__all__ = [
    "LogMgfGrid",
    "ConjugateResult",
    "JbarResult",
    "RateFunctionTable",
    "lambda_grid_2d",
    "estimate_log_mgf",
    "legendre_conjugate",
    "jbar",
    "make_rate_table",
    "write_rate_table_csv",
    "lambda_bar",
    "mgf_phi",
    "conditioned_mgf_psi",
    "rate_r",
]

_TOP_FRACTION = 0.01
_TOP_MASS_LIMIT = 0.5
_EXP_OVERFLOW = 700.0


@dataclass(frozen=True)
class LogMgfGrid:
    """Empirical log-MGF Lambda_bar on a grid of (lambda_x, lambda_t) pairs.

    stable[i] is False when the top 1% of summands carried more than half
    the exponential mass at grid point i (the estimate is then dominated by
    a few increments); overflow[i] marks exponents past the float range
    (the value is still exact via the log-sum-exp shift, but the true
    annealed MGF is far outside the reliable region there).
    """

    lambda_grid: np.ndarray
    values: np.ndarray
    sample_count: int
    stable: np.ndarray
    overflow: np.ndarray
    support_x: np.ndarray
    support_t: np.ndarray
    log_counts: np.ndarray

    def __post_init__(self):
        for name in (
            "lambda_grid",
            "values",
            "stable",
            "overflow",
            "support_x",
            "support_t",
            "log_counts",
        ):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        zero = np.all(self.lambda_grid == 0.0, axis=1)
        if zero.any() and not np.all(self.values[zero] == 0.0):
            raise ValueError("Lambda_bar(0) must be exactly 0")

    def value_at(self, lam: Sequence[float]) -> float:
        """Exact empirical Lambda_bar at lam, skipping the diagnostics."""
        lx, lt = float(lam[0]), float(lam[1])
        if lx == 0.0 and lt == 0.0:
            return 0.0
        e = lx * self.support_x + lt * self.support_t + self.log_counts
        m = float(np.max(e))
        return m + math.log(float(np.exp(e - m).sum())) - math.log(self.sample_count)

    def evaluate(self, lam: Sequence[float]) -> tuple[float, bool, bool]:
        """Exact empirical Lambda_bar at lam, with (stable, overflow) flags.

        Stability ranks individual samples by their exponent lam.(x, tau);
        within an increment class every sample has the same weight, so the
        class straddling the 1% quota contributes fractionally.
        """
        lx, lt = float(lam[0]), float(lam[1])
        if lx == 0.0 and lt == 0.0:
            return 0.0, True, False
        eu = lx * self.support_x + lt * self.support_t
        e = eu + self.log_counts
        m = float(np.max(e))
        value = m + math.log(float(np.exp(e - m).sum())) - math.log(self.sample_count)
        m2 = float(np.max(eu))
        order = np.argsort(eu)[::-1]
        wp = np.exp(eu[order] - m2)
        counts = np.exp(self.log_counts[order])
        mass = counts * wp
        total = float(mass.sum())
        quota = _TOP_FRACTION * self.sample_count
        cum = np.cumsum(counts)
        k = int(np.searchsorted(cum, quota, side="left"))
        if k >= len(mass):
            top = total
        else:
            prev = float(cum[k - 1]) if k > 0 else 0.0
            top = float(mass[:k].sum()) + (quota - prev) * float(wp[k])
        top_mass = top / total
        return value, top_mass <= _TOP_MASS_LIMIT, m2 > _EXP_OVERFLOW

    @property
    def tau_max(self) -> float:
        return float(np.max(self.support_t))


def lambda_grid_2d(
    x_range: tuple[float, float], t_range: tuple[float, float], nx: int, nt: int
) -> np.ndarray:
    """Rectangular (lambda_x, lambda_t) grid containing 0 exactly."""
    xs = np.linspace(x_range[0], x_range[1], nx)
    ts = np.linspace(t_range[0], t_range[1], nt)
    if x_range[0] <= 0.0 <= x_range[1]:
        xs[np.argmin(np.abs(xs))] = 0.0
    if t_range[0] <= 0.0 <= t_range[1]:
        ts[np.argmin(np.abs(ts))] = 0.0
    gx, gt = np.meshgrid(xs, ts, indexing="ij")
    return np.column_stack([gx.ravel(), gt.ravel()])


def estimate_log_mgf(record: RegenerationRecord, lambda_grid: np.ndarray) -> LogMgfGrid:
    """Empirical Lambda_bar(lambda) = log mean exp(lambda . (X, tau)) over
    the confirmed increments, at every grid point."""
    if record.provisional_last:
        record = record.confirmed()
    if record.displacements.ndim != 1:
        raise ValueError("only direction-projected (d=1) increments supported")
    pairs = np.column_stack([record.displacements, record.durations])
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 2 or grid.shape[1] != 2:
        raise ValueError("lambda_grid must be (G, 2)")
    proto = LogMgfGrid(
        lambda_grid=grid,
        values=np.zeros(len(grid)),
        sample_count=int(counts.sum()),
        stable=np.ones(len(grid), dtype=bool),
        overflow=np.zeros(len(grid), dtype=bool),
        support_x=uniq[:, 0].astype(float),
        support_t=uniq[:, 1].astype(float),
        log_counts=np.log(counts.astype(float)),
    )
    values = np.empty(len(grid))
    stable = np.empty(len(grid), dtype=bool)
    overflow = np.empty(len(grid), dtype=bool)
    for i, lam in enumerate(grid):
        values[i], stable[i], overflow[i] = proto.evaluate(lam)
    return LogMgfGrid(
        lambda_grid=grid,
        values=values,
        sample_count=proto.sample_count,
        stable=stable,
        overflow=overflow,
        support_x=proto.support_x,
        support_t=proto.support_t,
        log_counts=proto.log_counts,
    )


class _HullTester:
    """Membership test for the convex hull of the empirical increments.

    Outside the hull the empirical conjugate is genuinely +inf (the
    objective grows linearly along some direction), so conjugation first
    asks this and only then maximizes.
    """

    def __init__(self, xs: np.ndarray, ts: np.ndarray):
        self._points = np.column_stack([xs, ts])

    def contains(self, x: float, t: float) -> bool:
        pts = self._points
        a_eq = np.vstack([pts.T, np.ones(len(pts))])
        b_eq = np.array([x, t, 1.0])
        res = linprog(
            np.zeros(len(pts)),
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=(0.0, None),
            method="highs",
        )
        return bool(res.status == 0)


@dataclass(frozen=True)
class ConjugateResult:
    value: float
    lam_star: np.ndarray
    on_boundary: bool
    stable: bool


def _axis_bounds(grid: np.ndarray) -> tuple[tuple[float, float], tuple[float, float]]:
    return (
        (float(grid[:, 0].min()), float(grid[:, 0].max())),
        (float(grid[:, 1].min()), float(grid[:, 1].max())),
    )


def legendre_conjugate(
    grid: LogMgfGrid,
    point: tuple[float, float],
    sweeps: int = 4,
    value_fn=None,
) -> ConjugateResult:
    """Ibar(x, t) = sup over lambda of lambda.(x, t) - Lambda_bar(lambda).

    Grid argmax followed by coordinate-wise bounded scalar maximization of
    the exact re-evaluated objective.  A maximizer pinned to the lambda-grid
    boundary is flagged; the value is then only a lower bound.  Points
    outside the convex hull of the observed increments return +inf.

    value_fn overrides the empirical evaluation with an analytic Lambda_bar
    (for oracle checks); the hull gate is skipped then.
    """
    x, t = float(point[0]), float(point[1])
    synthetic = value_fn is not None
    if not synthetic:
        hull = _HullTester(grid.support_x, grid.support_t)
        if not hull.contains(x, t):
            return ConjugateResult(
                value=math.inf,
                lam_star=np.array([math.nan, math.nan]),
                on_boundary=True,
                stable=True,
            )
        value_fn = grid.value_at
    z = np.array([x, t])
    g = grid.lambda_grid @ z - grid.values
    best = int(np.argmax(g))
    lam = grid.lambda_grid[best].copy()
    (bx, by) = _axis_bounds(grid.lambda_grid)
    bounds = [bx, by]

    def objective(axis: int, value: float) -> float:
        trial = lam.copy()
        trial[axis] = value
        return -(trial @ z - value_fn(trial))

    for _ in range(sweeps):
        for axis in (0, 1):
            lo, hi = bounds[axis]
            res = minimize_scalar(
                lambda v: objective(axis, v),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-12},
            )
            lam[axis] = float(res.x)
    value = float(lam @ z - value_fn(lam))
    spans = [hi - lo for (lo, hi) in bounds]
    on_boundary = any(
        min(lam[a] - bounds[a][0], bounds[a][1] - lam[a]) < 1e-6 * spans[a] for a in (0, 1)
    )
    stable = True if synthetic else grid.evaluate(lam)[1]
    return ConjugateResult(
        value=max(0.0, value), lam_star=lam, on_boundary=on_boundary, stable=stable
    )


@dataclass(frozen=True)
class JbarResult:
    v: float
    value: float
    s_star: float
    lam_star: np.ndarray
    on_boundary: bool


def _golden_min(f, a: float, b: float, iters: int = 70):
    """Golden-section minimum of a unimodal f on [a, b]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def jbar(grid: LogMgfGrid, v: float, s_min: float | None = None) -> JbarResult:
    """Jbar(v) = inf over s in [s_min, 1] of s * Ibar(v/s, 1/s).

    s * Ibar(v/s, 1/s) = sup_lambda [lambda.(v,1) - s Lambda_bar(lambda)] is
    convex in (v, s) jointly, so the s-section is unimodal and a coarse scan
    plus golden-section finds the infimum.  s_min defaults to 1/tau_max of
    the sample; smaller s would need durations never observed.
    """
    if v <= 0.0:
        raise ValueError("v must have positive projection on ell")
    lo = 1.0 / grid.tau_max if s_min is None else s_min
    lo = max(lo, 1e-9)
    if lo > 1.0:
        raise ValueError("s_min exceeds 1")

    cache: dict[float, ConjugateResult] = {}

    def section(s: float) -> float:
        res = cache.get(s)
        if res is None:
            res = legendre_conjugate(grid, (v / s, 1.0 / s))
            cache[s] = res
        return s * res.value if math.isfinite(res.value) else math.inf

    scan = np.linspace(lo, 1.0, 41)
    scan_vals = [section(float(s)) for s in scan]
    k = int(np.argmin(scan_vals))
    if not math.isfinite(scan_vals[k]):
        return JbarResult(
            v=v,
            value=math.inf,
            s_star=math.nan,
            lam_star=np.array([math.nan, math.nan]),
            on_boundary=True,
        )
    a = float(scan[max(k - 1, 0)])
    b = float(scan[min(k + 1, len(scan) - 1)])
    s_star, value = _golden_min(section, a, b)
    if scan_vals[k] < value:
        s_star, value = float(scan[k]), scan_vals[k]
    final = cache.get(s_star) or legendre_conjugate(grid, (v / s_star, 1.0 / s_star))
    return JbarResult(
        v=v,
        value=max(0.0, value),
        s_star=s_star,
        lam_star=final.lam_star,
        on_boundary=final.on_boundary,
    )


@dataclass(frozen=True)
class RateFunctionTable:
    """Jbar on a velocity grid, with the minimizing s and lambda per point.

    labels mark where the value is a proven rate (d=1, v > 0) versus an
    upper-bound candidate only.
    """

    v_grid: np.ndarray
    jbar_values: np.ndarray
    s_star: np.ndarray
    lam_star: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        finite = self.jbar_values[np.isfinite(self.jbar_values)]
        if np.any(finite < -1e-9):
            raise ValueError("Jbar must be nonnegative")
        for name in ("v_grid", "jbar_values", "s_star", "lam_star"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def min_second_difference(self) -> float:
        j = self.jbar_values
        if len(j) < 3 or not np.all(np.isfinite(j)):
            return math.nan
        return float(np.min(j[2:] - 2.0 * j[1:-1] + j[:-2]))


def make_rate_table(
    grid: LogMgfGrid, v_grid: Sequence[float], d: int = 1, s_min: float | None = None
) -> RateFunctionTable:
    results = [jbar(grid, float(v), s_min=s_min) for v in v_grid]
    labels = tuple(
        "rate" if (d == 1 and v > 0) else "upper-bound candidate only" for v in v_grid
    )
    return RateFunctionTable(
        v_grid=np.asarray(v_grid, dtype=float),
        jbar_values=np.array([r.value for r in results]),
        s_star=np.array([r.s_star for r in results]),
        lam_star=np.vstack([r.lam_star for r in results]),
        labels=labels,
    )


def write_rate_table_csv(path, table: RateFunctionTable, header_comment: str = "") -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["v", "Jbar", "sStar", "lambdaStarX", "lambdaStarT", "label"])
        for i in range(len(table.v_grid)):
            writer.writerow(
                [
                    repr(float(table.v_grid[i])),
                    repr(float(table.jbar_values[i])),
                    repr(float(table.s_star[i])),
                    repr(float(table.lam_star[i, 0])),
                    repr(float(table.lam_star[i, 1])),
                    table.labels[i],
                ]
            )


# ---------------------------------------------------------------------------
# closed forms for the homogeneous-floor environment
# ---------------------------------------------------------------------------


def lambda_bar(omega_min: float) -> float:
    """Critical exponent -0.5 log(4 w (1-w)); zero at w = 1/2, symmetric in
    w <-> 1-w."""
    if not (0.0 < omega_min < 1.0):
        raise ValueError("omega_min must be in (0, 1)")
    return -0.5 * math.log(4.0 * omega_min * (1.0 - omega_min))

def mgf_phi(lam: float, omega_min: float) -> float:
    """E e^{lam T_1} for the constant-omega walk; +inf past lambda_bar.

    Equals (1 - sqrt(1 - e^{2(lam - lambda_bar)})) / (2 (1-w) e^lam); at
    lambda_bar this is rho^{-1/2} with rho = (1-w)/w.
    """
    lb = lambda_bar(omega_min)
    if lam > lb:
        return math.inf
    # 1 - sqrt(1-x) written as x / (1 + sqrt(1-x)) so phi stays positive
    # for lam far below lambda_bar instead of cancelling to zero
    x = math.exp(2.0 * (lam - lb))
    inner = -math.expm1(2.0 * (lam - lb))
    numer = x / (1.0 + math.sqrt(max(0.0, inner)))
    return numer / (2.0 * (1.0 - omega_min) * math.exp(lam))


def conditioned_mgf_psi(n: int, lam: float, omega_min: float) -> float:
    """E[e^{lam T_n}; T_n < T_{-1}] for the constant-omega walk:
    phi^n / sum_{k=0..n} rho^k phi^{2k}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lb = lambda_bar(omega_min)
    if lam > lb:
        raise ValueError("lam must not exceed lambda_bar")
    rho = (1.0 - omega_min) / omega_min
    phi = mgf_phi(lam, omega_min)
    base = rho * phi * phi
    terms = []
    term = 1.0
    for _ in range(n + 1):
        terms.append(term)
        term *= base
    denom = math.fsum(terms)
    return phi**n / denom


def rate_r(t: float, omega_min: float) -> float:
    """Legendre transform of log phi at slope t (t > 1):
    t lambda_bar + (t/2) log(1 - t^{-2}) + 0.5 log(rho (t+1)/(t-1))."""
    if t <= 1.0:
        raise ValueError("t must exceed 1")
    lb = lambda_bar(omega_min)
    rho = (1.0 - omega_min) / omega_min
    return (
        t * lb
        + 0.5 * t * math.log1p(-1.0 / (t * t))
        + 0.5 * math.log(rho * (t + 1.0) / (t - 1.0))
    )
