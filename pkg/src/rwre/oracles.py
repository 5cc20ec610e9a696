"""Independent cross-checks for the closed-form quenched machinery.

Everything here recomputes a quantity by a structurally different route
(linear systems, naive series, banded solves, closed forms for the
homogeneous chain) so agreement with the fast implementations is evidence,
not tautology.  Used by the exact-check experiment and by the test suite.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_banded

from .environment import EnvironmentWindow

__all__ = [
    "hitting_prob_linear_system",
    "mean_T_series",
    "var_T_series",
    "homogeneous_mean_T",
    "homogeneous_var_T",
    "psi_bvp",
    "rate_r_numeric",
    "cramer_rate",
]


def hitting_prob_linear_system(
    env: EnvironmentWindow, i: int, x: int, j: int
) -> tuple[float, float]:
    """P(T_j before T_i) and its complement from x, by solving the harmonic
    equation h(y) = omega_y h(y+1) + (1-omega_y) h(y-1), h(i)=0, h(j)=1.

    Dense tridiagonal solve; no product/sum identities involved.
    """
    if not (i <= x <= j) or i == j:
        raise ValueError("need i <= x <= j with i < j")
    m = j - i - 1  # unknowns h(i+1) .. h(j-1)
    if m == 0:
        return (1.0, 0.0) if x == j else (0.0, 1.0)
    ab = np.zeros((3, m))
    rhs = np.zeros(m)
    for r in range(m):
        y = i + 1 + r
        om = env.omega_at(y)
        ab[1, r] = 1.0
        if r > 0:
            ab[2, r - 1] = -(1.0 - om)  # subdiagonal entry for column r-1
        if r < m - 1:
            ab[0, r + 1] = -om  # superdiagonal entry for column r+1
        else:
            rhs[r] = om  # h(j) = 1; h(i) = 0 needs no term
    h = solve_banded((1, 1), ab, rhs)
    if x == i:
        return 0.0, 1.0
    if x == j:
        return 1.0, 0.0
    up = float(h[x - i - 1])
    return up, 1.0 - up


def _truncated_w_naive(env: EnvironmentWindow, x: int, barrier: int) -> float:
    """W_x with reflection at `barrier`: sum over k of rho_k ... rho_x,
    each partial product formed afresh."""
    total = 0.0
    for k in range(barrier + 1, x + 1):
        prod = 1.0
        for y in range(k, x + 1):
            prod *= env.rho_at(y)
        total += prod
    return total


def mean_T_series(env: EnvironmentWindow, n: int, reflection_depth: int) -> float:
    """E_omega T_n with reflection at -reflection_depth, from the definition
    E T = sum_x (1 + 2 W_x) with naive per-site product sums."""
    barrier = -reflection_depth
    return math.fsum(1.0 + 2.0 * _truncated_w_naive(env, x, barrier) for x in range(n))


def var_T_series(env: EnvironmentWindow, n: int, reflection_depth: int) -> float:
    """Var_omega T_n with reflection at -reflection_depth.

    Per-crossing second moment written as the explicit series
    E tau_x^2 = 2 Sbar_x^2 - Sbar_x + 2 sum_{k>=1} Pi_{x-k+1,x} Sbar_{x-k}^2
    with Sbar = 1 + 2W, every term built from naive products; crossings from
    distinct sites are independent so variances add.
    """
    barrier = -reflection_depth
    sbar = {x: 1.0 + 2.0 * _truncated_w_naive(env, x, barrier) for x in range(barrier, n)}
    total = 0.0
    for x in range(n):
        tail = 0.0
        prod = 1.0
        for k in range(1, x - barrier + 1):
            prod *= env.rho_at(x - k + 1)
            if prod == 0.0:
                break
            tail += prod * sbar[x - k] ** 2
        second = 2.0 * sbar[x] ** 2 - sbar[x] + 2.0 * tail
        total += second - sbar[x] ** 2
    return total


def homogeneous_mean_T(p: float, n: int) -> float:
    """E T_n for the constant-omega chain, p > 1/2: n / (2p - 1)."""
    return n / (2.0 * p - 1.0)


def homogeneous_var_T(p: float, n: int) -> float:
    """Var T_n for the constant-omega chain, p > 1/2.

    Per site 4 rho (1 + rho) / (1 - rho)^3 with rho = (1-p)/p; this is the
    infinite-depth limit, so compare against deep reflections only.
    """
    r = (1.0 - p) / p
    return n * 4.0 * r * (1.0 + r) / (1.0 - r) ** 3


def psi_bvp(n: int, lam: float, omega: float) -> float:
    """psi_{n,lambda}(0) for the constant-omega chain by solving the boundary
    value problem psi(x) = omega e^lam psi(x+1) + (1-omega) e^lam psi(x-1)
    on 0..n-1 with psi(-1) = 0, psi(n) = 1 (banded solve)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a = omega * math.exp(lam)
    c = (1.0 - omega) * math.exp(lam)
    ab = np.zeros((3, n))
    rhs = np.zeros(n)
    ab[1, :] = 1.0
    ab[0, 1:] = -a  # superdiagonal
    ab[2, :-1] = -c  # subdiagonal
    rhs[n - 1] = a
    psi = solve_banded((1, 1), ab, rhs)
    return float(psi[0])


def rate_r_numeric(t: float, omega_min: float) -> float:
    """sup over lam <= lambda_bar of lam*t - log phi(lam), maximized
    numerically (bounded Brent); checks the closed-form rate at slope t."""
    from scipy.optimize import minimize_scalar

    from .ldp import lambda_bar, mgf_phi

    if t <= 1.0:
        raise ValueError("t must exceed 1")
    lb = lambda_bar(omega_min)

    def neg(lam: float) -> float:
        return -(lam * t - math.log(mgf_phi(lam, omega_min)))

    res = minimize_scalar(neg, bounds=(lb - 60.0, lb), method="bounded", options={"xatol": 1e-13})
    return -float(res.fun)


def cramer_rate(v: float, p: float) -> float:
    """Cramer rate function of the homogeneous +-1 walk with mean 2p - 1."""
    if not (-1.0 < v < 1.0):
        raise ValueError("v must lie in (-1, 1)")
    a = (1.0 + v) / 2.0
    b = (1.0 - v) / 2.0
    out = 0.0
    if a > 0.0:
        out += a * math.log(a / p)
    if b > 0.0:
        out += b * math.log(b / (1.0 - p))
    return out
