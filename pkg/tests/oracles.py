"""Independent reference implementations used to cross-check the package.

Everything here is deliberately built from different primitives than the
library: plain density integrals instead of the closed erfc forms, mpmath
quadrature for high-precision freezes, LP/SOCP reformulations solved by
HiGHS/Clarabel instead of the package's ADMM loops, and QP projections
onto scaled subdifferentials instead of the per-coordinate formulas.
Agreement between the two paths is then a meaningful check rather than a
tautology.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate, optimize, stats

_SQRT2PI = float(np.sqrt(2.0 * np.pi))


def norm_pdf(t):
    return np.exp(-0.5 * t * t) / _SQRT2PI


# --------------------------------------------------------------------------
# Kernel oracles: direct quadrature against the underlying densities
# --------------------------------------------------------------------------


def phi_direct(z: float) -> float:
    """E (|g| - z)_+^2 for standard normal g, by direct quadrature."""
    val, _ = integrate.quad(lambda t: 2.0 * (t - z) ** 2 * norm_pdf(t), z, np.inf)
    return val


def phi_prime_direct(z: float) -> float:
    """d/dz of phi_direct: -4 E (|g| - z)_+ on the upper tail."""
    val, _ = integrate.quad(lambda t: -4.0 * (t - z) * norm_pdf(t), z, np.inf)
    return val


def phi_block_direct(z: float, k: int) -> float:
    """E (chi_k - z)_+^2 by quadrature against the chi density."""
    pdf = stats.chi(k).pdf
    val, _ = integrate.quad(lambda r: (r - z) ** 2 * pdf(r), max(z, 0.0), np.inf)
    return val


def phi_block_mp(z: float, k: int, dps: int = 40) -> float:
    """High-precision E (chi_k - z)_+^2 via mpmath (for freezing constants)."""
    import mpmath as mp

    with mp.workdps(dps):
        zz = mp.mpf(z)
        kk = mp.mpf(k)
        c = mp.power(2, 1 - kk / 2) / mp.gamma(kk / 2)

        def f(r):
            return (r - zz) ** 2 * c * r ** (kk - 1) * mp.exp(-r * r / 2)

        lo = max(z, 0.0)
        return float(mp.quad(f, [lo, lo + 60]))


def phi1_direct(a: float, b: float) -> float:
    """E (|g - a| - b)_+^2 split into its two tail branches."""
    lo, _ = integrate.quad(lambda t: (a - b - t) ** 2 * norm_pdf(t), -np.inf, a - b)
    hi, _ = integrate.quad(lambda t: (t - a - b) ** 2 * norm_pdf(t), a + b, np.inf)
    return lo + hi


def phi1_mp(a: float, b: float, dps: int = 40) -> float:
    import mpmath as mp

    with mp.workdps(dps):
        aa, bb = mp.mpf(a), mp.mpf(b)

        def pdf(t):
            return mp.exp(-t * t / 2) / mp.sqrt(2 * mp.pi)

        lo = mp.quad(lambda t: (aa - bb - t) ** 2 * pdf(t), [aa - bb - 60, aa - bb])
        hi = mp.quad(lambda t: (t - aa - bb) ** 2 * pdf(t), [aa + bb, aa + bb + 60])
        return float(lo + hi)


# --------------------------------------------------------------------------
# Finite differences
# --------------------------------------------------------------------------


def fd(f, x: float, h: float = 1e-6) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def fd_grad(f, v, h: float = 1e-6) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h
        out[i] = (f(v + e) - f(v - e)) / (2.0 * h)
    return out


# --------------------------------------------------------------------------
# Convex-program oracles (LP / SOCP / QP), solved by scipy-HiGHS or cvxpy
# --------------------------------------------------------------------------


def lp_weighted_analysis(A, y, Omega, w) -> np.ndarray:
    """argmin sum_i w_i |(Omega x)_i|  s.t.  A x = y, as an LP via HiGHS.

    Variables (x, u) with  Omega x <= u,  -Omega x <= u,  u >= 0.
    """
    A = np.asarray(A, dtype=float)
    Omega = np.asarray(Omega, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    m, n = A.shape
    p = Omega.shape[0]
    c = np.concatenate([np.zeros(n), w])
    A_ub = np.block(
        [
            [Omega, -np.eye(p)],
            [-Omega, -np.eye(p)],
        ]
    )
    b_ub = np.zeros(2 * p)
    A_eq = np.hstack([A, np.zeros((m, p))])
    res = optimize.linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=y,
        bounds=[(None, None)] * n + [(0, None)] * p,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"LP oracle failed: {res.message}")
    return res.x[:n]


def lp_weighted_tv(A, y, w) -> np.ndarray:
    """Weighted gradient-sparse recovery as an LP (difference-matrix analysis)."""
    n = np.asarray(A).shape[1]
    D = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    D[idx, idx] = 1.0
    D[idx, idx + 1] = -1.0
    return lp_weighted_analysis(A, y, D, w)


def socp_weighted_block(A, y, k: int, w) -> np.ndarray:
    """argmin sum_b w_b ||x_b||_2  s.t.  A x = y, via cvxpy."""
    import cvxpy as cp

    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    q = n // k
    w = np.asarray(w, dtype=float)
    x = cp.Variable(n)
    norms = cp.norm(cp.reshape(x, (q, k), order="C"), 2, axis=1)
    prob = cp.Problem(cp.Minimize(w @ norms), [A @ x == np.asarray(y, dtype=float)])
    prob.solve(solver=cp.CLARABEL)
    if x.value is None:
        raise RuntimeError(f"SOCP oracle failed: status {prob.status}")
    return np.asarray(x.value, dtype=float)


def dist_sq_scaled_subdiff_qp(g, t: float, Omega, w, signs, support) -> float:
    """Exact squared distance from g to t * Omega^T S, where S is the
    weighted-l1 subdifferential set {s : s_j = w_j sigma_j on the support,
    |s_j| <= w_j off it}.  Solved as a QP by cvxpy.
    """
    import cvxpy as cp

    Omega = np.asarray(Omega, dtype=float)
    g = np.asarray(g, dtype=float)
    w = np.asarray(w, dtype=float)
    p = Omega.shape[0]
    on = np.zeros(p, dtype=bool)
    on[np.asarray(support, dtype=int)] = True
    s = cp.Variable(p)
    cons = [s[on] == w[on] * np.asarray(signs, dtype=float)[on]] if on.any() else []
    if (~on).any():
        cons += [s[~on] <= w[~on], s[~on] >= -w[~on]]
    prob = cp.Problem(cp.Minimize(cp.sum_squares(g - t * (Omega.T @ s))), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.value is None:
        raise RuntimeError(f"QP oracle failed: status {prob.status}")
    return float(prob.value)


def dist_sq_block_subdiff_qp(g, t: float, k: int, w, directions, block_support) -> float:
    """Exact squared distance from g to the scaled block-l1,2 subdifferential:
    s_b = w_b u_b on support blocks, ||s_b|| <= w_b elsewhere.
    """
    import cvxpy as cp

    g = np.asarray(g, dtype=float)
    n = g.size
    q = n // k
    w = np.asarray(w, dtype=float)
    on = np.zeros(q, dtype=bool)
    on[np.asarray(block_support, dtype=int)] = True
    s = cp.Variable(n)
    cons = []
    for b in range(q):
        sl = slice(b * k, (b + 1) * k)
        if on[b]:
            cons.append(s[sl] == w[b] * np.asarray(directions, dtype=float)[b])
        else:
            cons.append(cp.norm(s[sl], 2) <= w[b])
    prob = cp.Problem(cp.Minimize(cp.sum_squares(g - t * s)), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.value is None:
        raise RuntimeError(f"QP oracle failed: status {prob.status}")
    return float(prob.value)


# --------------------------------------------------------------------------
# Classical closed forms for sanity anchors
# --------------------------------------------------------------------------


def l1_statdim_bound(s: int, n: int) -> float:
    """inf_t [ s (1 + t^2) + (n - s) phi(t) ], the classical normalized-by-n
    upper bound on the statistical dimension of the l1 descent cone at an
    s-sparse point, computed with the direct-quadrature phi.
    """

    def obj(t):
        return s * (1.0 + t * t) + (n - s) * phi_direct(t)

    res = optimize.minimize_scalar(obj, bounds=(0.0, 30.0), method="bounded")
    return float(res.fun) / n
