"""Optimal weights minimizing the measurement bounds.

After the change of variable ``v = t * omega`` the bound infimum over
``(t, omega)`` is separable (entrywise/block) or jointly convex (TV), so
the optimal weights are unique up to positive scaling.

Entrywise: each coordinate solves the stationarity equation of
``J(v) = alpha (v^2 + 1) + (1 - alpha) phi(v)``, i.e. ::

    2 alpha v + (1 - alpha) phi_prime(v) = 0

Block: same with ``phi_block`` in place of ``phi``.  The factor 2 on the
quadratic term is the exact derivative of ``J``; a convention without it
circulates (it amounts to minimizing a different functional) and is kept
available behind ``convention="halved"`` for comparison, but the default
is validated against known reference solutions and the random-probe
optimality tests.

TV: the per-coordinate equations couple through cross-part pairs, so the
full gradient of the exact expectation (the function behind
:func:`statdim.bounds.psi_tv` at ``t = 1`` with ``v`` as the weights) is
driven to zero by a damped Newton iteration with a finite-difference
Jacobian, started from several scalar multiples of the all-ones vector.

Weights for a part with no support element diverge (+inf): every term of
the objective involving that coordinate is nonincreasing.  This is
detected up front and raised as
:class:`~statdim.errors.UnboundedWeightError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from . import kernels
from .errors import DomainError, NoConvergenceError, UnboundedWeightError
from .models import GradientProfile, PAIR_CLASSES, PartitionSpec

__all__ = [
    "WeightSolution",
    "entrywise_weights",
    "block_weights",
    "tv_weights",
    "tv_objective",
    "tv_objective_grad",
]

_RESIDUAL_TOL = 1e-10
_BRACKET_START = 8.0
_BRACKET_CAP = 2.0 ** 40


@dataclass(frozen=True)
class WeightSolution:
    """Optimal weights with the stationarity residual of the raw roots.

    ``omega`` is scaled per family convention: entrywise and block divide
    by the last component (reference part), TV divides by the largest.
    ``residual`` is the max absolute stationarity-equation value at the
    unnormalized roots (the equations are not scale-invariant).
    """

    omega: np.ndarray
    residual: float
    normalized: bool

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        om.setflags(write=False)
        object.__setattr__(self, "omega", om)


def _check_alpha(alpha) -> np.ndarray:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.ndim != 1 or alpha.size == 0:
        raise DomainError("alpha must be a nonempty vector")
    if not np.all(np.isfinite(alpha)):
        raise DomainError(f"alpha must be finite, got {alpha!r}")
    if np.any(alpha < 0) or np.any(alpha > 1):
        raise DomainError(f"accuracies must lie in [0, 1], got {alpha!r}")
    if np.any(alpha == 0):
        raise UnboundedWeightError(
            "a part with accuracy 0 has optimal weight +inf; drop those "
            "indices from the problem instead"
        )
    return alpha


def _scalar_root(alpha: float, dphi: Callable[[float], float], factor: float) -> float:
    """Root of factor*alpha*v + (1-alpha)*dphi(v) = 0 on v > 0."""
    if alpha == 1.0:
        return 0.0

    def f(v: float) -> float:
        return factor * alpha * v + (1.0 - alpha) * dphi(v)

    lo, hi = 0.0, _BRACKET_START
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > _BRACKET_CAP:  # pragma: no cover - alpha=0 is rejected earlier
            raise UnboundedWeightError("stationarity equation has no finite root")
    return float(optimize.brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200))


def _normalize_last(roots: np.ndarray) -> np.ndarray:
    ref = roots[-1]
    if ref <= 0.0:
        # last part has accuracy 1 (root 0); fall back to the largest root
        ref = roots.max()
        if ref <= 0.0:
            return np.ones_like(roots)  # all parts fully supported: weights immaterial
    return roots / ref


def _solve_separable(alpha, dphi, convention: str) -> WeightSolution:
    alpha = _check_alpha(alpha)
    if convention not in ("gradient", "halved"):
        raise DomainError(f"unknown convention {convention!r}")
    factor = 2.0 if convention == "gradient" else 1.0
    roots = np.array([_scalar_root(float(a), dphi, factor) for a in alpha])
    residual = max(
        abs(factor * a * v + (1.0 - a) * dphi(v)) if a < 1.0 else 0.0
        for a, v in zip(alpha, roots)
    )
    if residual > _RESIDUAL_TOL:
        raise NoConvergenceError(
            f"stationarity residual {residual:.3e} above {_RESIDUAL_TOL:.1e}",
            best=roots,
        )
    return WeightSolution(omega=_normalize_last(roots), residual=residual, normalized=True)


def entrywise_weights(alpha, convention: str = "gradient") -> WeightSolution:
    """Optimal per-part weights for the entrywise model.

    alpha : accuracies in (0, 1], one per part.  Normalized so the last
    component is 1; a part with accuracy exactly 1 gets weight 0.
    """
    return _solve_separable(alpha, kernels.phi_prime, convention)


def block_weights(alpha, k: int, convention: str = "gradient") -> WeightSolution:
    """Optimal per-part weights for the block model with blocks of length k."""
    k = int(k)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return _solve_separable(alpha, lambda v: kernels.phi_block_prime(v, k), convention)


# --------------------------------------------------------------------------
# TV: coupled system
# --------------------------------------------------------------------------


def tv_objective(v, profile: GradientProfile) -> float:
    """The TV bound objective J(v): psi_tv at t=1 with v as the weights.

    Jointly convex in v: every per-pair term is convex ((v_a ± v_b)^2,
    phi1 composed with affine maps of v, phi of a sum).
    """
    v = np.asarray(v, dtype=float)
    total = 0.0
    for cls in PAIR_CLASSES:
        tab = profile.pair_counts[cls]
        for a, b in zip(*np.nonzero(tab)):
            c = float(tab[a, b])
            if cls == "pp":
                total += c * (1.0 + (v[a] - v[b]) ** 2)
            elif cls == "pm":
                total += c * (1.0 + (v[a] + v[b]) ** 2)
            elif cls == "js":
                total += c * kernels.phi1(v[a], v[b])
            elif cls == "sj":
                total += c * kernels.phi1(v[b], v[a])
            else:
                total += c * kernels.phi2(v[a] + v[b])
    vh = v[profile.first_part]
    total += (1.0 + vh * vh) if profile.first_jump else kernels.phi2(vh)
    vt = v[profile.last_part]
    total += (1.0 + vt * vt) if profile.last_jump else kernels.phi2(vt)
    return float(total / (profile.n - 1))


def tv_objective_grad(v, profile: GradientProfile) -> np.ndarray:
    """Exact gradient of :func:`tv_objective` (quadrature-backed kernels)."""
    v = np.asarray(v, dtype=float)
    L = v.shape[0]
    g = np.zeros(L)
    for cls in PAIR_CLASSES:
        tab = profile.pair_counts[cls]
        for a, b in zip(*np.nonzero(tab)):
            c = float(tab[a, b])
            if cls == "pp":
                d = 2.0 * (v[a] - v[b])
                g[a] += c * d
                g[b] -= c * d
            elif cls == "pm":
                d = 2.0 * (v[a] + v[b])
                g[a] += c * d
                g[b] += c * d
            elif cls == "js":
                da, db = kernels.phi1_grad(v[a], v[b])
                g[a] += c * da
                g[b] += c * db
            elif cls == "sj":
                da, db = kernels.phi1_grad(v[b], v[a])
                g[b] += c * da
                g[a] += c * db
            else:
                d = kernels.phi_prime(v[a] + v[b])
                g[a] += c * d
                g[b] += c * d
    if profile.first_jump:
        g[profile.first_part] += 2.0 * v[profile.first_part]
    else:
        g[profile.first_part] += kernels.phi_prime(v[profile.first_part])
    if profile.last_jump:
        g[profile.last_part] += 2.0 * v[profile.last_part]
    else:
        g[profile.last_part] += kernels.phi_prime(v[profile.last_part])
    return g / (profile.n - 1)


def _has_support_everywhere(profile: GradientProfile, part: PartitionSpec) -> None:
    jumps = profile.d_sign != 0
    for i in range(part.num_parts):
        if not np.any(jumps[part.membership == i]):
            raise UnboundedWeightError(
                f"part {i} contains no gradient support; its optimal weight "
                "is +inf (every objective term in it is nonincreasing)"
            )


def _newton(
    profile: GradientProfile,
    v0: np.ndarray,
    max_iter: int = 200,
    free: np.ndarray | None = None,
):
    """Damped Newton on the gradient restricted to the ``free`` coordinates.

    Non-free coordinates stay at their ``v0`` value (used to pin parts
    whose weight is sent to the no-support limit).
    """
    v = v0.copy()
    L = v.shape[0]
    idx = np.arange(L) if free is None else np.flatnonzero(free)

    def grad(vec: np.ndarray) -> np.ndarray:
        return tv_objective_grad(vec, profile)[idx]

    g = grad(v)
    h = 1e-6
    for _ in range(max_iter):
        res = np.abs(g).max()
        if res <= _RESIDUAL_TOL / 4.0:
            return v, res
        J = np.empty((idx.size, idx.size))
        for c, j in enumerate(idx):
            e = np.zeros(L)
            e[j] = h
            J[:, c] = (
                grad(np.maximum(v + e, 0.0)) - grad(np.maximum(v - e, 0.0))
            ) / (2.0 * h)
        try:
            step = np.linalg.solve(J, g)
        except np.linalg.LinAlgError:
            step = g  # gradient fallback
        # damp: shrink until the residual norm decreases and v stays positive
        scale = 1.0
        for _ in range(60):
            cand = v.copy()
            cand[idx] = v[idx] - scale * step
            if np.all(cand[idx] > 0.0):
                g_cand = grad(cand)
                if np.abs(g_cand).max() < np.abs(g).max():
                    v, g = cand, g_cand
                    break
            scale /= 2.0
        else:
            return v, np.abs(g).max()
    return v, np.abs(grad(v)).max()


def _expand_starts(starts, L: int) -> list[np.ndarray]:
    out = []
    for s in starts:
        v = np.full(L, float(s)) if np.ndim(s) == 0 else np.asarray(s, dtype=float)
        if v.shape != (L,) or np.any(v <= 0.0) or not np.all(np.isfinite(v)):
            raise DomainError(f"starts must be positive scalars or length-{L} vectors")
        out.append(v)
    if not out:
        raise DomainError("need at least one start")
    return out


def _check_multistart(converged: list[np.ndarray], profile: GradientProfile):
    """All converged minimizers must attain the same objective value.

    Agreement is checked on J, not on the location: a part with very low
    accuracy makes J exponentially flat in its weight, so the minimizer
    location is pinned only to quadrature accuracy while the value is
    determined far more tightly.
    """
    j_vals = [tv_objective(v, profile) for v in converged]
    lo, hi = min(j_vals), max(j_vals)
    if hi - lo > 1e-9 * (1.0 + abs(lo)):
        raise NoConvergenceError(
            f"multistart minima disagree (J spread {hi - lo:.3e}); "
            "objective may be degenerate",
            best=converged[int(np.argmin(j_vals))],
        )


def tv_weights(
    profile: GradientProfile,
    part: PartitionSpec,
    starts=(0.1, 1.0, 5.0),
) -> WeightSolution:
    """Optimal per-part weights for the TV model.

    Solves the coupled stationarity system by damped Newton from several
    starts (scalars mean that multiple of the all-ones vector); every
    converged start must attain the same objective value.  Normalized so
    the max component is 1.
    """
    if profile.membership.shape[0] != part.ground_size or not np.array_equal(
        profile.membership, part.membership
    ):
        raise DomainError("profile membership inconsistent with partition")
    _has_support_everywhere(profile, part)
    L = part.num_parts
    converged = []
    best = None
    for v0 in _expand_starts(starts, L):
        v, res = _newton(profile, v0)
        if best is None or res < best[1]:
            best = (v, res)
        if res <= _RESIDUAL_TOL:
            converged.append(v)
    if not converged:
        raise NoConvergenceError(
            f"TV weight Newton residual {best[1]:.3e} above {_RESIDUAL_TOL:.1e}",
            best=best[0],
        )
    _check_multistart(converged, profile)
    v_star = best[0]
    return WeightSolution(
        omega=v_star / v_star.max(), residual=float(best[1]), normalized=True
    )


#: Pin value for no-support parts.  Beyond ~40 every kernel term involving
#: the pinned weight underflows to exactly 0.0 (erfc and the Gaussian
#: integrands vanish), so the free-part system is solved in the exact
#: infinite-weight limit.
_PIN_VALUE = 1e4


def _tv_weights_pinned(
    profile: GradientProfile, part: PartitionSpec, dead
) -> WeightSolution:
    """TV weights when some parts carry no gradient support.

    The objective is nonincreasing in the weight of a support-free part,
    so its optimal weight is +inf; every objective term touching such a
    part vanishes in that limit.  This solves the remaining coupled system
    with the dead parts pinned far beyond kernel underflow and reports
    ``inf`` for them.  Free entries are normalized to max 1.
    """
    if profile.membership.shape[0] != part.ground_size or not np.array_equal(
        profile.membership, part.membership
    ):
        raise DomainError("profile membership inconsistent with partition")
    L = part.num_parts
    dead = np.asarray(dead, dtype=bool)
    if dead.shape != (L,):
        raise DomainError(f"dead mask must have shape ({L},), got {dead.shape}")
    jumps = profile.d_sign != 0
    for i in np.flatnonzero(~dead):
        if not np.any(jumps[part.membership == i]):
            raise DomainError(f"part {i} has no gradient support but is not pinned")
    free = ~dead
    if not np.any(free):
        return WeightSolution(omega=np.full(L, np.inf), residual=0.0, normalized=True)
    converged = []
    best = None
    for start in (0.1, 1.0, 5.0):
        v0 = np.full(L, start)
        v0[dead] = _PIN_VALUE
        v, res = _newton(profile, v0, free=free)
        if best is None or res < best[1]:
            best = (v, res)
        if res <= _RESIDUAL_TOL:
            converged.append(v)
    if not converged:
        raise NoConvergenceError(
            f"TV weight Newton residual {best[1]:.3e} above {_RESIDUAL_TOL:.1e}",
            best=best[0],
        )
    _check_multistart(converged, profile)
    omega = np.full(L, np.inf)
    omega[free] = best[0][free] / best[0][free].max()
    return WeightSolution(omega=omega, residual=float(best[1]), normalized=True)
