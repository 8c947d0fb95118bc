"""Measurement bounds from statistical-dimension upper estimates.

For each model family the normalized bound is an infimum over a dilation
parameter t of an expected squared distance to the scaled subdifferential,
expressed through the kernels of :mod:`statdim.kernels`:

* entrywise (weighted l1 analysis):
    ``Psi(t) = sum_i rho_i [alpha_i (1 + t^2 w_i^2) + (1 - alpha_i) phi(t w_i)]``
    and ``m_hat = kappa^2 inf_t Psi + 1/p``.
* block (weighted l1,2):
    ``Psi(t) = sum_i rho_i [alpha_i (k + t^2 w_i^2) + (1 - alpha_i) phi_block(t w_i, k)]``
    and ``m_hat = inf_t Psi`` (per-block normalization; the raw count
    multiplies by q).
* TV (weighted total variation): Psi is the exact expectation of the
  relaxed per-sample distance, evaluated from the gradient profile's pair
  count tables (see :mod:`statdim.models` for the per-class terms), with
  ``m_hat = inf_t Psi`` normalized by n-1.

Every Psi is convex in t (each term is a nonnegative mixture of convex
kernels), so a bounded scalar minimizer is globally correct.

The sandwich widths quantify how far below m_hat the true normalized
statistical dimension can sit; the raw measurement-count rule adds the
usual Gaussian-process tolerance term ``sqrt(8 log(4/eta) n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy import optimize

from . import kernels
from .errors import DomainError
from .models import (
    GradientProfile,
    ModelInstance,
    PAIR_CLASSES,
    PartitionSpec,
)

__all__ = [
    "BoundReport",
    "psi_entrywise",
    "psi_block",
    "psi_tv",
    "minimize_over_t",
    "m_hat",
    "additivity_gap",
]


def _check_t_omega(t: float, omega, L: int) -> np.ndarray:
    if not np.isfinite(t) or t < 0:
        raise DomainError(f"t must be a finite nonnegative real, got {t!r}")
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (L,):
        raise DomainError(f"omega must have shape ({L},), got {omega.shape}")
    if not np.all(np.isfinite(omega)) or np.any(omega < 0):
        raise DomainError(f"omega must be finite and nonnegative, got {omega!r}")
    return omega


def psi_entrywise(t: float, part: PartitionSpec, omega) -> float:
    """Normalized expected distance for the weighted entrywise model."""
    omega = _check_t_omega(t, omega, part.num_parts)
    v = t * omega
    total = 0.0
    for i in range(part.num_parts):
        a = part.alpha[i]
        total += part.rho[i] * (
            a * (1.0 + v[i] * v[i]) + (1.0 - a) * kernels.phi(v[i])
        )
    return float(total)


def psi_block(t: float, part: PartitionSpec, k: int, omega) -> float:
    """Normalized expected distance for the weighted block model (per block)."""
    omega = _check_t_omega(t, omega, part.num_parts)
    k = int(k)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    v = t * omega
    total = 0.0
    for i in range(part.num_parts):
        a = part.alpha[i]
        total += part.rho[i] * (
            a * (k + v[i] * v[i]) + (1.0 - a) * kernels.phi_block(v[i], k)
        )
    return float(total)


def _pair_term(cls: str, va: float, vb: float) -> float:
    if cls == "pp":
        return 1.0 + (va - vb) ** 2
    if cls == "pm":
        return 1.0 + (va + vb) ** 2
    if cls == "js":
        return kernels.phi1(va, vb)
    if cls == "sj":
        return kernels.phi1(vb, va)
    return kernels.phi2(va + vb)


def psi_tv(
    t: float,
    profile: GradientProfile,
    part: PartitionSpec,
    omega,
    neighbor: Mapping[int, int] | None = None,
) -> float:
    """Normalized expected distance for the weighted TV model.

    Sums the per-class term over the profile's (later-part, earlier-part)
    count tables plus the two boundary terms, divided by n-1.  The
    ``neighbor`` map (part -> predecessor part) is redundant with the
    count tables; when given it is validated against them so callers
    holding only aggregate descriptions can cross-check consistency.
    """
    omega = _check_t_omega(t, omega, part.num_parts)
    if profile.membership.shape[0] != part.ground_size or not np.array_equal(
        profile.membership, part.membership
    ):
        raise DomainError("profile membership inconsistent with partition")
    if neighbor is not None:
        for cls in PAIR_CLASSES:
            tab = profile.pair_counts[cls]
            for a, b in zip(*np.nonzero(tab)):
                if a != b and neighbor.get(int(a)) != int(b):
                    raise DomainError(
                        f"neighbor map says part {a} follows {neighbor.get(int(a))!r}, "
                        f"but the profile pairs it with part {b}"
                    )
    v = t * omega
    total = 0.0
    for cls in PAIR_CLASSES:
        tab = profile.pair_counts[cls]
        for a, b in zip(*np.nonzero(tab)):
            total += tab[a, b] * _pair_term(cls, v[a], v[b])
    vh = v[profile.first_part]
    total += (1.0 + vh * vh) if profile.first_jump else kernels.phi2(vh)
    vt = v[profile.last_part]
    total += (1.0 + vt * vt) if profile.last_jump else kernels.phi2(vt)
    return float(total / (profile.n - 1))


def minimize_over_t(
    psi: Callable[[float], float], t_max: float | None = None, ground_size: int = 100
) -> tuple[float, float]:
    """Global minimum of a convex Psi over t in [0, t_max].

    Returns ``(t_star, value)``.  Default search interval is
    ``[0, 10 sqrt(ground_size)]``, generous for every family (minimizers
    scale like a root of the stationarity equation, O(sqrt(log)) at most).
    """
    if t_max is None:
        t_max = 10.0 * math.sqrt(ground_size)
    res = optimize.minimize_scalar(
        psi, bounds=(0.0, t_max), method="bounded",
        options={"xatol": 1e-11, "maxiter": 500},
    )
    t_star, val = float(res.x), float(res.fun)
    # bounded Brent never evaluates the endpoints exactly; Psi can be
    # monotone (all-support -> increasing, zero-support -> decreasing)
    for t_end in (0.0, t_max):
        v_end = psi(t_end)
        if v_end < val:
            t_star, val = t_end, v_end
    return t_star, val


@dataclass(frozen=True)
class BoundReport:
    """A normalized measurement bound with its uncertainty band.

    ``m_hat`` bounds the normalized statistical dimension from above and
    ``m_hat - sandwich_width`` from below.  ``raw_m(eta, ambient)`` turns
    the normalized bound into an integer measurement count sufficient for
    exact recovery with probability 1 - eta.
    """

    family: str
    m_hat: float
    t_star: float
    sandwich_width: float
    normalizer: int          # p, q, or n-1
    ambient: int             # signal dimension n

    def raw_m(self, eta: float = 0.05, ambient: int | None = None) -> int:
        if not 0.0 < eta < 1.0:
            raise DomainError(f"eta must be in (0, 1), got {eta!r}")
        n_amb = self.ambient if ambient is None else int(ambient)
        count = self.normalizer * self.m_hat + math.sqrt(
            8.0 * math.log(4.0 / eta) * n_amb
        )
        return int(math.ceil(count))

    @property
    def theory_m(self) -> float:
        """The un-normalized bound normalizer * m_hat (no tolerance term)."""
        return self.normalizer * self.m_hat


def _unit_omega(part: PartitionSpec) -> np.ndarray:
    return np.ones(part.num_parts)


def m_hat(model: ModelInstance, omega=None) -> BoundReport:
    """Normalized measurement bound for a model instance.

    Entrywise: ``kappa^2 inf_t Psi + 1/p``; block: ``inf_t Psi``;
    TV: ``inf_t Psi``.  ``omega=None`` means unit weights.
    """
    part = model.part
    omega = _unit_omega(part) if omega is None else np.asarray(omega, dtype=float)
    ground = part.ground_size
    L = part.num_parts
    sizes = part.sizes
    support_total = float(np.dot(sizes, part.alpha))
    s_eff = max(support_total, 1.0)  # the unweighted width blows up at s = 0
    # Unweighted (single-part) widths scale like 1/sqrt(s * ground); the
    # weighted multi-part ones like 1/sqrt(ground * L).
    denom = math.sqrt(s_eff * ground) if L == 1 else math.sqrt(ground * L)

    if model.family == "entrywise":
        kap = model.kappa
        t_star, val = minimize_over_t(
            lambda t: psi_entrywise(t, part, omega), ground_size=ground
        )
        mh = kap * kap * val + 1.0 / ground
        width = 2.0 * kap * kap / denom
    elif model.family == "block":
        t_star, val = minimize_over_t(
            lambda t: psi_block(t, part, model.block.k, omega), ground_size=ground
        )
        mh = val
        width = 2.0 / denom
    elif model.family == "tv":
        if model.profile is None:
            raise DomainError("tv bound needs a gradient profile")
        kap = model.kappa
        t_star, val = minimize_over_t(
            lambda t: psi_tv(t, model.profile, part, omega), ground_size=ground
        )
        mh = val
        width = 2.0 * kap / denom
    else:  # pragma: no cover - ModelInstance already validates
        raise DomainError(f"unknown family {model.family!r}")

    return BoundReport(
        family=model.family,
        m_hat=mh,
        t_star=t_star,
        sandwich_width=width,
        normalizer=ground,
        ambient=model.signal_dim,
    )


def _single_part_bound(family: str, alpha: float, size: int, kappa: float, k: int) -> float:
    """Unweighted normalized bound of one part in its own ambient space."""
    part = PartitionSpec.single(size, alpha)
    if family == "entrywise":
        _, val = minimize_over_t(
            lambda t: psi_entrywise(t, part, np.ones(1)), ground_size=size
        )
        return kappa * kappa * val + 1.0 / size
    _, val = minimize_over_t(
        lambda t: psi_block(t, part, k, np.ones(1)), ground_size=size
    )
    return val


def additivity_gap(model: ModelInstance, omega) -> float:
    """Weighted bound minus the sum of per-part unweighted bounds.

    At the optimal weights the weighted bound decomposes exactly: the
    entrywise identity is

        m_hat(omega*) = sum_i rho_i * m_hat_part(alpha_i, |P_i|) + (1 - L)/p

    where each part bound is computed in its own |P_i|-dimensional ambient
    (the block identity has no boundary correction).  Away from the
    optimal weights the gap is positive.
    """
    if model.family not in ("entrywise", "block"):
        raise DomainError("additivity holds for entrywise and block families")
    part = model.part
    L = part.num_parts
    sizes = part.sizes
    weighted = m_hat(model, omega).m_hat
    k = model.block.k if model.family == "block" else 1
    kap = model.kappa if model.family == "entrywise" else 1.0
    per_part = sum(
        part.rho[i] * _single_part_bound(model.family, float(part.alpha[i]), int(sizes[i]), kap, k)
        for i in range(L)
    )
    if model.family == "entrywise":
        per_part += (1.0 - L) / part.ground_size
    return float(weighted - per_part)
