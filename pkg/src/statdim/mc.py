"""Monte Carlo estimation of expected squared distances to scaled subdifferentials.

Each model family admits a closed-form squared distance from a Gaussian
sample ``g`` to the dilated subdifferential ``t * subdiff(f, x)``:

* entrywise: on the support the nearest point is pinned
  (``(g_i - t w_i sgn_i)^2``), off it the coordinate is clipped to the
  weight box (``(|g_i| - t w_i)_+^2``).
* block: pinned to ``t w_b u_b`` on support blocks (``u_b`` the unit
  direction of the signal block), clipped to the radius-``t w_b`` ball off
  them.
* TV: the subdifferential is an affine image of a box, so the exact
  distance has no closed form; the standard per-coordinate relaxation
  (triangle inequality across consecutive gradient positions) is used.
  Its expectation is what the TV bound integrates, so the Monte Carlo
  mean matches psi_tv exactly — but both are upper estimates of the true
  distance, and this module makes no stronger claim.

Seeding contract: a stream is derived from a base seed and a tuple of
labels as ``Philox(key = first 8 bytes, big endian, of
SHA-256(b"label0:label1:..."))`` where the byte string joins
``str(label)`` for each label with ":".  This is documented so other
implementations can replicate trial streams exactly; worker counts can
never affect the draw for a given label tuple.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergenceError
from .models import Dictionary, GradientProfile, ModelInstance

__all__ = [
    "McEstimate",
    "derive_rng",
    "dist_sq_entrywise",
    "dist_sq_block",
    "dist_sq_tv",
    "mean_dist_sq",
    "estimate_statdim",
    "estimate_statdim_analysis",
    "dist_sq_analysis_cone",
]


def derive_rng(*labels) -> np.random.Generator:
    """Counter-based generator for a tuple of labels (see module docstring)."""
    payload = ":".join(str(x) for x in labels).encode()
    key = int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo mean with its standard error at the minimizing t."""

    mean: float
    std_error: float
    samples: int
    t: float


def _as_batch(g, dim: int) -> tuple[np.ndarray, bool]:
    g = np.asarray(g, dtype=float)
    if g.ndim == 1:
        if g.shape[0] != dim:
            raise DomainError(f"g has length {g.shape[0]}, expected {dim}")
        return g[None, :], True
    if g.ndim == 2:
        if g.shape[1] != dim:
            raise DomainError(f"g has row length {g.shape[1]}, expected {dim}")
        return g, False
    raise DomainError("g must be a vector or a batch of row vectors")


def _unbatch(vals: np.ndarray, scalar: bool):
    return float(vals[0]) if scalar else vals


def dist_sq_entrywise(g, t: float, w, signs, support) -> float | np.ndarray:
    """Squared distance to t * subdiff of the weighted l1 norm.

    Parameters: ``w`` per-coordinate weights (length p), ``signs`` the
    sign vector (zero off support), ``support`` the support index set.
    ``g`` may be a single vector or an (N, p) batch.
    """
    w = np.asarray(w, dtype=float)
    p = w.shape[0]
    G, scalar = _as_batch(g, p)
    signs = np.asarray(signs, dtype=float)
    if signs.shape != (p,):
        raise DomainError(f"signs must have shape ({p},), got {signs.shape}")
    on = np.zeros(p, dtype=bool)
    support = np.asarray(support, dtype=np.int64)
    if support.size and (support.min() < 0 or support.max() >= p):
        raise DomainError("support index out of range")
    on[support] = True
    pinned = G[:, on] - t * (w[on] * signs[on])[None, :]
    clipped = np.maximum(np.abs(G[:, ~on]) - t * w[~on][None, :], 0.0)
    vals = np.einsum("ij,ij->i", pinned, pinned) + np.einsum("ij,ij->i", clipped, clipped)
    return _unbatch(vals, scalar)


def dist_sq_block(g, t: float, w, block_support, directions, k: int) -> float | np.ndarray:
    """Squared distance to t * subdiff of the weighted l1,2 norm.

    ``w`` per-block weights (length q), ``directions`` a (q, k) array of
    unit rows on the support blocks, ``g`` a vector of length q*k or an
    (N, q*k) batch.
    """
    w = np.asarray(w, dtype=float)
    q = w.shape[0]
    n = q * int(k)
    G, scalar = _as_batch(g, n)
    U = np.asarray(directions, dtype=float)
    if U.shape != (q, k):
        raise DomainError(f"directions must have shape ({q}, {k}), got {U.shape}")
    on = np.zeros(q, dtype=bool)
    bs = np.asarray(block_support, dtype=np.int64)
    if bs.size and (bs.min() < 0 or bs.max() >= q):
        raise DomainError("block support index out of range")
    on[bs] = True
    Gb = G.reshape(G.shape[0], q, k)
    pinned = Gb[:, on, :] - t * (w[on, None] * U[on, :])[None, :, :]
    vals = np.einsum("ibk,ibk->i", pinned, pinned)
    norms = np.linalg.norm(Gb[:, ~on, :], axis=2)
    clipped = np.maximum(norms - t * w[~on][None, :], 0.0)
    vals += np.einsum("ib,ib->i", clipped, clipped)
    return _unbatch(vals, scalar)


def dist_sq_tv(g, t: float, w, profile: GradientProfile) -> float | np.ndarray:
    """Relaxed squared distance to t * subdiff of the weighted TV seminorm.

    ``w`` per-gradient-position weights (length n-1, already expanded from
    per-part weights); the sign pattern and classification come from the
    profile.  ``g`` is a vector of length n or an (N, n) batch.
    """
    n = profile.n
    G, scalar = _as_batch(g, n)
    w = np.asarray(w, dtype=float)
    if w.shape != (n - 1,):
        raise DomainError(f"w must have shape ({n - 1},), got {w.shape}")
    s = profile.d_sign.astype(float)
    tw = t * w
    vals = np.zeros(G.shape[0])
    # interior coordinates i = 2..n-1 (0-based index idx), pair (idx, idx-1)
    for idx in range(1, n - 1):
        gi = G[:, idx]
        jump_i, jump_p = s[idx] != 0.0, s[idx - 1] != 0.0
        if jump_i and jump_p:
            vals += (gi - tw[idx] * s[idx] + tw[idx - 1] * s[idx - 1]) ** 2
        elif jump_i:
            vals += np.maximum(np.abs(gi - tw[idx] * s[idx]) - tw[idx - 1], 0.0) ** 2
        elif jump_p:
            vals += np.maximum(np.abs(gi + tw[idx - 1] * s[idx - 1]) - tw[idx], 0.0) ** 2
        else:
            vals += np.maximum(np.abs(gi) - (tw[idx] + tw[idx - 1]), 0.0) ** 2
    if s[0] != 0.0:
        vals += (G[:, 0] - tw[0] * s[0]) ** 2
    else:
        vals += np.maximum(np.abs(G[:, 0]) - tw[0], 0.0) ** 2
    if s[n - 2] != 0.0:
        vals += (G[:, n - 1] + tw[n - 2] * s[n - 2]) ** 2
    else:
        vals += np.maximum(np.abs(G[:, n - 1]) - tw[n - 2], 0.0) ** 2
    return _unbatch(vals, scalar)


def _expand_weights(model: ModelInstance, omega) -> np.ndarray:
    omega = (
        np.ones(model.part.num_parts)
        if omega is None
        else np.asarray(omega, dtype=float)
    )
    if omega.shape != (model.part.num_parts,):
        raise DomainError(
            f"omega must have shape ({model.part.num_parts},), got {omega.shape}"
        )
    return omega[model.part.membership]


def _sample_dim(model: ModelInstance) -> int:
    if model.family == "entrywise":
        return model.part.ground_size
    return model.signal_dim


def _per_sample(model: ModelInstance, G: np.ndarray, t: float, w: np.ndarray):
    if model.family == "entrywise":
        return dist_sq_entrywise(G, t, w, model.signs, model.support)
    if model.family == "block":
        # w is already per block index: the block partition lives on [q]
        return dist_sq_block(
            G, t, w, model.support, model.directions, model.block.k
        )
    return dist_sq_tv(G, t, w, model.profile)


def _grid_minimize(eval_mean, t_max: float, coarse: int = 64, refine: int = 24):
    """Locate the minimizing t of a noisy convex curve by two grid passes."""
    grid = np.linspace(0.0, t_max, coarse)
    means = [eval_mean(t) for t in grid]
    i = int(np.argmin(means))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, coarse - 1)]
    fine = np.linspace(lo, hi, refine)
    fine_means = [eval_mean(t) for t in fine]
    j = int(np.argmin(fine_means))
    return float(fine[j])


def mean_dist_sq(
    model: ModelInstance,
    t: float,
    omega=None,
    samples: int = 20_000,
    seed: int = 0,
) -> McEstimate:
    """Monte Carlo mean of the normalized squared distance at a FIXED t.

    This is the quantity the psi functions integrate in closed form, so
    ``mean_dist_sq(model, t, omega).mean`` should match the family's psi
    at ``(t, omega)`` to within a few standard errors.
    """
    samples = int(samples)
    if samples < 1_000:
        raise DomainError(f"need at least 1000 samples, got {samples}")
    if t < 0.0 or not math.isfinite(t):
        raise DomainError(f"t must be finite and nonnegative, got {t!r}")
    if model.family == "entrywise" and model.support is None:
        raise DomainError("Monte Carlo needs a realized instance (support/signs)")
    w = _expand_weights(model, omega)
    rng = derive_rng(seed, "mean-dist", model.family, repr(float(t)))
    G = rng.standard_normal((samples, _sample_dim(model)))
    vals = np.asarray(_per_sample(model, G, float(t), w)) / model.normalizer
    return McEstimate(
        mean=float(vals.mean()),
        std_error=float(vals.std(ddof=1) / math.sqrt(samples)),
        samples=samples,
        t=float(t),
    )


def estimate_statdim(
    model: ModelInstance,
    omega=None,
    samples: int = 20_000,
    seed: int = 0,
    t_max: float | None = None,
) -> McEstimate:
    """Monte Carlo estimate of the normalized bound quantity inf_t E dist^2 / ground.

    One Gaussian batch is drawn and reused across the whole t-grid
    (common random numbers), so the empirical t-curve is convex up to
    noise and the grid minimum is a faithful estimate of the infimum.
    Normalization matches the family's psi: ground size p, q, or n-1.
    """
    samples = int(samples)
    if samples < 1_000:
        raise DomainError(f"need at least 1000 samples, got {samples}")
    if model.family == "entrywise" and model.support is None:
        raise DomainError("Monte Carlo needs a realized instance (support/signs)")
    w = _expand_weights(model, omega)
    rng = derive_rng(seed, "statdim", model.family)
    G = rng.standard_normal((samples, _sample_dim(model)))
    ground = model.normalizer
    if t_max is None:
        t_max = 4.0 * math.sqrt(max(model.signal_dim, ground)) / max(w.max(), 1e-12)

    def mean_at(t: float) -> float:
        return float(np.mean(_per_sample(model, G, t, w))) / ground

    t_star = _grid_minimize(mean_at, t_max)
    vals = np.asarray(_per_sample(model, G, t_star, w)) / ground
    return McEstimate(
        mean=float(vals.mean()),
        std_error=float(vals.std(ddof=1) / math.sqrt(samples)),
        samples=samples,
        t=t_star,
    )


# --------------------------------------------------------------------------
# Analysis descent cone (test oracle for the dictionary inequality)
# --------------------------------------------------------------------------


def dist_sq_analysis_cone(
    g,
    t: float,
    dictionary: Dictionary,
    x,
    tol: float = 1e-8,
    max_iter: int = 5_000,
) -> float | np.ndarray:
    """Squared distance from g to t * subdiff(||Omega . ||_1)(x), exactly.

    The subdifferential is ``Omega^T z`` with ``z`` sign-pinned on the
    support of ``Omega x`` and box-constrained off it; the distance is a
    box-constrained least squares solved by projected gradient with
    Nesterov acceleration (restarted on non-monotonicity).  Small-scale
    oracle: intended for n <= 50.
    """
    Om = dictionary.matrix
    p, n = Om.shape
    if n > 50:
        raise DomainError("analysis-cone oracle is restricted to n <= 50")
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DomainError(f"x must have shape ({n},), got {x.shape}")
    G, scalar = _as_batch(g, n)
    N = G.shape[0]
    c = Om @ x
    on = np.abs(c) > 1e-8
    z_pin = np.where(on, np.sign(c), 0.0)
    base = G - t * (Om.T @ z_pin)[None, :]  # residual with pinned part fixed
    free = ~on
    if t == 0.0 or not np.any(free):
        vals = np.einsum("ij,ij->i", base, base)
        return _unbatch(vals, scalar)
    Of = Om[free, :]  # (f, n)
    # minimize ||base - t Of^T z||^2 over |z| <= 1, batched over rows of base;
    # the gradient is 2 t^2 (Of Of^T) z - ..., so the Lipschitz constant
    # carries the factor 2 (without it the top mode sits exactly on the
    # stability boundary and oscillates)
    lip = 2.0 * t * t * np.linalg.norm(Of @ Of.T, 2)
    step = 1.0 / max(lip, 1e-30)
    Z = np.zeros((N, Of.shape[0]))
    Y = Z.copy()
    theta = 1.0
    last_obj = None
    for it in range(max_iter):
        R = base - t * (Y @ Of)  # (N, n)
        grad = -2.0 * t * (R @ Of.T)
        Z_new = np.clip(Y - step * grad, -1.0, 1.0)
        theta_new = (1.0 + math.sqrt(1.0 + 4.0 * theta * theta)) / 2.0
        Y = Z_new + ((theta - 1.0) / theta_new) * (Z_new - Z)
        theta = theta_new
        Rz = base - t * (Z_new @ Of)
        obj = float(np.einsum("ij,ij->i", Rz, Rz).sum())
        move = float(np.abs(Z_new - Z).max())
        Z = Z_new
        if last_obj is not None and obj > last_obj:
            Y = Z.copy()  # restart momentum
            theta = 1.0
        if move < tol and it > 2:
            break
        last_obj = obj
    else:
        raise NoConvergenceError("projected gradient did not converge")
    R = base - t * (Z @ Of)
    vals = np.einsum("ij,ij->i", R, R)
    return _unbatch(vals, scalar)


def estimate_statdim_analysis(
    dictionary: Dictionary,
    x,
    samples: int = 2_000,
    seed: int = 0,
    t_max: float | None = None,
) -> McEstimate:
    """inf_t E dist^2(g, t subdiff ||Omega .||_1 (x)) / p by common-random-number grid."""
    samples = int(samples)
    if samples < 100:
        raise DomainError(f"need at least 100 samples, got {samples}")
    p, n = dictionary.p, dictionary.n
    rng = derive_rng(seed, "statdim-analysis")
    G = rng.standard_normal((samples, n))
    if t_max is None:
        t_max = 4.0 * math.sqrt(p)

    def mean_at(t: float) -> float:
        return float(np.mean(dist_sq_analysis_cone(G, t, dictionary, x))) / p

    t_star = _grid_minimize(mean_at, t_max, coarse=40, refine=16)
    vals = np.asarray(dist_sq_analysis_cone(G, t_star, dictionary, x)) / p
    return McEstimate(
        mean=float(vals.mean()),
        std_error=float(vals.std(ddof=1) / math.sqrt(samples)),
        samples=samples,
        t=t_star,
    )
