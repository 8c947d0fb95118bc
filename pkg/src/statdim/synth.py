"""Reproducible random instances for the three recovery models.

Generators are pure functions of (parameters, seed); the stream-splitting
contract lives in :func:`statdim.mc.derive_rng`.  All support counts are
``round(alpha_i * |P_i|)`` per part; a request whose rounded total is 0
while some accuracy is positive is rejected.

Redundant dictionaries cannot realize arbitrary analysis supports: a full
column rank p x n operator with p > n forces at least p - n + 1 nonzeros
in Omega x for any nonzero x.  The default construction therefore draws
sparse coefficients c and takes the least-squares preimage x (exact when
Omega is square invertible), then reports the REALIZED support of
Omega x — honest accuracies, possibly dense for p > n.  For supports of
size s >= p - n + 1 the ``cosparse`` construction instead samples x from
the null space of the off-support rows, which realizes the requested
support exactly (up to thresholding).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .mc import derive_rng
from .models import (
    BlockStructure,
    Dictionary,
    ModelInstance,
    PartitionSpec,
    gradient_support_profile,
    realized_accuracies,
)

__all__ = [
    "InstanceSeed",
    "gaussian_matrix",
    "entrywise_instance",
    "block_instance",
    "gradient_instance",
]

_SUPPORT_TOL = 1e-8


@dataclass(frozen=True)
class InstanceSeed:
    """Addresses one trial's random streams.

    Streams are split by role string ("matrix", "signal", ...) so the
    measurement matrix and the signal are independent and individually
    reproducible.
    """

    base_seed: int
    trial_index: int = 0

    def rng(self, role: str) -> np.random.Generator:
        return derive_rng(self.base_seed, self.trial_index, role)


def _as_seed(seed) -> InstanceSeed:
    if isinstance(seed, InstanceSeed):
        return seed
    return InstanceSeed(base_seed=int(seed))


def gaussian_matrix(m: int, n: int, seed) -> np.ndarray:
    """m x n matrix of i.i.d. standard normal entries."""
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise DomainError(f"matrix dimensions must be positive, got {m}x{n}")
    return _as_seed(seed).rng("matrix").standard_normal((m, n))


def _support_counts(part: PartitionSpec) -> np.ndarray:
    counts = np.rint(part.alpha * part.sizes).astype(int)
    if np.any(counts > part.sizes):
        raise DomainError("support count exceeds part size")
    if counts.sum() == 0 and np.any(part.alpha > 0):
        raise DomainError(
            "requested accuracies round to an empty support; "
            "increase alpha or part sizes"
        )
    return counts


def _draw_support(part: PartitionSpec, rng: np.random.Generator) -> np.ndarray:
    counts = _support_counts(part)
    picks = [
        rng.choice(part.indices(i), size=int(counts[i]), replace=False)
        for i in range(part.num_parts)
    ]
    return np.sort(np.concatenate(picks).astype(np.int64))


def entrywise_instance(
    dictionary: Dictionary | None,
    part: PartitionSpec,
    seed,
    construction: str = "preimage",
) -> ModelInstance:
    """Signal with a sparse analysis vector realizing the partition pattern.

    dictionary=None means the identity operator (p = n).  Constructions:
    ``preimage`` (default) draws sparse coefficients and takes the
    least-squares preimage; ``cosparse`` samples the null space of the
    off-support rows (needs s >= p - n + 1 and a truly redundant
    dictionary).  Realized accuracies are recomputed from Omega x either way.
    """
    seed = _as_seed(seed)
    rng = seed.rng("signal")
    p = part.ground_size
    if dictionary is not None and dictionary.p != p:
        raise DomainError(
            f"dictionary has {dictionary.p} rows, partition ground size is {p}"
        )
    support = _draw_support(part, rng)
    if construction == "preimage":
        c = np.zeros(p)
        c[support] = rng.standard_normal(support.size)
        if dictionary is None:
            x, coeffs = c, c
        else:
            Om = dictionary.matrix
            if Om.shape[0] == Om.shape[1]:
                x = np.linalg.solve(Om, c)
            else:
                x, *_ = np.linalg.lstsq(Om, c, rcond=None)
            coeffs = Om @ x
    elif construction == "cosparse":
        if dictionary is None or dictionary.p == dictionary.n:
            raise DomainError("cosparse construction needs a redundant dictionary")
        Om = dictionary.matrix
        off = np.setdiff1d(np.arange(p), support)
        null = _null_space(Om[off, :])
        if null.shape[1] == 0:
            raise DomainError(
                f"no nonzero signal has analysis support of size {support.size}; "
                f"need at least p - n + 1 = {p - Om.shape[1] + 1}"
            )
        x = null @ rng.standard_normal(null.shape[1])
        coeffs = Om @ x
    else:
        raise DomainError(f"unknown construction {construction!r}")
    realized = np.flatnonzero(np.abs(coeffs) > _SUPPORT_TOL)
    signs = np.zeros(p)
    signs[realized] = np.sign(coeffs[realized])
    return ModelInstance(
        family="entrywise",
        part=part.with_alpha(realized_accuracies(realized, part)),
        x=x,
        dictionary=dictionary,
        coeffs=coeffs,
        support=realized,
        signs=signs,
    )


def _null_space(M: np.ndarray) -> np.ndarray:
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > max(M.shape) * np.finfo(float).eps * (s[0] if s.size else 0)))
    return vt[rank:].T


def block_instance(blocks: BlockStructure, part: PartitionSpec, seed) -> ModelInstance:
    """Block-sparse signal; support blocks filled with standard normals."""
    seed = _as_seed(seed)
    rng = seed.rng("signal")
    if part.ground_size != blocks.q:
        raise DomainError(
            f"partition ground size {part.ground_size} != block count {blocks.q}"
        )
    support = _draw_support(part, rng)
    x = np.zeros(blocks.n)
    U = np.zeros((blocks.q, blocks.k))
    view = x.reshape(blocks.q, blocks.k)
    for b in support:
        vals = rng.standard_normal(blocks.k)
        while np.linalg.norm(vals) == 0.0:  # pragma: no cover - probability zero
            vals = rng.standard_normal(blocks.k)
        view[b] = vals
        U[b] = vals / np.linalg.norm(vals)
    return ModelInstance(
        family="block",
        part=part.with_alpha(realized_accuracies(support, part)),
        x=x,
        support=support,
        block=blocks,
        directions=U,
    )


def gradient_instance(
    n: int, part: PartitionSpec, seed, jump_counts=None
) -> ModelInstance:
    """Piecewise-constant signal with per-part jump counts on [n-1].

    ``jump_counts=None`` derives counts by rounding the partition
    accuracies.  Jump heights and the base level are standard normal.
    """
    n = int(n)
    seed = _as_seed(seed)
    rng = seed.rng("signal")
    if part.ground_size != n - 1:
        raise DomainError(f"partition ground size {part.ground_size} != n-1 = {n - 1}")
    if jump_counts is not None:
        jump_counts = np.asarray(jump_counts, dtype=int)
        if jump_counts.shape != (part.num_parts,):
            raise DomainError("need one jump count per part")
        if np.any(jump_counts < 0) or np.any(jump_counts > part.sizes):
            raise DomainError("jump counts must fit the part sizes")
        part = part.with_alpha(jump_counts / part.sizes)
    support = _draw_support(part, rng)
    heights = np.zeros(n - 1)
    heights[support] = rng.standard_normal(support.size)
    # d_i = x_i - x_{i+1} = heights means x_{i+1} = x_i - heights_i
    x = np.empty(n)
    x[0] = rng.standard_normal()
    x[1:] = x[0] - np.cumsum(heights)
    profile = gradient_support_profile(x, part)
    realized = realized_accuracies(profile.support, part)
    return ModelInstance(
        family="tv",
        part=part.with_alpha(realized),
        x=x,
        profile=profile,
    )
