"""Signal models: partitions, dictionaries, block structures, gradient profiles.

Conventions used throughout the package:

* A **partition** splits the ground index set (coefficient indices ``[p]``
  for entrywise models, block indices ``[q]`` for block models, gradient
  positions ``[n-1]`` for TV models) into ``L`` disjoint nonempty parts.
  Part ``i`` has relative size ``rho_i = |P_i| / ground_size`` and accuracy
  ``alpha_i = |P_i ∩ S| / |P_i|``, the fraction of its indices inside the
  support ``S``.  The model's relative sparsity is ``sigma = sum rho_i alpha_i``.

* The **difference operator** is the (n-1) x n matrix with rows
  ``[..., +1, -1, ...]``; applied to a signal it returns
  ``d_i = x_i - x_{i+1}``.  Objectives only see ``|d_i|`` so the sign
  convention is observationally irrelevant, but it is fixed here because
  sign products classify consecutive jumps.

* A **gradient profile** classifies every one of the ``n`` terms of the
  TV subdifferential distance: each interior coordinate ``i`` in
  ``{2..n-1}`` pairs the gradient positions ``(i, i-1)`` into one of five
  classes, and coordinates ``1`` and ``n`` contribute one boundary term
  each (jump or flat).  Pair classes, keyed by the sign pattern of
  ``(d_i, d_{i-1})``:

  ======  ==========================================  ================
  class   gradient positions i and i-1                distance term
  ======  ==========================================  ================
  pp      both jumps, same sign                       (v_a - v_b)^2 + 1
  pm      both jumps, opposite signs                  (v_a + v_b)^2 + 1
  js      i jumps, i-1 flat                           phi1(v_a, v_b)
  sj      i flat, i-1 jumps                           phi1(v_b, v_a)
  ss      both flat                                   phi2(v_a + v_b)
  ======  ==========================================  ================

  where ``a = part(i)``, ``b = part(i-1)`` and ``v = t * omega``.  The
  profile stores the (L x L) count table of each class — enough to
  evaluate the expectation exactly, including cross-partition pairs —
  plus the per-index data Monte Carlo needs.

Public API: :class:`PartitionSpec`, :class:`Dictionary`,
:class:`BlockStructure`, :class:`GradientProfile`, :class:`ModelInstance`,
:func:`condition_number`, :func:`difference_operator`,
:func:`dct_dictionary`, :func:`gradient_support_profile`,
:func:`realized_accuracies`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Mapping

import numpy as np

from .errors import DomainError, SingularMatrixError

__all__ = [
    "PartitionSpec",
    "Dictionary",
    "BlockStructure",
    "GradientProfile",
    "ModelInstance",
    "PAIR_CLASSES",
    "condition_number",
    "difference_operator",
    "difference_condition_number",
    "dct_dictionary",
    "gradient_support_profile",
    "realized_accuracies",
]

#: Pair classes in the order used by count tables everywhere.
PAIR_CLASSES = ("pp", "pm", "js", "sj", "ss")

_SUPPORT_TOL = 1e-8


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PartitionSpec:
    """A partition of a ground index set with per-part accuracies.

    Attributes
    ----------
    ground_size : int
        Number of ground indices (p, q, or n-1 depending on the model).
    membership : ndarray of int, shape (ground_size,)
        ``membership[j]`` is the part id of ground index j, in ``[0, L)``.
    rho : ndarray of float, shape (L,)
        Relative part sizes ``|P_i| / ground_size``; sums to 1.
    alpha : ndarray of float, shape (L,)
        Per-part accuracies in [0, 1].
    """

    ground_size: int
    membership: np.ndarray
    rho: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        membership = _freeze(np.asarray(self.membership, dtype=np.int64))
        alpha = _freeze(np.asarray(self.alpha, dtype=float))
        object.__setattr__(self, "membership", membership)
        object.__setattr__(self, "alpha", alpha)
        if self.ground_size < 1:
            raise DomainError("ground_size must be positive")
        if membership.shape != (self.ground_size,):
            raise DomainError(
                f"membership must have shape ({self.ground_size},), got {membership.shape}"
            )
        L = alpha.shape[0]
        if L < 1:
            raise DomainError("need at least one part")
        counts = np.bincount(membership, minlength=L)
        if membership.min() < 0 or membership.max() >= L or counts.shape[0] != L:
            raise DomainError("membership ids must cover exactly [0, L)")
        if np.any(counts == 0):
            raise DomainError(f"every part must be nonempty; counts={counts.tolist()}")
        rho = _freeze(counts / float(self.ground_size))
        expected = np.asarray(self.rho, dtype=float)
        if expected.shape == rho.shape and not np.allclose(expected, rho, atol=1e-12):
            raise DomainError("rho inconsistent with membership counts")
        object.__setattr__(self, "rho", rho)
        if np.any(alpha < 0) or np.any(alpha > 1):
            raise DomainError(f"accuracies must lie in [0, 1], got {alpha!r}")

    @classmethod
    def from_membership(cls, membership, alpha) -> "PartitionSpec":
        membership = np.asarray(membership, dtype=np.int64)
        alpha = np.asarray(alpha, dtype=float)
        return cls(
            ground_size=membership.shape[0],
            membership=membership,
            rho=np.empty(0),  # recomputed in __post_init__
            alpha=alpha,
        )

    @classmethod
    def from_sizes(cls, sizes, alpha) -> "PartitionSpec":
        """Contiguous parts of the given sizes, in order."""
        sizes = [int(s) for s in np.atleast_1d(sizes)]
        if any(s < 1 for s in sizes):
            raise DomainError(f"part sizes must be positive, got {sizes}")
        membership = np.repeat(np.arange(len(sizes)), sizes)
        return cls.from_membership(membership, alpha)

    @classmethod
    def single(cls, ground_size: int, alpha: float) -> "PartitionSpec":
        return cls.from_sizes([ground_size], [alpha])

    @property
    def num_parts(self) -> int:
        return int(self.alpha.shape[0])

    @property
    def sizes(self) -> np.ndarray:
        return np.rint(self.rho * self.ground_size).astype(int)

    @property
    def sigma(self) -> float:
        """Relative sparsity sum(rho_i * alpha_i)."""
        return float(np.dot(self.rho, self.alpha))

    def indices(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.membership == i)

    def with_alpha(self, alpha) -> "PartitionSpec":
        return PartitionSpec.from_membership(self.membership, np.asarray(alpha, float))


def condition_number(matrix) -> float:
    """sigma_max / sigma_min of a full-column-rank p x n matrix (p >= n)."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2:
        raise DomainError("matrix must be 2-D")
    p, n = M.shape
    if p < n:
        raise DomainError(f"need at least as many rows as columns, got {M.shape}")
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= max(p, n) * np.finfo(float).eps * s[0]:
        raise SingularMatrixError("matrix is numerically rank-deficient")
    return float(s[0] / s[-1])


@dataclass(frozen=True)
class Dictionary:
    """An analysis operator with full column rank and its condition number."""

    matrix: np.ndarray
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "matrix", _freeze(np.asarray(self.matrix, float)))

    @classmethod
    def from_matrix(cls, matrix) -> "Dictionary":
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix=matrix, kappa=condition_number(matrix))

    @classmethod
    def identity(cls, n: int) -> "Dictionary":
        return cls(matrix=np.eye(n), kappa=1.0)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def pinv(self) -> np.ndarray:
        return np.linalg.pinv(self.matrix)


def difference_operator(n: int) -> np.ndarray:
    """The (n-1) x n forward-difference matrix: row i is +1 at i, -1 at i+1."""
    n = int(n)
    if n < 2:
        raise DomainError(f"difference operator needs n >= 2, got {n}")
    D = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    D[idx, idx] = 1.0
    D[idx, idx + 1] = -1.0
    return D


def difference_condition_number(n: int) -> float:
    """kappa of the difference operator, from its known singular values.

    The singular values of the (n-1) x n forward difference are
    ``2 sin(j pi / (2n))`` for ``j = 1..n-1``.
    """
    n = int(n)
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    return float(np.sin((n - 1) * np.pi / (2 * n)) / np.sin(np.pi / (2 * n)))


def dct_dictionary(p: int, n: int) -> Dictionary:
    """Cosine-atom dictionary: row j holds the first n samples of atom j.

    Atom j is the orthonormal type-II cosine sequence of length p,
    ``c_j * cos(pi j (2t + 1) / (2p))``; keeping the first ``n <= p`` time
    samples of all p atoms gives a p x n matrix whose columns are exactly
    orthonormal (they are rows of an orthogonal matrix restricted to a
    column subset, transposed).  Columns are normalized defensively anyway.
    """
    p, n = int(p), int(n)
    if n < 1 or p < n:
        raise DomainError(f"need p >= n >= 1, got p={p}, n={n}")
    j = np.arange(p)[:, None]
    t = np.arange(p)[None, :]
    atoms = np.cos(np.pi * j * (2 * t + 1) / (2 * p)) * np.sqrt(2.0 / p)
    atoms[0, :] /= np.sqrt(2.0)
    M = atoms[:, :n].copy()
    M /= np.linalg.norm(M, axis=0, keepdims=True)
    return Dictionary.from_matrix(M)


@dataclass(frozen=True)
class BlockStructure:
    """Contiguous equal-length blocks: [n] split into q runs of length k."""

    n: int
    q: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.q < 1 or self.k < 1:
            raise DomainError("n, q, k must be positive")
        if self.q * self.k != self.n:
            raise DomainError(f"n must equal q*k, got n={self.n}, q={self.q}, k={self.k}")

    @classmethod
    def from_block_count(cls, n: int, q: int) -> "BlockStructure":
        n, q = int(n), int(q)
        if q < 1 or n % q != 0:
            raise DomainError(f"q must divide n, got n={n}, q={q}")
        return cls(n=n, q=q, k=n // q)

    @property
    def blocks(self) -> np.ndarray:
        """(q, k) index array; row b holds the indices of block b."""
        return np.arange(self.n).reshape(self.q, self.k)

    def block_view(self, x: np.ndarray) -> np.ndarray:
        """Reshape the trailing axis of x into (q, k) blocks."""
        x = np.asarray(x)
        return x.reshape(x.shape[:-1] + (self.q, self.k))


@dataclass(frozen=True)
class GradientProfile:
    """Complete classification of a signal's gradient support.

    Attributes
    ----------
    n : int
        Signal length; the gradient lives on ``n - 1`` positions.
    membership : ndarray (n-1,)
        Copy of the partition membership over gradient positions.
    d_sign : ndarray (n-1,)
        Sign of each gradient entry, in {-1, 0, +1}.
    pair_class : ndarray (n-2,)
        For interior coordinate ``i`` in ``{2..n-1}`` (stored at index
        i-2), the class of the pair ``(i, i-1)`` as an index into
        :data:`PAIR_CLASSES`.
    pair_counts : mapping class -> (L, L) int array
        ``pair_counts[c][a, b]`` counts pairs of class c whose later
        position lies in part a and earlier position in part b.
    first_jump, last_jump : bool
        Whether gradient positions 1 and n-1 are jumps (boundary terms).
    first_part, last_part : int
        Part ids of gradient positions 1 and n-1.
    """

    n: int
    membership: np.ndarray
    d_sign: np.ndarray
    pair_class: np.ndarray
    pair_counts: Mapping[str, np.ndarray]
    first_jump: bool
    last_jump: bool
    first_part: int
    last_part: int

    def __post_init__(self):
        object.__setattr__(self, "membership", _freeze(self.membership))
        object.__setattr__(self, "d_sign", _freeze(self.d_sign))
        object.__setattr__(self, "pair_class", _freeze(self.pair_class))
        object.__setattr__(
            self, "pair_counts", {c: _freeze(v) for c, v in self.pair_counts.items()}
        )

    @property
    def num_parts(self) -> int:
        return next(iter(self.pair_counts.values())).shape[0]

    @property
    def support(self) -> np.ndarray:
        """Gradient support S_g as positions into [0, n-1)."""
        return np.flatnonzero(self.d_sign != 0)

    # --- aggregate fractions -------------------------------------------------
    # Same-part fractions are diagonals of the count tables, cross-part
    # fractions are off-diagonal row sums attributed to the later index's
    # part; all are normalized by |P_i|.

    def _sizes(self) -> np.ndarray:
        return np.bincount(self.membership, minlength=self.num_parts).astype(float)

    def same_part_fraction(self, cls: str) -> np.ndarray:
        tab = self.pair_counts[cls]
        return np.diag(tab) / self._sizes()

    def cross_part_fraction(self, cls: str) -> np.ndarray:
        tab = self.pair_counts[cls].astype(float)
        return (tab.sum(axis=1) - np.diag(tab)) / self._sizes()

    def boundary_fraction(self) -> dict[str, np.ndarray]:
        """Indicator fractions for the four boundary cases, per part."""
        L = self.num_parts
        sizes = self._sizes()
        out = {}
        for name, jump, part in (
            ("head_jump", self.first_jump, self.first_part),
            ("head_flat", not self.first_jump, self.first_part),
            ("tail_jump", self.last_jump, self.last_part),
            ("tail_flat", not self.last_jump, self.last_part),
        ):
            v = np.zeros(L)
            if jump:
                v[part] = 1.0 / sizes[part]
            out[name] = v
        return out

    def global_fractions(self) -> dict[str, float]:
        """Whole-line fractions over n-1 gradient positions.

        ``consec_same``/``consec_opposite`` count both-jump pairs by sign
        product, ``jump_flat`` counts pairs with exactly one jump,
        ``boundary_jump``/``boundary_flat`` count the two boundary
        coordinates.  These are the single-partition specialization of the
        count tables.
        """
        m = float(self.n - 1)
        both = {c: self.pair_counts[c].sum() for c in PAIR_CLASSES}
        return {
            "consec_same": both["pp"] / m,
            "consec_opposite": both["pm"] / m,
            "jump_flat": (both["js"] + both["sj"]) / m,
            "flat_flat": both["ss"] / m,
            "boundary_jump": (int(self.first_jump) + int(self.last_jump)) / m,
            "boundary_flat": (int(not self.first_jump) + int(not self.last_jump)) / m,
        }


def gradient_support_profile(x, part: PartitionSpec) -> GradientProfile:
    """Classify the gradient support of ``x`` under a partition of [n-1]."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError("x must be a vector")
    n = x.shape[0]
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if part.ground_size != n - 1:
        raise DomainError(
            f"partition ground size {part.ground_size} != n-1 = {n - 1}"
        )
    d = x[:-1] - x[1:]
    d_sign = np.sign(d).astype(np.int64)
    L = part.num_parts
    counts = {c: np.zeros((L, L), dtype=np.int64) for c in PAIR_CLASSES}
    pair_class = np.empty(max(n - 2, 0), dtype=np.int64)
    member = part.membership
    for j in range(1, n - 1):  # later gradient position of the pair, 0-based
        a, b = member[j], member[j - 1]
        sj, sp = d_sign[j], d_sign[j - 1]
        if sj != 0 and sp != 0:
            cls = "pp" if sj == sp else "pm"
        elif sj != 0:
            cls = "js"
        elif sp != 0:
            cls = "sj"
        else:
            cls = "ss"
        counts[cls][a, b] += 1
        pair_class[j - 1] = PAIR_CLASSES.index(cls)
    return GradientProfile(
        n=n,
        membership=member.copy(),
        d_sign=d_sign,
        pair_class=pair_class,
        pair_counts=counts,
        first_jump=bool(d_sign[0] != 0),
        last_jump=bool(d_sign[n - 2] != 0),
        first_part=int(member[0]),
        last_part=int(member[n - 2]),
    )


def realized_accuracies(support, part: PartitionSpec) -> np.ndarray:
    """Exact per-part accuracies |P_i ∩ S| / |P_i| of an index set."""
    support = np.asarray(support, dtype=np.int64)
    if support.size and (support.min() < 0 or support.max() >= part.ground_size):
        raise DomainError("support index out of range")
    if np.unique(support).size != support.size:
        raise DomainError("support contains duplicate indices")
    L = part.num_parts
    hits = np.bincount(part.membership[support], minlength=L).astype(float)
    sizes = np.bincount(part.membership, minlength=L).astype(float)
    return hits / sizes


@dataclass(frozen=True)
class ModelInstance:
    """One concrete recovery problem: family, partition, and realization.

    Theory-only uses (bound curves) need just ``family``, ``part``, and the
    structural fields; Monte Carlo and recovery additionally need the
    realized signal data.  Accuracies in ``part`` are always the realized
    ones when a signal is attached.
    """

    family: Literal["entrywise", "block", "tv"]
    part: PartitionSpec
    x: np.ndarray | None = None
    dictionary: Dictionary | None = None
    coeffs: np.ndarray | None = None          # analysis coefficients of x
    support: np.ndarray | None = None         # entrywise: in [p]; block: in [q]
    signs: np.ndarray | None = None           # length p, zero off support
    block: BlockStructure | None = None
    directions: np.ndarray | None = None      # (q, k), unit rows on support
    profile: GradientProfile | None = None

    def __post_init__(self):
        if self.family not in ("entrywise", "block", "tv"):
            raise DomainError(f"unknown family {self.family!r}")
        if self.family == "block" and self.block is None:
            raise DomainError("block instances need a BlockStructure")
        if self.family == "tv" and self.profile is None and self.x is not None:
            raise DomainError("tv instances with a signal need a GradientProfile")
        for name in ("x", "coeffs", "support", "signs", "directions"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _freeze(np.asarray(v)))

    @property
    def kappa(self) -> float:
        if self.family == "entrywise":
            return 1.0 if self.dictionary is None else self.dictionary.kappa
        if self.family == "tv":
            return difference_condition_number(self.signal_dim)
        return 1.0

    @property
    def signal_dim(self) -> int:
        """Ambient dimension n of the signal being recovered."""
        if self.family == "entrywise":
            if self.dictionary is not None:
                return self.dictionary.n
            return self.part.ground_size
        if self.family == "block":
            return self.block.n
        if self.profile is not None:
            return self.profile.n
        return self.part.ground_size + 1

    @property
    def normalizer(self) -> int:
        """Ground size the normalized bound refers to (p, q, or n-1)."""
        return self.part.ground_size
