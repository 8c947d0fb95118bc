"""Config-driven experiments: phase grids and weighted-vs-unit comparisons.

Configs are INI files with four sections::

    [experiment]
    family = entrywise | block | tv
    trials = 100
    base_seed = 7
    success_threshold = 0.001     ; optional, relative l2 error for success
    weights = unit | optimal | per-trial   ; optional, default unit
    out = results/run.csv         ; optional, CLI --out overrides

    [model]
    n = 90                        ; signal length
    p = 90                        ; entrywise only: dictionary rows (default n)
    dictionary = identity | dct   ; entrywise only (default identity)
    k = 10                        ; block only: block length (q = n/k)

    [partition]                   ; required by compare, ignored by phase-grid
    sizes = 10, 90                ; part sizes over the ground set (p, q, n-1)
    alpha = 0.7, 0.033            ; per-part accuracies, or:
    counts = 7, 3                 ; per-part support counts (alpha = counts/sizes)
    shuffle = true                ; per-trial random membership (TV protocol);
    support = 6                   ; then the total support count goes here

    [grid]
    m = 10:90:5                   ; inclusive start:stop:step, or a comma list
    s = 4, 8, 12, 16              ; phase-grid only: support sizes

Reproducibility contract: the random stream of a grid cell is derived as
``Philox(key = first 8 bytes, big endian, of SHA-256("base:family:s:m"))``
and trial t splits off sub-streams ``(cell_seed, t, "matrix")`` /
``(cell_seed, t, "signal")`` / ``(cell_seed, t, "partition")`` by the same
recipe (see :mod:`statdim.mc`).  The cell key does NOT include the weight
mode, so unit and weighted curves see identical instances (paired
comparison).  Results are byte-identical for any worker count.

CSV schema (bit-exact header)::

    family,n,p_or_q,s,m,trials,successes,prob,m_hat,width,seed

``m_hat`` and ``width`` are on the measurement scale (the normalized bound
times the ground size) so they can be read against the ``m`` column; the
attached theory uses the config's nominal pattern (weighted curves use the
nominal optimal weights, even in per-trial mode).  ``seed`` is the config
base seed.  Probabilities and theory values are written with 6 decimals.

Per-trial weight protocol: weights are recomputed from each instance's
realized accuracies.  A part with no realized support has optimal weight
+inf; such weights are capped at ``1e6`` before solving (the capped
program's minimizer is numerically indistinguishable from the constrained
limit at these scales, and the solver only accepts finite weights).
"""
from __future__ import annotations

import configparser
import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds, weights
from .errors import (
    ConfigError,
    NoConvergenceError,
    SingularMatrixError,
)
from .models import (
    BlockStructure,
    Dictionary,
    ModelInstance,
    PartitionSpec,
    dct_dictionary,
    gradient_support_profile,
    realized_accuracies,
)
from .solvers import (
    is_success,
    solve_weighted_analysis,
    solve_weighted_block,
    solve_weighted_tv,
)
from .synth import (
    InstanceSeed,
    block_instance,
    entrywise_instance,
    gaussian_matrix,
    gradient_instance,
)

__all__ = [
    "ExperimentConfig",
    "CellResult",
    "GridResult",
    "CSV_HEADER",
    "run_phase_grid",
    "run_weight_comparison",
    "write_csv",
]

CSV_HEADER = "family,n,p_or_q,s,m,trials,successes,prob,m_hat,width,seed"

_FAMILIES = ("entrywise", "block", "tv")
_WEIGHT_MODES = ("unit", "optimal", "per-trial")

#: Finite stand-in for an infinite per-part weight (see module docstring).
_INF_WEIGHT_CAP = 1e6

#: Finite stand-in used inside bound evaluations (beyond kernel underflow).
_INF_THEORY_CAP = 1e4


def _derived_seed(*labels) -> int:
    """Deterministic 64-bit sub-seed; same recipe as mc.derive_rng keys."""
    payload = ":".join(str(x) for x in labels).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


def _parse_grid(text: str, key: str) -> tuple[int, ...]:
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3:
                raise ValueError("expected start:stop[:step]")
            start, stop, step = parts
            if step < 1 or stop < start:
                raise ValueError("need stop >= start and step >= 1")
            values = tuple(range(start, stop + 1, step))
        else:
            values = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad grid for key '{key}': {text!r} ({exc})") from exc
    if not values:
        raise ConfigError(f"grid '{key}' is empty")
    return values


def _parse_list(text: str, key: str, cast):
    try:
        return tuple(cast(x.strip()) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad value for key '{key}': {text!r}") from exc


_MISSING = object()


class _Section:
    """A config section wrapper producing key-named errors."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self._name = name
        self._sec = parser[name] if parser.has_section(name) else None

    @property
    def present(self) -> bool:
        return self._sec is not None

    def get(self, key: str, cast=str, default=_MISSING):
        if self._sec is None or key not in self._sec:
            if default is _MISSING:
                raise ConfigError(f"missing key '{key}' in section [{self._name}]")
            return default
        raw = self._sec[key].strip()
        try:
            if cast is bool:
                lowered = raw.lower()
                if lowered in ("1", "true", "yes", "on"):
                    return True
                if lowered in ("0", "false", "no", "off"):
                    return False
                raise ValueError("not a boolean")
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(
                f"bad value for key '{key}' in section [{self._name}]: {raw!r}"
            ) from exc

    def raw(self, key: str) -> str | None:
        if self._sec is None or key not in self._sec:
            return None
        return self._sec[key].strip()


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated experiment description.

    Constructed from an INI file (:meth:`from_file` / :meth:`from_text`);
    :meth:`to_text` serializes back so that parsing the result reproduces
    an equal config (defaults are materialized, grids become comma lists).
    """

    family: str
    n: int
    m_grid: tuple[int, ...]
    trials: int
    base_seed: int
    p: int | None = None                  # entrywise: dictionary rows
    dictionary: str | None = None         # entrywise: identity | dct
    k: int | None = None                  # block: block length
    sizes: tuple[int, ...] | None = None
    alpha: tuple[float, ...] | None = None
    shuffle: bool = False
    total_support: int | None = None
    s_grid: tuple[int, ...] | None = None
    success_threshold: float = 1e-3
    weights_mode: str = "unit"
    out: str | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigError(
                f"bad value for key 'family': {self.family!r} "
                f"(expected one of {', '.join(_FAMILIES)})"
            )
        if self.n < 2:
            raise ConfigError(f"bad value for key 'n': {self.n} (need n >= 2)")
        if self.family == "entrywise":
            if self.k is not None:
                raise ConfigError("key 'k' only applies to the block family")
            if self.dictionary not in ("identity", "dct"):
                raise ConfigError(
                    f"bad value for key 'dictionary': {self.dictionary!r}"
                )
            if self.p is None or self.p < self.n:
                raise ConfigError(f"bad value for key 'p': {self.p!r} (need p >= n)")
            if self.dictionary == "identity" and self.p != self.n:
                raise ConfigError("identity dictionary requires p = n")
        elif self.family == "block":
            if self.p is not None or self.dictionary is not None:
                raise ConfigError("keys 'p'/'dictionary' only apply to entrywise")
            if self.k is None or self.k < 1 or self.n % self.k != 0:
                raise ConfigError(
                    f"bad value for key 'k': {self.k!r} (must divide n={self.n})"
                )
        else:
            if self.p is not None or self.dictionary is not None or self.k is not None:
                raise ConfigError("keys 'p'/'dictionary'/'k' do not apply to tv")
        if self.trials < 1:
            raise ConfigError(f"bad value for key 'trials': {self.trials}")
        if not 0.0 < self.success_threshold < 1.0:
            raise ConfigError(
                f"bad value for key 'success_threshold': {self.success_threshold!r}"
            )
        if self.weights_mode not in _WEIGHT_MODES:
            raise ConfigError(
                f"bad value for key 'weights': {self.weights_mode!r} "
                f"(expected one of {', '.join(_WEIGHT_MODES)})"
            )
        if not self.m_grid:
            raise ConfigError("grid 'm' is empty")
        for m in self.m_grid:
            if m < 0 or m > self.n:
                raise ConfigError(f"bad value in grid 'm': {m} (need 0 <= m <= n)")
        ground = self.ground_size
        if self.s_grid is not None:
            for s in self.s_grid:
                if s < 0 or s > ground:
                    raise ConfigError(
                        f"bad value in grid 's': {s} (need 0 <= s <= {ground})"
                    )
        if self.sizes is not None:
            if any(sz < 1 for sz in self.sizes):
                raise ConfigError(f"bad value for key 'sizes': {self.sizes}")
            if sum(self.sizes) != ground:
                raise ConfigError(
                    f"bad value for key 'sizes': sum {sum(self.sizes)} != "
                    f"ground size {ground}"
                )
            if self.shuffle:
                if self.alpha is not None:
                    raise ConfigError(
                        "keys 'alpha'/'counts' conflict with 'shuffle'; "
                        "use 'support'"
                    )
                if self.total_support is None:
                    raise ConfigError("missing key 'support' in section [partition]")
                if not 0 <= self.total_support <= ground:
                    raise ConfigError(
                        f"bad value for key 'support': {self.total_support}"
                    )
            else:
                if self.alpha is None:
                    raise ConfigError("missing key 'alpha' in section [partition]")
                if len(self.alpha) != len(self.sizes):
                    raise ConfigError(
                        "keys 'sizes' and 'alpha' must have the same length"
                    )
                if any(not 0.0 <= a <= 1.0 for a in self.alpha):
                    raise ConfigError(f"bad value for key 'alpha': {self.alpha}")
        elif self.shuffle or self.alpha is not None or self.total_support is not None:
            raise ConfigError("missing key 'sizes' in section [partition]")

    # -- derived sizes ------------------------------------------------------

    @property
    def ground_size(self) -> int:
        if self.family == "entrywise":
            return self.p
        if self.family == "block":
            return self.n // self.k
        return self.n - 1

    @property
    def p_or_q(self) -> int:
        return self.ground_size

    def partition(self) -> PartitionSpec | None:
        """The nominal partition (contiguous parts), or None without one."""
        if self.sizes is None or self.shuffle:
            return None
        return PartitionSpec.from_sizes(self.sizes, self.alpha)

    def nominal_support(self) -> int:
        """Total nominal support count of the configured pattern."""
        if self.shuffle:
            return int(self.total_support)
        if self.sizes is None:
            raise ConfigError("missing key 'sizes' in section [partition]")
        return int(
            np.rint(np.asarray(self.alpha) * np.asarray(self.sizes)).sum()
        )

    # -- parsing / serialization --------------------------------------------

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        return cls.from_text(p.read_text())

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        exp = _Section(parser, "experiment")
        model = _Section(parser, "model")
        partition = _Section(parser, "partition")
        grid = _Section(parser, "grid")
        if not exp.present:
            raise ConfigError("missing section [experiment]")
        if not model.present:
            raise ConfigError("missing section [model]")
        if not grid.present:
            raise ConfigError("missing section [grid]")

        family = exp.get("family")
        n = model.get("n", int)
        p = dictionary = k = None
        if family == "entrywise":
            p = model.get("p", int, default=n)
            dictionary = model.get("dictionary", default="identity")
        elif family == "block":
            k = model.get("k", int)

        sizes = alpha = total_support = None
        shuffle = False
        if partition.present:
            sizes = _parse_list(partition.get("sizes"), "sizes", int)
            shuffle = partition.get("shuffle", bool, default=False)
            counts_raw = partition.raw("counts")
            alpha_raw = partition.raw("alpha")
            if counts_raw is not None and alpha_raw is not None:
                raise ConfigError(
                    "keys 'alpha' and 'counts' are mutually exclusive"
                )
            if counts_raw is not None:
                counts = _parse_list(counts_raw, "counts", int)
                if len(counts) != len(sizes):
                    raise ConfigError(
                        "keys 'sizes' and 'counts' must have the same length"
                    )
                if any(c < 0 or c > sz for c, sz in zip(counts, sizes)):
                    raise ConfigError(f"bad value for key 'counts': {counts}")
                alpha = tuple(c / sz for c, sz in zip(counts, sizes))
            elif alpha_raw is not None:
                alpha = _parse_list(alpha_raw, "alpha", float)
            total_support = partition.get("support", int, default=None)

        s_raw = grid.raw("s")
        return cls(
            family=family,
            n=n,
            p=p,
            dictionary=dictionary,
            k=k,
            sizes=sizes,
            alpha=alpha,
            shuffle=shuffle,
            total_support=total_support,
            m_grid=_parse_grid(grid.get("m"), "m"),
            s_grid=_parse_grid(s_raw, "s") if s_raw is not None else None,
            trials=exp.get("trials", int),
            base_seed=exp.get("base_seed", int),
            success_threshold=exp.get("success_threshold", float, default=1e-3),
            weights_mode=exp.get("weights", default="unit"),
            out=exp.get("out", default=None),
        )

    def to_text(self) -> str:
        lines = [
            "[experiment]",
            f"family = {self.family}",
            f"trials = {self.trials}",
            f"base_seed = {self.base_seed}",
            f"success_threshold = {self.success_threshold!r}",
            f"weights = {self.weights_mode}",
        ]
        if self.out is not None:
            lines.append(f"out = {self.out}")
        lines += ["", "[model]", f"n = {self.n}"]
        if self.family == "entrywise":
            lines += [f"p = {self.p}", f"dictionary = {self.dictionary}"]
        elif self.family == "block":
            lines.append(f"k = {self.k}")
        if self.sizes is not None:
            lines += ["", "[partition]"]
            lines.append("sizes = " + ", ".join(str(s) for s in self.sizes))
            if self.alpha is not None:
                lines.append("alpha = " + ", ".join(repr(a) for a in self.alpha))
            if self.shuffle:
                lines.append("shuffle = true")
            if self.total_support is not None:
                lines.append(f"support = {self.total_support}")
        lines += ["", "[grid]"]
        lines.append("m = " + ", ".join(str(m) for m in self.m_grid))
        if self.s_grid is not None:
            lines.append("s = " + ", ".join(str(s) for s in self.s_grid))
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Results
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CellResult:
    """One grid cell: empirical successes plus the attached theory values."""

    family: str
    n: int
    p_or_q: int
    s: int
    m: int
    trials: int
    successes: int
    m_hat: float          # theory bound, measurement scale
    width: float          # theory band width, measurement scale
    seed: int
    label: str            # unit | optimal | per-trial
    wall_time: float

    @property
    def prob(self) -> float:
        return self.successes / self.trials

    def csv_row(self) -> str:
        return (
            f"{self.family},{self.n},{self.p_or_q},{self.s},{self.m},"
            f"{self.trials},{self.successes},{self.prob:.6f},"
            f"{self.m_hat:.6f},{self.width:.6f},{self.seed}"
        )


@dataclass(frozen=True)
class GridResult:
    """Cells in submission order (s outer, m inner, one label per curve)."""

    cells: tuple[CellResult, ...]

    def filter(self, label: str) -> "GridResult":
        return GridResult(tuple(c for c in self.cells if c.label == label))

    @property
    def labels(self) -> tuple[str, ...]:
        seen = []
        for c in self.cells:
            if c.label not in seen:
                seen.append(c.label)
        return tuple(seen)

    def to_csv(self) -> str:
        return "\n".join([CSV_HEADER] + [c.csv_row() for c in self.cells]) + "\n"

    def crossing(self, s: int, level: float = 0.5, label: str | None = None) -> int | None:
        """Smallest m in the grid with empirical probability >= level."""
        for c in self.cells:
            if c.s == s and (label is None or c.label == label) and c.prob >= level:
                return c.m
        return None

    def summary(self) -> str:
        lines = []
        for label in self.labels:
            for s in dict.fromkeys(c.s for c in self.cells if c.label == label):
                sub = [c for c in self.cells if c.label == label and c.s == s]
                cross = self.crossing(s, 0.5, label)
                cross_txt = "never" if cross is None else f"m={cross}"
                lines.append(
                    f"{label:>9} s={s:<4d} 50% crossing {cross_txt:>8}   "
                    f"theory m_hat={sub[0].m_hat:.2f} width={sub[0].width:.2f}"
                )
        return "\n".join(lines)


def write_csv(result: GridResult, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(result.to_csv())
    return p


# --------------------------------------------------------------------------
# Per-cell execution
# --------------------------------------------------------------------------


def _dictionary_of(config: ExperimentConfig) -> Dictionary | None:
    if config.family != "entrywise" or config.dictionary == "identity":
        return None
    return dct_dictionary(config.p, config.n)


def _blocks_of(config: ExperimentConfig) -> BlockStructure:
    return BlockStructure.from_block_count(config.n, config.n // config.k)


def _cell_partition(config: ExperimentConfig, s: int) -> PartitionSpec:
    """Partition used to GENERATE instances for a cell."""
    nominal = config.partition()
    if nominal is not None:
        return nominal
    # phase-grid cells and shuffled protocols place support uniformly
    return PartitionSpec.single(config.ground_size, s / config.ground_size)


def _generate(config: ExperimentConfig, s: int, iseed: InstanceSeed) -> ModelInstance:
    part = _cell_partition(config, s)
    if config.family == "entrywise":
        return entrywise_instance(_dictionary_of(config), part, iseed)
    if config.family == "block":
        return block_instance(_blocks_of(config), part, iseed)
    inst = gradient_instance(config.n, part, iseed)
    if not config.shuffle:
        return inst
    # re-read the realized pattern against a per-trial shuffled membership
    base = np.repeat(np.arange(len(config.sizes)), config.sizes)
    membership = iseed.rng("partition").permutation(base)
    holder = PartitionSpec.from_membership(membership, np.zeros(len(config.sizes)))
    profile = gradient_support_profile(inst.x, holder)
    realized = realized_accuracies(profile.support, holder)
    return ModelInstance(
        family="tv", part=holder.with_alpha(realized), x=inst.x, profile=profile
    )


def _omega_realized(instance: ModelInstance, k: int | None) -> np.ndarray:
    """Per-part optimal weights from REALIZED accuracies; inf on dead parts."""
    alpha = instance.part.alpha
    L = alpha.shape[0]
    dead = alpha <= 0.0
    if instance.family == "tv":
        if not dead.any():
            return weights.tv_weights(instance.profile, instance.part).omega
        return weights._tv_weights_pinned(instance.profile, instance.part, dead).omega
    omega = np.full(L, np.inf)
    if not dead.all():
        live = np.asarray(alpha[~dead])
        if instance.family == "entrywise":
            omega[~dead] = weights.entrywise_weights(live).omega
        else:
            omega[~dead] = weights.block_weights(live, k).omega
    return omega


def _nominal_instance(config: ExperimentConfig, s: int) -> ModelInstance:
    """Cell-independent realization used for theory rows and nominal weights."""
    seed = InstanceSeed(_derived_seed(config.base_seed, config.family, "nominal", s), 0)
    return _generate(config, s, seed)


def _nominal_omega(config: ExperimentConfig, s: int) -> np.ndarray:
    if config.family == "tv" or config.shuffle:
        return _omega_realized(_nominal_instance(config, s), config.k)
    part = _cell_partition(config, s)
    alpha = part.alpha
    dead = alpha <= 0.0
    omega = np.full(alpha.shape[0], np.inf)
    if not dead.all():
        if config.family == "entrywise":
            omega[~dead] = weights.entrywise_weights(alpha[~dead]).omega
        else:
            omega[~dead] = weights.block_weights(alpha[~dead], config.k).omega
    return omega


def _theory(config: ExperimentConfig, s: int, label: str) -> bounds.BoundReport:
    """Bound report for the cell's nominal pattern (see module docstring)."""
    if config.family == "tv" or config.shuffle:
        model = _nominal_instance(config, s)
    elif config.family == "entrywise":
        model = ModelInstance(
            family="entrywise",
            part=_cell_partition(config, s),
            dictionary=_dictionary_of(config),
        )
    else:
        model = ModelInstance(
            family="block", part=_cell_partition(config, s), block=_blocks_of(config)
        )
    omega = None
    if label != "unit":
        omega = np.minimum(_nominal_omega(config, s), _INF_THEORY_CAP)
    return bounds.m_hat(model, omega)


def _solve_trial(
    config: ExperimentConfig,
    instance: ModelInstance,
    A: np.ndarray,
    b: np.ndarray,
    omega: np.ndarray | None,
) -> bool:
    part = instance.part
    w_part = (
        np.ones(part.num_parts)
        if omega is None
        else np.minimum(np.asarray(omega, dtype=float), _INF_WEIGHT_CAP)
    )
    w = w_part[part.membership]
    if config.family == "entrywise":
        Om = np.eye(config.n) if instance.dictionary is None else instance.dictionary.matrix
        result = solve_weighted_analysis(A, b, Om, w)
    elif config.family == "block":
        result = solve_weighted_block(A, b, instance.block, w)
    else:
        result = solve_weighted_tv(A, b, config.n, w)
    if not result.converged:
        return False
    return is_success(result.x_hat, instance.x, rel_tol=config.success_threshold)


def _run_cell(payload) -> CellResult:
    config, label, s, m = payload
    start = time.perf_counter()
    cell_seed = _derived_seed(config.base_seed, config.family, s, m)
    nominal_omega = _nominal_omega(config, s) if label == "optimal" else None
    successes = 0
    for t in range(config.trials):
        iseed = InstanceSeed(cell_seed, t)
        instance = _generate(config, s, iseed)
        if m == 0:
            if is_success(
                np.zeros(config.n), instance.x, rel_tol=config.success_threshold
            ):
                successes += 1
            continue
        A = gaussian_matrix(m, config.n, iseed)
        b = A @ instance.x
        try:
            if label == "unit":
                omega = None
            elif label == "optimal":
                omega = nominal_omega
            else:
                omega = _omega_realized(instance, config.k)
            if _solve_trial(config, instance, A, b, omega):
                successes += 1
        except (NoConvergenceError, SingularMatrixError):
            continue  # counted as failure
    report = _theory(config, s, label)
    return CellResult(
        family=config.family,
        n=config.n,
        p_or_q=config.p_or_q,
        s=s,
        m=m,
        trials=config.trials,
        successes=successes,
        m_hat=report.theory_m,
        width=report.sandwich_width * report.normalizer,
        seed=config.base_seed,
        label=label,
        wall_time=time.perf_counter() - start,
    )


def _execute(payloads, threads: int) -> list[CellResult]:
    if threads <= 1:
        return [_run_cell(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_cell, payloads))


# --------------------------------------------------------------------------
# Drivers
# --------------------------------------------------------------------------


def run_phase_grid(config: ExperimentConfig, threads: int = 1) -> GridResult:
    """Unit-weight success probabilities over the (s, m) grid.

    Instances place ``s`` support elements uniformly at random (single-part
    partition); the theory column is the unweighted bound for each s.
    Solver non-convergence counts as failure.
    """
    if config.s_grid is None:
        raise ConfigError("missing key 's' in section [grid] (phase-grid needs it)")
    payloads = [
        (config, "unit", s, m) for s in config.s_grid for m in config.m_grid
    ]
    return GridResult(tuple(_execute(payloads, threads)))


def run_weight_comparison(config: ExperimentConfig, threads: int = 1) -> GridResult:
    """Unit-weight and weighted success curves over the m grid.

    The weight mode ('optimal' = nominal accuracies once, 'per-trial' =
    realized accuracies per instance) comes from the config or the CLI
    override.  Both curves see identical instances and matrices.
    """
    if config.sizes is None:
        raise ConfigError("missing section [partition] (compare needs it)")
    weighted = "per-trial" if config.weights_mode == "per-trial" else "optimal"
    s = config.nominal_support()
    payloads = [
        (config, label, s, m) for label in ("unit", weighted) for m in config.m_grid
    ]
    return GridResult(tuple(_execute(payloads, threads)))
