import collections.abc
import dataclasses
import enum
import logging
import math
import time
import typing

import numpy as np

from volume_al.errors import ConfigError, ShapeError
from volume_al.kernel import KernelMatrix, KernelSpec, kernel_matrix, resolve_kernel

__all__ = [
    "ScoreVariant",
    "SparsifyParams",
    "SubsetIndices",
    "confidence_scores",
    "deflate",
    "sequential_select",
    "sparsify_halve",
]

logger = logging.getLogger(__name__)

EXCLUDED = -math.inf


class ScoreVariant(enum.Enum):
    # s^2 / (d + mu)
    PAPER = "paper"
    # s / (d + mu), sequential transductive experimental design
    TED = "ted"


@dataclasses.dataclass(frozen=True)
class SparsifyParams:
    mu: float = 0.1
    target_fraction: float = 0.5
    score_variant: ScoreVariant = ScoreVariant.PAPER

    def __post_init__(self):
        object.__setattr__(self, "score_variant", ScoreVariant(self.score_variant))
        if not self.mu > 0:
            raise ConfigError(f"mu must be positive, got {self.mu}")
        if not 0 < self.target_fraction <= 1:
            raise ConfigError(
                f"target_fraction must be in (0, 1], got {self.target_fraction}"
            )

    def target_size(self, n: int) -> int:
        return int(math.floor(n * self.target_fraction))


class SubsetIndices(collections.abc.Sequence):
    """Ordered, duplicate-free indices into a data set, in selection order."""

    __slots__ = ("_indices",)

    def __init__(self, indices: typing.Iterable[int] = ()):
        self._indices = tuple(int(i) for i in indices)
        if len(set(self._indices)) != len(self._indices):
            raise ShapeError(f"duplicate indices in {self._indices}")
        if any(i < 0 for i in self._indices):
            raise ShapeError(f"negative index in {self._indices}")

    def __getitem__(self, key):
        if isinstance(key, slice):
            return type(self)(self._indices[key])
        return self._indices[key]

    def __len__(self) -> int:
        return len(self._indices)

    def __eq__(self, other: typing.Any) -> bool:
        if isinstance(other, SubsetIndices):
            return self._indices == other._indices
        if isinstance(other, (list, tuple)):
            return self._indices == tuple(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._indices)

    def __repr__(self) -> str:
        return f"SubsetIndices({list(self._indices)})"

    def to_array(self) -> np.ndarray:
        return np.array(self._indices, dtype=np.int64)

    def is_prefix_of(self, other: "SubsetIndices") -> bool:
        return other._indices[: len(self)] == self._indices


def _check_mu(mu: float) -> None:
    if not mu > 0:
        raise ConfigError(f"mu must be positive, got {mu}")


def _scores(
    K: np.ndarray, mu: float, variant: ScoreVariant, excluded: typing.Iterable[int]
) -> np.ndarray:
    # s_l = K(l, :) . K(:, l), a row norm since K stays exactly symmetric
    s = np.einsum("ij,ij->i", K, K)
    if variant is ScoreVariant.PAPER:
        s = s * s
    scores = s / (np.diag(K) + mu)
    excluded = list(excluded)
    if excluded:
        scores[excluded] = EXCLUDED
    return scores


def confidence_scores(
    K: KernelMatrix,
    mu: float,
    excluded: typing.Iterable[int] = (),
    variant: ScoreVariant = ScoreVariant.PAPER,
) -> np.ndarray:
    _check_mu(mu)
    return _scores(K.entries, mu, ScoreVariant(variant), excluded)


def _deflate_inplace(K: np.ndarray, selected: int, mu: float) -> None:
    column = K[:, selected].copy()
    K -= np.outer(column, column) / (column[selected] + mu)


def deflate(K: KernelMatrix, selected: int, mu: float) -> KernelMatrix:
    """Remove the direction of `selected` from K by a rank-one update."""
    _check_mu(mu)
    if not 0 <= selected < K.n:
        raise ShapeError(f"selected index {selected} outside [0, {K.n})")
    entries = K.entries.copy()
    _deflate_inplace(entries, selected, mu)
    return KernelMatrix(entries, K.spec)


def sequential_select(
    K: KernelMatrix, count: int, mu: float, variant: ScoreVariant
) -> SubsetIndices:
    """Greedy select-then-deflate loop, `count` rounds.

    Each round appends the unselected index with the highest confidence score
    (lowest index on ties) and deflates the working copy of K at that index.
    Every round is a rank-1 update of the full n x n matrix, so selecting half
    the points costs O(n^3).
    """
    _check_mu(mu)
    variant = ScoreVariant(variant)
    if not 0 <= count <= K.n:
        raise ConfigError(f"cannot select {count} of {K.n} points")
    work = K.entries.copy()
    selected: typing.List[int] = []
    for _ in range(count):
        scores = _scores(work, mu, variant, selected)
        best = int(np.argmax(scores))
        selected.append(best)
        _deflate_inplace(work, best, mu)
    return SubsetIndices(selected)


def sparsify_halve(
    X, spec: KernelSpec, params: SparsifyParams = SparsifyParams()
) -> SubsetIndices:
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ConfigError(f"sparsification needs at least 2 points, got {n}")
    count = params.target_size(n)
    if count < 1:
        raise ConfigError(
            f"target_fraction {params.target_fraction} keeps no points of {n}"
        )
    start = time.perf_counter()
    K = kernel_matrix(X, resolve_kernel(spec, X))
    built = time.perf_counter()
    pool = sequential_select(K, count, params.mu, params.score_variant)
    logger.info(
        "Sparsified %d -> %d points (%s score): kernel %.1f ms, selection %.1f ms",
        n,
        count,
        params.score_variant.value,
        1000 * (built - start),
        1000 * (time.perf_counter() - built),
    )
    return pool
