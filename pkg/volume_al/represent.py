import dataclasses
import enum
import logging
import typing

import numpy as np
from scipy.spatial.distance import cdist

from volume_al.errors import ConfigError, ShapeError
from volume_al.sparsify import SubsetIndices

__all__ = [
    "InitMode",
    "EmParams",
    "Representation",
    "assign",
    "update_centers",
    "structure_loss",
    "em_representation",
    "snap_to_data",
]

logger = logging.getLogger(__name__)


class InitMode(enum.Enum):
    PASSIVE_RANDOM = "passive_random"
    PLUS_PLUS = "plus_plus"
    GIVEN = "given"


@dataclasses.dataclass(frozen=True)
class EmParams:
    tol: float = 1e-9
    max_iter: int = 300
    init: InitMode = InitMode.PASSIVE_RANDOM
    restarts: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "init", InitMode(self.init))
        if self.tol < 0:
            raise ConfigError(f"tol must be non-negative, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be at least 1, got {self.restarts}")


@dataclasses.dataclass(frozen=True)
class Representation:
    centers: np.ndarray
    assignments: np.ndarray
    loss_trace: typing.Tuple[float, ...]
    iterations: int
    converged: bool

    @property
    def loss(self) -> float:
        return self.loss_trace[-1]

    @property
    def k(self) -> int:
        return self.centers.shape[0]


def _check_dims(X: np.ndarray, centers: np.ndarray) -> None:
    if X.ndim != 2 or centers.ndim != 2:
        raise ShapeError("points and centers must be matrices")
    if X.shape[1] != centers.shape[1]:
        raise ShapeError(
            f"dimension mismatch: points have {X.shape[1]}, "
            f"centers have {centers.shape[1]}"
        )


def assign(X, centers) -> np.ndarray:
    """Nearest center by squared Euclidean distance, lowest id on ties."""
    X = np.asarray(X, dtype=float)
    centers = np.asarray(centers, dtype=float)
    _check_dims(X, centers)
    if centers.shape[0] < 1:
        raise ConfigError("need at least one center")
    return np.argmin(cdist(X, centers, "sqeuclidean"), axis=1)


def update_centers(
    X, assignments, k: int, previous: typing.Optional[np.ndarray] = None
) -> np.ndarray:
    """Mean of each cluster; an empty cluster keeps its previous center."""
    X = np.asarray(X, dtype=float)
    assignments = np.asarray(assignments)
    centers = np.zeros((k, X.shape[1]))
    for i in range(k):
        members = X[assignments == i]
        if members.shape[0]:
            centers[i] = members.mean(axis=0)
        elif previous is not None:
            centers[i] = previous[i]
        else:
            raise ConfigError(f"cluster {i} is empty and has no previous center")
    return centers


def structure_loss(X, centers, assignments) -> float:
    X = np.asarray(X, dtype=float)
    diff = X - np.asarray(centers)[np.asarray(assignments)]
    return float(np.sum(diff * diff))


def _repair_empty(
    X: np.ndarray, centers: np.ndarray, assignments: np.ndarray, k: int
) -> None:
    # move the point farthest from its center into each empty cluster, only
    # taking points from clusters that keep at least one member
    counts = np.bincount(assignments, minlength=k)
    for empty in np.flatnonzero(counts == 0):
        d2 = np.sum((X - centers[assignments]) ** 2, axis=1)
        d2[counts[assignments] < 2] = -1.0
        donor_point = int(np.argmax(d2))
        donor = assignments[donor_point]
        assignments[donor_point] = empty
        counts[donor] -= 1
        counts[empty] += 1
        centers[empty] = X[donor_point]
        centers[donor] = X[assignments == donor].mean(axis=0)


def _init_centers(
    X: np.ndarray, k: int, mode: InitMode, rng: np.random.Generator
) -> np.ndarray:
    n = X.shape[0]
    if mode is InitMode.PASSIVE_RANDOM:
        return X[rng.choice(n, k, replace=False)].copy()
    chosen = [int(rng.integers(n))]
    d2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        weights = d2.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=weights / total))
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[chosen].copy()


def _lloyd(
    X: np.ndarray, centers: np.ndarray, k: int, params: EmParams
) -> Representation:
    assignments = assign(X, centers)
    trace: typing.List[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iter + 1):
        centers = update_centers(X, assignments, k, centers)
        _repair_empty(X, centers, assignments, k)
        trace.append(structure_loss(X, centers, assignments))
        if len(trace) > 1 and abs(trace[-2] - trace[-1]) <= params.tol:
            converged = True
            break
        assignments = assign(X, centers)
    return Representation(
        centers=centers,
        assignments=assignments,
        loss_trace=tuple(trace),
        iterations=iterations,
        converged=converged,
    )


def em_representation(
    X, k: int, params: EmParams = EmParams(), initial_centers=None
) -> Representation:
    """Alternate nearest-center assignment and mean updates until the
    structure loss stops changing by more than ``params.tol``.

    With ``init=given`` the caller supplies ``initial_centers``; otherwise
    ``params.restarts`` seeded runs are made and the lowest final loss kept.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError(f"points must be a matrix, got shape {X.shape}")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"cannot represent {n} points with {k} centers")

    if params.init is InitMode.GIVEN:
        if initial_centers is None:
            raise ConfigError("init=given needs initial_centers")
        centers = np.array(initial_centers, dtype=float)
        _check_dims(X, centers)
        if centers.shape[0] != k:
            raise ShapeError(f"expected {k} initial centers, got {centers.shape[0]}")
        best = _lloyd(X, centers, k, params)
    else:
        rng = np.random.default_rng(params.seed)
        best = None
        for _ in range(params.restarts):
            run = _lloyd(X, _init_centers(X, k, params.init, rng), k, params)
            if best is None or run.loss < best.loss:
                best = run

    logger.debug(
        "EM with %d centers on %d points: %d iterations, loss %.6g, converged=%s",
        k,
        n,
        best.iterations,
        best.loss,
        best.converged,
    )
    return best


def snap_to_data(centers, X) -> SubsetIndices:
    """Index of the nearest unused point for each center, in center order."""
    X = np.asarray(X, dtype=float)
    centers = np.asarray(centers, dtype=float)
    _check_dims(X, centers)
    if centers.shape[0] > X.shape[0]:
        raise ConfigError(
            f"cannot snap {centers.shape[0]} centers to {X.shape[0]} points"
        )
    d2 = cdist(centers, X, "sqeuclidean")
    used: typing.List[int] = []
    for row in d2:
        row = row.copy()
        row[used] = np.inf
        used.append(int(np.argmin(row)))
    return SubsetIndices(used)
