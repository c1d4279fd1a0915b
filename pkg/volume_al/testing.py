"""Slow, independent reference implementations for checking the fast ones.

These are meant for test suites: each one recomputes its answer from scratch
with the most direct method available and is only practical on tiny inputs.
"""
import itertools
import typing

import numpy as np

from volume_al.geometry import Ball
from volume_al.kernel import KernelSpec, kernel_eval, resolve_kernel
from volume_al.sparsify import ScoreVariant, SparsifyParams, SubsetIndices

__all__ = [
    "naive_sparsify",
    "exhaustive_partition_optimum",
    "brute_force_meb",
    "binomial_vc_count",
]


def _deflated(K: np.ndarray, selected: typing.List[int], mu: float) -> np.ndarray:
    K = K.copy()
    for index in selected:
        column = K[:, index].copy()
        K = K - np.outer(column, column) / (column[index] + mu)
    return K


def naive_sparsify(
    X, spec: KernelSpec, params: SparsifyParams = SparsifyParams()
) -> SubsetIndices:
    """Greedy sparsification that rebuilds the deflated matrix every round."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    spec = resolve_kernel(spec, X)
    K = np.array([[kernel_eval(spec, X[i], X[j]) for j in range(n)] for i in range(n)])
    K = (K + K.T) / 2
    selected: typing.List[int] = []
    for _ in range(params.target_size(n)):
        work = _deflated(K, selected, params.mu)
        best, best_score = -1, -np.inf
        for i in range(n):
            if i in selected:
                continue
            s = float(work[i] @ work[i])
            if params.score_variant is ScoreVariant.PAPER:
                s = s * s
            score = s / (work[i, i] + params.mu)
            if score > best_score:
                best, best_score = i, score
        selected.append(best)
    return SubsetIndices(selected)


def exhaustive_partition_optimum(X, k: int) -> typing.Tuple[np.ndarray, float]:
    """Centroids and loss of the best partition into k non-empty clusters."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    best_loss, best_centers = np.inf, None
    for labels in itertools.product(range(k), repeat=n):
        # fixing the first point's cluster removes relabelled duplicates
        if labels[0] != 0 or len(set(labels)) != k:
            continue
        labels = np.array(labels)
        centers = np.array([X[labels == j].mean(axis=0) for j in range(k)])
        loss = float(sum(np.sum((X[labels == j] - centers[j]) ** 2) for j in range(k)))
        if loss < best_loss:
            best_loss, best_centers = loss, centers
    return best_centers, best_loss


def _ball_through(support: np.ndarray) -> typing.Optional[Ball]:
    p0 = support[0]
    if support.shape[0] == 1:
        return Ball(p0, 0.0)
    A = support[1:] - p0
    gram = A @ A.T
    if abs(np.linalg.det(gram)) < 1e-12:
        return None
    lam = np.linalg.solve(gram, 0.5 * np.sum(A * A, axis=1))
    center = p0 + A.T @ lam
    return Ball(center, float(np.linalg.norm(p0 - center)))


def brute_force_meb(points, rtol: float = 1e-9) -> Ball:
    """Smallest ball through some affinely independent subset of at most
    dim + 1 points that contains every point."""
    X = np.asarray(points, dtype=float)
    n, dim = X.shape
    best: typing.Optional[Ball] = None
    for size in range(1, min(n, dim + 1) + 1):
        for subset in itertools.combinations(range(n), size):
            ball = _ball_through(X[list(subset)])
            if ball is None or (best is not None and ball.radius >= best.radius):
                continue
            distances = np.linalg.norm(X - ball.center, axis=1)
            if np.all(distances <= ball.radius * (1 + rtol) + rtol):
                best = ball
    assert best is not None
    return best


def binomial_vc_count(n: int, rho: int) -> int:
    """Subsets of an n-set that are empty or have at least rho elements,
    counted from Pascal's triangle."""
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    return row[0] + sum(row[rho:])
