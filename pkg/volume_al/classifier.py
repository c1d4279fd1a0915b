import dataclasses
import logging
import typing

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import cdist

from volume_al.errors import ConfigError, ShapeError
from volume_al.kernel import KernelSpec, cross_kernel, kernel_matrix

__all__ = [
    "DEFAULT_LAMBDA",
    "RlscModel",
    "train_rlsc",
    "decision_values",
    "predict",
    "knn_predict",
    "error_rate",
]

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 1e-3


@dataclasses.dataclass(frozen=True)
class RlscModel:
    """Kernel regularized least squares, one column of dual weights per class."""

    support_points: np.ndarray
    dual_weights: np.ndarray
    spec: KernelSpec
    lam: float

    @property
    def num_classes(self) -> int:
        return self.dual_weights.shape[1]


def _one_vs_rest(y: np.ndarray, num_classes: int) -> np.ndarray:
    targets = -np.ones((y.shape[0], num_classes))
    targets[np.arange(y.shape[0]), y] = 1.0
    return targets


def train_rlsc(
    X_l,
    y_l,
    spec: KernelSpec,
    lam: float = DEFAULT_LAMBDA,
    num_classes: typing.Optional[int] = None,
) -> RlscModel:
    """Solve (K + lam I) a = y for every class with a Cholesky factorization."""
    if not lam > 0:
        raise ConfigError(f"lambda must be positive, got {lam}")
    X_l = np.asarray(X_l, dtype=float)
    y_l = np.asarray(y_l, dtype=np.int64)
    if X_l.ndim != 2 or X_l.shape[0] < 1:
        raise ShapeError(f"training points must be a non-empty matrix, got {X_l.shape}")
    if y_l.shape != (X_l.shape[0],):
        raise ShapeError(f"expected {X_l.shape[0]} labels, got {y_l.shape}")
    if num_classes is None:
        num_classes = int(y_l.max()) + 1
    if np.any(y_l < 0) or np.any(y_l >= num_classes):
        raise ConfigError(f"labels must lie in [0, {num_classes})")

    K = kernel_matrix(X_l, spec).entries
    system = K + lam * np.eye(K.shape[0])
    weights = cho_solve(cho_factor(system), _one_vs_rest(y_l, num_classes))
    return RlscModel(
        support_points=X_l.copy(), dual_weights=weights, spec=spec, lam=lam
    )


def decision_values(model: RlscModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.support_points.shape[1]:
        raise ShapeError(
            f"expected points of dimension {model.support_points.shape[1]}, "
            f"got shape {X.shape}"
        )
    return cross_kernel(model.spec, X, model.support_points) @ model.dual_weights


def predict(model: RlscModel, X) -> typing.Tuple[np.ndarray, np.ndarray]:
    """Labels by largest decision value (lowest class on ties) and margins.

    The margin is the gap between the top two decision values, or ``|f|`` of
    the positive class for binary and single-class models.
    """
    f = decision_values(model, X)
    labels = np.argmax(f, axis=1)
    if model.num_classes <= 2:
        margins = np.abs(f[:, -1])
    else:
        top = np.sort(f, axis=1)
        margins = top[:, -1] - top[:, -2]
    return labels, margins


def knn_predict(X_l, y_l, X, k: int = 1) -> np.ndarray:
    X_l = np.asarray(X_l, dtype=float)
    y_l = np.asarray(y_l, dtype=np.int64)
    X = np.asarray(X, dtype=float)
    if not 1 <= k <= X_l.shape[0]:
        raise ConfigError(f"k must be in [1, {X_l.shape[0]}], got {k}")
    if X.shape[1] != X_l.shape[1]:
        raise ShapeError(f"dimension mismatch: {X.shape[1]} vs {X_l.shape[1]}")
    num_classes = int(y_l.max()) + 1
    labels = []
    # equidistant neighbours are taken lowest class first
    for distances in cdist(X, X_l):
        nearest = np.lexsort((y_l, distances))[:k]
        labels.append(np.argmax(np.bincount(y_l[nearest], minlength=num_classes)))
    return np.array(labels, dtype=np.int64)


def error_rate(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ShapeError(f"length mismatch: {predicted.shape} vs {truth.shape}")
    if predicted.size == 0:
        return 0.0
    return float(np.mean(predicted != truth))
