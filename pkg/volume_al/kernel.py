import dataclasses
import enum
import logging
import typing

import numpy as np
from scipy.linalg import eigvalsh
from scipy.spatial.distance import cdist

from volume_al.errors import ConfigError, ShapeError

__all__ = [
    "KernelKind",
    "KernelSpec",
    "KernelMatrix",
    "kernel_eval",
    "cross_kernel",
    "kernel_matrix",
    "default_gamma",
    "resolve_kernel",
    "mmd_squared",
    "mmd_upper_bound",
]

logger = logging.getLogger(__name__)

# Subsample size for the median-distance bandwidth heuristic
GAMMA_SUBSAMPLE = 200


class KernelKind(enum.Enum):
    RBF = "rbf"
    LINEAR = "linear"


@dataclasses.dataclass(frozen=True)
class KernelSpec:
    """Kernel family and parameters.

    An rbf spec with ``gamma=None`` is unresolved; `resolve_kernel` fills in the
    median heuristic for a concrete data set.
    """

    kind: KernelKind = KernelKind.RBF
    gamma: typing.Optional[float] = None
    kappa: typing.Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if self.kind is KernelKind.RBF and self.gamma is not None and self.gamma <= 0:
            raise ConfigError(f"rbf gamma must be positive, got {self.gamma}")
        if self.kappa is not None and self.kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")

    @property
    def bound(self) -> typing.Optional[float]:
        if self.kappa is not None:
            return self.kappa
        if self.kind is KernelKind.RBF:
            return 1.0
        return None

    def _require_gamma(self) -> float:
        if self.gamma is None:
            raise ConfigError("rbf gamma is unresolved, call resolve_kernel first")
        return self.gamma


class KernelMatrix:
    __slots__ = ("_entries", "_spec")

    _entries: np.ndarray
    _spec: KernelSpec

    def __init__(self, entries: np.ndarray, spec: KernelSpec):
        entries = np.asarray(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ShapeError(f"kernel matrix must be square, got {entries.shape}")
        self._entries = entries
        self._spec = spec

    def __len__(self) -> int:
        return self._entries.shape[0]

    def __getitem__(self, key):
        return self._entries[key]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def spec(self) -> KernelSpec:
        return self._spec

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self._entries - self._entries.T) <= tol))

    def min_eigenvalue(self) -> float:
        return float(eigvalsh(self._entries)[0])

    def is_psd(self) -> bool:
        return self.min_eigenvalue() >= -1e-8 * self.n


def _as_points(X, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ShapeError(f"{name} must be a set of vectors, got shape {X.shape}")
    return X


def kernel_eval(spec: KernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ShapeError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if spec.kind is KernelKind.LINEAR:
        return float(np.dot(x, y))
    diff = x - y
    return float(np.exp(-spec._require_gamma() * np.dot(diff, diff)))


def cross_kernel(spec: KernelSpec, X, Y) -> np.ndarray:
    """Rectangular block of kernel values between the rows of X and Y."""
    X = _as_points(X, "X")
    Y = _as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ShapeError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.kind is KernelKind.LINEAR:
        return X @ Y.T
    return np.exp(-spec._require_gamma() * cdist(X, Y, "sqeuclidean"))


def kernel_matrix(X, spec: KernelSpec) -> KernelMatrix:
    X = _as_points(X, "X")
    if not np.all(np.isfinite(X)):
        raise ShapeError("X contains non-finite values")
    full = cross_kernel(spec, X, X)
    upper = np.triu(full)
    # mirror the upper triangle so the matrix is exactly symmetric
    entries = upper + np.triu(full, 1).T
    return KernelMatrix(entries, spec)


def default_gamma(X, seed: int = 0) -> float:
    """1 / (m * median squared pairwise distance) over a seeded subsample."""
    X = _as_points(X, "X")
    n, m = X.shape
    if n > GAMMA_SUBSAMPLE:
        rng = np.random.default_rng(seed)
        X = X[np.sort(rng.choice(n, GAMMA_SUBSAMPLE, replace=False))]
    d2 = cdist(X, X, "sqeuclidean")[np.triu_indices(X.shape[0], 1)]
    positive = d2[d2 > 0]
    if positive.size == 0:
        return 1.0
    return float(1.0 / (m * np.median(positive)))


def resolve_kernel(spec: KernelSpec, X) -> KernelSpec:
    if spec.kind is KernelKind.RBF and spec.gamma is None:
        gamma = default_gamma(X)
        logger.debug("Resolved rbf gamma to %.6g by median heuristic", gamma)
        return dataclasses.replace(spec, gamma=gamma)
    return spec


def _mmd_terms(X, Y, spec: KernelSpec) -> typing.Tuple[float, float, float]:
    X = _as_points(X, "X")
    Y = _as_points(Y, "Y")
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise ShapeError("MMD needs at least one point on each side")
    xx = float(np.mean(cross_kernel(spec, X, X)))
    yy = float(np.mean(cross_kernel(spec, Y, Y)))
    # both orientations, so swapping X and Y gives a bit-identical result
    xy = 0.5 * (
        float(np.mean(cross_kernel(spec, X, Y)))
        + float(np.mean(cross_kernel(spec, Y, X)))
    )
    return xx, yy, xy


def mmd_squared(X, Y, spec: KernelSpec) -> float:
    """Biased squared maximum mean discrepancy between two samples.

    Uses 1/m**2 and 1/n**2 for the within-sample terms, so identical samples
    give zero.
    """
    xx, yy, xy = _mmd_terms(X, Y, spec)
    return (xx + yy) - 2.0 * xy


def mmd_upper_bound(X, Y, spec: KernelSpec) -> float:
    """2 * kappa minus twice the mean cross-kernel value."""
    kappa = spec.bound
    if kappa is None:
        raise ConfigError("mmd_upper_bound needs a kernel bound, set kappa")
    _, _, xy = _mmd_terms(X, Y, spec)
    return 2.0 * kappa - 2.0 * xy
