"""Euclidean stand-ins for version-space geometry.

Hypotheses are modelled as points in R^m. Balls are minimum enclosing balls
(exact in up to three dimensions, (1 + delta)-approximate above), and every
geometric claim the selection method relies on has a seeded Monte Carlo check
that returns a `TheoremReport`.
"""
import dataclasses
import logging
import math
import typing

import numpy as np
from scipy.spatial.distance import cdist

from volume_al.errors import ConfigError, DomainError, ShapeError
from volume_al.kernel import KernelKind, KernelSpec, mmd_squared
from volume_al.represent import assign, update_centers
from volume_al.sparsify import SubsetIndices

__all__ = [
    "EXACT_MEB_MAX_DIM",
    "MEB_DELTA",
    "Ball",
    "OutlierParams",
    "TheoremReport",
    "vc_hypothesis_count",
    "meb",
    "concentric_outer_ball",
    "sample_in_ball",
    "halfspace_surface_check",
    "shell_fraction",
    "mc_shell_fraction",
    "hyperplane_angle_range",
    "outlier_filter",
    "distance_bound_check",
    "vc_count_check",
    "shell_fraction_check",
    "angle_range_check",
    "center_mmd_check",
    "em_center_mmd_check",
    "run_theory_suite",
]

logger = logging.getLogger(__name__)

EXACT_MEB_MAX_DIM = 3
MEB_DELTA = 1e-3
# relative slack when testing whether a point lies inside a ball
_CONTAINS_RTOL = 1e-10


@dataclasses.dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).ravel()
        if not np.all(np.isfinite(center)):
            raise ShapeError("ball center must be finite")
        if self.radius < 0:
            raise ShapeError(f"ball radius must be non-negative, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, point, rtol: float = _CONTAINS_RTOL) -> bool:
        distance = float(np.linalg.norm(np.asarray(point) - self.center))
        return distance <= self.radius + rtol * max(1.0, self.radius)


@dataclasses.dataclass(frozen=True)
class OutlierParams:
    eps_prime: float = 0.05
    neighborhood: int = 5

    def __post_init__(self):
        if not 0 < self.eps_prime < 1:
            raise ConfigError(f"eps_prime must be in (0, 1), got {self.eps_prime}")
        if self.neighborhood < 1:
            raise ConfigError(
                f"neighborhood must be at least 1, got {self.neighborhood}"
            )


@dataclasses.dataclass(frozen=True)
class TheoremReport:
    theorem: str
    trials: int
    violations: int
    max_deviation: float
    tolerance: float

    def __post_init__(self):
        if not 0 <= self.violations <= self.trials:
            raise ConfigError(
                f"violations {self.violations} outside [0, {self.trials}]"
            )

    @property
    def passed(self) -> bool:
        return self.violations == 0


def vc_hypothesis_count(n: int, rho: int) -> int:
    """2**n minus the sum of C(n, i) for i in 1..rho-1.

    >>> vc_hypothesis_count(4, 2)
    12
    >>> vc_hypothesis_count(5, 3)
    17
    """
    if not 1 <= rho <= n:
        raise ConfigError(f"need 1 <= rho <= n, got rho={rho}, n={n}")
    return 2 ** n - sum(math.comb(n, i) for i in range(1, rho))


def _points(points) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1:
        raise ShapeError(f"need a non-empty set of points, got shape {X.shape}")
    return X


def _circumball(support: typing.List[np.ndarray]) -> typing.Optional[Ball]:
    if not support:
        return None
    p0 = support[0]
    if len(support) == 1:
        return Ball(p0, 0.0)
    A = np.array(support[1:]) - p0
    b = 0.5 * np.sum(A * A, axis=1)
    lam = np.linalg.lstsq(A @ A.T, b, rcond=None)[0]
    center = p0 + A.T @ lam
    radius = max(float(np.linalg.norm(p - center)) for p in support)
    return Ball(center, radius)


def _move_to_front(
    points: typing.List[np.ndarray],
    end: int,
    support: typing.List[np.ndarray],
    dim: int,
) -> typing.Optional[Ball]:
    # recursion depth is bounded by the support size, at most dim + 1
    ball = _circumball(support)
    if len(support) == dim + 1:
        return ball
    for i in range(end):
        p = points[i]
        if ball is None or not ball.contains(p):
            ball = _move_to_front(points, i, support + [p], dim)
            points.insert(0, points.pop(i))
    return ball


def _frank_wolfe_meb(X: np.ndarray, delta: float) -> Ball:
    n = X.shape[0]
    first = 0
    second = int(np.argmax(np.sum((X - X[first]) ** 2, axis=1)))
    alpha = np.zeros(n)
    alpha[first] += 0.5
    alpha[second] += 0.5
    norms = np.sum(X * X, axis=1)
    target = (1.0 + delta) ** 2 - 1.0
    center = alpha @ X
    for _ in range(100000):
        center = alpha @ X
        d2 = np.sum((X - center) ** 2, axis=1)
        far = int(np.argmax(d2))
        # dual objective, a lower bound on the squared optimal radius
        dual = float(alpha @ norms - center @ center)
        if dual <= 0.0:
            break
        gap = d2[far] / dual - 1.0
        if gap <= target:
            break
        step = gap / (2.0 * (1.0 + gap))
        alpha *= 1.0 - step
        alpha[far] += step
    else:
        logger.warning("Approximate MEB did not reach delta=%g", delta)
    radius = float(np.sqrt(np.max(np.sum((X - center) ** 2, axis=1))))
    return Ball(center, radius)


def meb(points, delta: float = MEB_DELTA) -> Ball:
    """Minimum enclosing ball.

    Exact by move-to-front recursion for dimension up to three, otherwise a
    Frank-Wolfe core-set ball within a factor (1 + delta) of optimal. Every
    input point lies inside the returned radius.
    """
    X = _points(points)
    n, dim = X.shape
    if n == 1:
        return Ball(X[0], 0.0)
    if dim > EXACT_MEB_MAX_DIM:
        return _frank_wolfe_meb(X, delta)
    order = np.random.default_rng(0).permutation(n)
    ball = _move_to_front([X[i] for i in order], n, [], dim)
    radius = float(np.sqrt(np.max(np.sum((X - ball.center) ** 2, axis=1))))
    return Ball(ball.center, radius)


def concentric_outer_ball(ball: Ball, eps: float) -> Ball:
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    return Ball(ball.center, (1.0 + eps) * ball.radius)


def sample_in_ball(ball: Ball, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from the solid ball."""
    directions = rng.standard_normal((count, ball.dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = ball.radius * rng.random(count) ** (1.0 / ball.dim)
    return ball.center + directions * radii[:, None]


def _unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    vectors = rng.standard_normal((count, dim))
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def halfspace_surface_check(
    points, trials: int = 200, seed: int = 0, rtol: float = 1e-6
) -> TheoremReport:
    """Every closed half-space through the MEB center holds a point at
    distance at least radius * (1 - rtol) from the center."""
    X = _points(points)
    if X.shape[0] < 2:
        raise ShapeError("need at least two points")
    ball = meb(X)
    offsets = X - ball.center
    distances = np.linalg.norm(offsets, axis=1)
    normals = _unit_vectors(np.random.default_rng(seed), trials, X.shape[1])
    violations = 0
    worst = 0.0
    for u in normals:
        side = offsets @ u >= -1e-12 * max(1.0, ball.radius)
        reach = float(distances[side].max()) if np.any(side) else 0.0
        deviation = (ball.radius - reach) / ball.radius if ball.radius else 0.0
        worst = max(worst, deviation)
        if deviation > rtol:
            violations += 1
    return TheoremReport("halfspace_surface_point", trials, violations, worst, rtol)


def shell_fraction(m: int, eps: float) -> float:
    """Volume fraction of the shell between radius 1/(1+eps) and 1."""
    if m < 1:
        raise ConfigError(f"dimension must be at least 1, got {m}")
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    return 1.0 - 1.0 / (1.0 + eps) ** m


def mc_shell_fraction(m: int, eps: float, samples: int, seed: int) -> float:
    shell_fraction(m, eps)
    rng = np.random.default_rng(seed)
    unit = Ball(np.zeros(m), 1.0)
    norms = np.linalg.norm(sample_in_ball(unit, samples, rng), axis=1)
    return float(np.mean(norms > 1.0 / (1.0 + eps)))


def hyperplane_angle_range(ball: Ball, nu) -> typing.Tuple[float, float]:
    """Angles at which hyperplanes through `nu` can still meet the ball."""
    nu = np.asarray(nu, dtype=float).ravel()
    if nu.shape != ball.center.shape:
        raise ShapeError(f"dimension mismatch: {nu.shape[0]} vs {ball.dim}")
    distance = float(np.linalg.norm(ball.center - nu))
    if distance <= ball.radius:
        raise DomainError(
            f"point at distance {distance} is not outside ball of radius {ball.radius}"
        )
    low = math.asin(ball.radius / distance)
    return low, 2.0 * math.pi - low


def outlier_filter(X, params: OutlierParams = OutlierParams()) -> SubsetIndices:
    """Drop points whose local ball is large relative to the global ball.

    The local ball of a point is the MEB of the point and its
    ``params.neighborhood`` nearest neighbours; a point is removed when
    (local radius / global radius) ** m exceeds ``params.eps_prime``.
    """
    X = _points(X)
    n, m = X.shape
    if params.neighborhood >= n:
        raise ConfigError(
            f"neighborhood {params.neighborhood} must be smaller than n={n}"
        )
    outer = meb(X)
    if outer.radius == 0.0:
        return SubsetIndices(range(n))
    order = np.argsort(cdist(X, X), axis=1, kind="stable")
    kept = []
    for i in range(n):
        neighbours = [j for j in order[i] if j != i][: params.neighborhood]
        local = meb(X[[i] + neighbours])
        if (local.radius / outer.radius) ** m <= params.eps_prime:
            kept.append(i)
    logger.debug(
        "Outlier filter kept %d of %d points (eps'=%g)", len(kept), n, params.eps_prime
    )
    return SubsetIndices(kept)


def distance_bound_check(points, seed: int = 0, trials: int = 1) -> TheoremReport:
    """Farthest-point distances against 2R and |x - C| + R.

    `trials` random rigid translations of the cloud are checked in addition to
    the cloud itself; both bounds are checked for every point.
    """
    X = _points(points)
    if X.shape[0] < 2:
        raise ShapeError("need at least two points")
    rng = np.random.default_rng(seed)
    shifts = [np.zeros(X.shape[1])] + list(rng.normal(size=(trials, X.shape[1])))
    violations = 0
    checks = 0
    worst = 0.0
    tolerance = 0.0
    for shift in shifts:
        cloud = X + shift
        ball = meb(cloud)
        tolerance = 1e-9 * ball.radius
        farthest = cdist(cloud, cloud).max(axis=1)
        to_center = np.linalg.norm(cloud - ball.center, axis=1)
        for excess in (farthest - 2 * ball.radius, farthest - to_center - ball.radius):
            worst = max(worst, float(excess.max()))
            violations += int(np.sum(excess > tolerance))
            checks += excess.shape[0]
    return TheoremReport("distance_bounds", checks, violations, worst, tolerance)


def vc_count_check(max_n: int = 20) -> TheoremReport:
    from volume_al.testing import binomial_vc_count

    trials = violations = 0
    for n in range(1, max_n + 1):
        for rho in range(1, n + 1):
            trials += 1
            if vc_hypothesis_count(n, rho) != binomial_vc_count(n, rho):
                violations += 1
    return TheoremReport("vc_count", trials, violations, 0.0, 0.0)


def shell_fraction_check(
    cases: typing.Sequence[typing.Tuple[int, float]] = ((2, 1.0), (3, 0.25), (5, 0.5)),
    samples: int = 100000,
    seed: int = 0,
    tol: float = 0.02,
) -> TheoremReport:
    worst = 0.0
    violations = 0
    for i, (m, eps) in enumerate(cases):
        estimate = mc_shell_fraction(m, eps, samples, seed + i)
        deviation = abs(estimate - shell_fraction(m, eps))
        worst = max(worst, deviation)
        violations += deviation > tol
    return TheoremReport("shell_fraction", len(cases), int(violations), worst, tol)


def angle_range_check(trials: int = 100, seed: int = 0) -> TheoremReport:
    """The outer ball of a concentric pair always has the larger lower angle."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, 5))
        inner = Ball(rng.normal(size=dim), float(rng.uniform(0.1, 2.0)))
        outer = concentric_outer_ball(inner, float(rng.uniform(0.01, 1.0)))
        direction = _unit_vectors(rng, 1, dim)[0]
        nu = inner.center + direction * outer.radius * float(rng.uniform(1.01, 5.0))
        inner_low, inner_high = hyperplane_angle_range(inner, nu)
        outer_low, outer_high = hyperplane_angle_range(outer, nu)
        deviation = inner_low - outer_low
        worst = max(worst, deviation)
        if not (outer_low > inner_low and outer_high < inner_high):
            violations += 1
    return TheoremReport("angle_range", trials, violations, worst, 0.0)


def center_mmd_check(
    trials: int = 20, samples: int = 1000, surface_points: int = 50, seed: int = 0
) -> TheoremReport:
    """Under the linear kernel the MEB center of a uniform sample is closer in
    MMD to the sample than any point on the MEB surface."""
    rng = np.random.default_rng(seed)
    spec = KernelSpec(KernelKind.LINEAR)
    violations = 0
    worst = -math.inf
    for _ in range(trials):
        ball = Ball(rng.normal(size=2) * 10, float(rng.uniform(0.5, 5.0)))
        S = sample_in_ball(ball, samples, rng)
        enclosing = meb(S)
        center_mmd = mmd_squared(enclosing.center[None, :], S, spec)
        surface = enclosing.center + enclosing.radius * _unit_vectors(
            rng, surface_points, 2
        )
        for q in surface:
            excess = center_mmd - mmd_squared(q[None, :], S, spec)
            worst = max(worst, excess)
            violations += excess > 0
    return TheoremReport(
        "center_vs_surface_mmd", trials * surface_points, int(violations), worst, 0.0
    )


def em_center_mmd_check(trials: int = 100, seed: int = 0) -> TheoremReport:
    """After a center update, the linear-kernel MMD between each center and its
    cluster vanishes."""
    rng = np.random.default_rng(seed)
    spec = KernelSpec(KernelKind.LINEAR)
    tol = 1e-10
    checks = violations = 0
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 40))
        k = int(rng.integers(1, min(n, 6) + 1))
        X = rng.normal(size=(n, int(rng.integers(1, 5))))
        labels = assign(X, X[rng.choice(n, k, replace=False)])
        centers = update_centers(X, labels, k)
        for i in range(k):
            members = X[labels == i]
            value = abs(mmd_squared(centers[i][None, :], members, spec))
            worst = max(worst, value)
            checks += 1
            violations += value > tol
    return TheoremReport("center_mmd_zero", checks, int(violations), worst, tol)


def run_theory_suite(trials: int = 50, seed: int = 0) -> typing.List[TheoremReport]:
    rng = np.random.default_rng(seed)
    reports = [vc_count_check()]

    clouds = [rng.normal(size=(30, 2)) for _ in range(trials)]
    halfspace = [
        halfspace_surface_check(cloud, 200, seed + i) for i, cloud in enumerate(clouds)
    ]
    reports.append(_merge("halfspace_surface_point", halfspace))

    bounds = []
    for i in range(trials):
        cloud = rng.normal(size=(int(rng.integers(2, 101)), int(rng.integers(1, 5))))
        bounds.append(distance_bound_check(cloud, seed + i))
    reports.append(_merge("distance_bounds", bounds))

    reports.append(shell_fraction_check(seed=seed))
    reports.append(angle_range_check(trials, seed))
    reports.append(center_mmd_check(seed=seed))
    reports.append(em_center_mmd_check(trials, seed))
    for report in reports:
        logger.info(
            "%s: %d/%d violations (max deviation %.3g)",
            report.theorem,
            report.violations,
            report.trials,
            report.max_deviation,
        )
    return reports


def _merge(theorem: str, reports: typing.List[TheoremReport]) -> TheoremReport:
    return TheoremReport(
        theorem,
        sum(r.trials for r in reports),
        sum(r.violations for r in reports),
        max(r.max_deviation for r in reports),
        max(r.tolerance for r in reports),
    )
