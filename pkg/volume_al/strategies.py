import abc
import dataclasses
import enum
import logging
import time
import typing

import numpy as np

from volume_al.classifier import DEFAULT_LAMBDA, predict, train_rlsc
from volume_al.dataset import Dataset, LabelOracle
from volume_al.errors import ConfigError, ShapeError
from volume_al.geometry import OutlierParams, outlier_filter
from volume_al.kernel import KernelSpec, kernel_matrix, resolve_kernel
from volume_al.represent import EmParams, em_representation, snap_to_data
from volume_al.sparsify import (
    ScoreVariant,
    SparsifyParams,
    SubsetIndices,
    sequential_select,
    sparsify_halve,
)

__all__ = [
    "StrategyName",
    "StrategyConfig",
    "SeedSet",
    "select_random",
    "select_ted",
    "select_margin",
    "select_val",
    "select_volume",
    "Strategy",
    "RandomStrategy",
    "TedStrategy",
    "MarginStrategy",
    "ValStrategy",
    "VolumeStrategy",
    "make_strategy",
]

logger = logging.getLogger(__name__)


class StrategyName(enum.Enum):
    VAL = "val"
    RANDOM = "random"
    TED = "ted"
    MARGIN = "margin"
    VOLUME = "volume"


@dataclasses.dataclass(frozen=True)
class StrategyConfig:
    name: StrategyName
    budget: int
    kernel: KernelSpec = KernelSpec()
    sparsify: SparsifyParams = SparsifyParams()
    em: EmParams = EmParams()
    outlier: OutlierParams = OutlierParams()
    lam: float = DEFAULT_LAMBDA
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "name", StrategyName(self.name))
        if self.budget < 1:
            raise ConfigError(f"budget must be at least 1, got {self.budget}")
        if not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")


class SeedSet:
    """One free labelled index per class, lowest index of each class."""

    __slots__ = ("_indices", "_labels")

    def __init__(self, indices: typing.Sequence[int], labels: typing.Sequence[int]):
        if len(indices) != len(labels):
            raise ShapeError("seed indices and labels differ in length")
        if len(set(labels)) != len(labels):
            raise ConfigError(f"seed set has repeated classes: {list(labels)}")
        self._indices = SubsetIndices(indices)
        self._labels = np.array(labels, dtype=np.int64)

    @classmethod
    def first_of_each_class(cls, oracle: LabelOracle) -> "SeedSet":
        dataset = oracle.dataset
        _, first = np.unique(dataset.labels, return_index=True)
        indices = sorted(int(i) for i in first)
        return cls(indices, oracle.grant(indices))

    def __len__(self) -> int:
        return len(self._indices)

    @property
    def indices(self) -> SubsetIndices:
        return self._indices

    @property
    def labels(self) -> np.ndarray:
        return self._labels


def _check_budget(k: int, available: int, what: str) -> None:
    if k < 1:
        raise ConfigError(f"{what}: budget must be at least 1, got {k}")
    if k > available:
        raise ConfigError(f"{what}: budget {k} exceeds the {available} candidates")


def select_random(
    n: int, k: int, seed: int, exclude: typing.Iterable[int] = ()
) -> SubsetIndices:
    excluded = set(int(i) for i in exclude)
    candidates = np.array([i for i in range(n) if i not in excluded], dtype=np.int64)
    _check_budget(k, candidates.shape[0], "random")
    rng = np.random.default_rng(seed)
    return SubsetIndices(rng.choice(candidates, k, replace=False))


def select_ted(X, k: int, kernel: KernelSpec, mu: float) -> SubsetIndices:
    """First k rounds of the select-then-deflate loop with the classic score."""
    X = np.asarray(X, dtype=float)
    _check_budget(k, X.shape[0], "ted")
    K = kernel_matrix(X, resolve_kernel(kernel, X))
    return sequential_select(K, k, mu, ScoreVariant.TED)


def select_margin(
    dataset: Dataset,
    oracle: LabelOracle,
    seeds: SeedSet,
    k: int,
    kernel: KernelSpec,
    lam: float = DEFAULT_LAMBDA,
) -> SubsetIndices:
    """Query the unlabelled point closest to the current decision boundary,
    retraining the classifier after every query."""
    kernel = resolve_kernel(kernel, dataset.features)
    labelled = list(seeds.indices)
    labels = list(seeds.labels)
    _check_budget(k, dataset.n - len(labelled), "margin")
    queried: typing.List[int] = []
    for _ in range(k):
        model = train_rlsc(
            dataset.features[labelled],
            labels,
            kernel,
            lam,
            num_classes=dataset.num_classes,
        )
        _, margins = predict(model, dataset.features)
        margins[labelled] = np.inf
        pick = int(np.argmin(margins))
        labels.append(oracle.query(pick))
        labelled.append(pick)
        queried.append(pick)
    return SubsetIndices(queried)


def select_val(
    dataset: Dataset,
    k: int,
    config: StrategyConfig,
    pool: typing.Optional[SubsetIndices] = None,
) -> SubsetIndices:
    """Sparsify the data, find k local centers on the sparse pool with EM and
    return the nearest data point to each center. Consults no labels.

    A precomputed `pool` from `sparsify_halve` on the same data and settings
    may be passed to skip the sparsification step.
    """
    X = dataset.features
    _check_budget(k, config.sparsify.target_size(dataset.n), "val")
    if pool is None:
        pool = sparsify_halve(X, resolve_kernel(config.kernel, X), config.sparsify)
    candidates = X[pool.to_array()]
    start = time.perf_counter()
    representation = em_representation(candidates, k, config.em)
    chosen = snap_to_data(representation.centers, candidates)
    logger.info(
        "VAL: EM with %d centers on %d points took %.1f ms (%d iterations)",
        k,
        candidates.shape[0],
        1000 * (time.perf_counter() - start),
        representation.iterations,
    )
    return SubsetIndices(pool[i] for i in chosen)


def select_volume(dataset: Dataset, k: int, config: StrategyConfig) -> SubsetIndices:
    """Remove volume outliers, then find k local centers on the rest."""
    kept = outlier_filter(dataset.features, config.outlier)
    _check_budget(k, len(kept), "volume")
    candidates = dataset.features[kept.to_array()]
    representation = em_representation(candidates, k, config.em)
    chosen = snap_to_data(representation.centers, candidates)
    return SubsetIndices(kept[i] for i in chosen)


class Strategy(abc.ABC):
    name: StrategyName
    config: StrategyConfig
    # True when the strategy never consults the label oracle
    label_free: bool = True

    def __init__(self, config: StrategyConfig):
        self.config = config

    def check_budget(self, dataset: Dataset, seeds: SeedSet, budget: int) -> None:
        _check_budget(budget, self.capacity(dataset, seeds), self.name.value)

    @abc.abstractmethod
    def capacity(self, dataset: Dataset, seeds: SeedSet) -> int:
        pass

    @abc.abstractmethod
    def select(
        self, dataset: Dataset, oracle: LabelOracle, seeds: SeedSet, budget: int
    ) -> SubsetIndices:
        pass


class RandomStrategy(Strategy):
    name = StrategyName.RANDOM

    def capacity(self, dataset, seeds):
        return dataset.n - len(seeds)

    def select(self, dataset, oracle, seeds, budget):
        return select_random(dataset.n, budget, self.config.seed, seeds.indices)


class TedStrategy(Strategy):
    name = StrategyName.TED

    def capacity(self, dataset, seeds):
        return dataset.n

    def select(self, dataset, oracle, seeds, budget):
        return select_ted(
            dataset.features, budget, self.config.kernel, self.config.sparsify.mu
        )


class MarginStrategy(Strategy):
    name = StrategyName.MARGIN
    label_free = False

    def capacity(self, dataset, seeds):
        return dataset.n - len(seeds)

    def select(self, dataset, oracle, seeds, budget):
        return select_margin(
            dataset, oracle, seeds, budget, self.config.kernel, self.config.lam
        )


class ValStrategy(Strategy):
    name = StrategyName.VAL
    pool: typing.Optional[SubsetIndices]

    def __init__(
        self, config: StrategyConfig, pool: typing.Optional[SubsetIndices] = None
    ):
        super().__init__(config)
        self.pool = pool

    def capacity(self, dataset, seeds):
        return self.config.sparsify.target_size(dataset.n)

    def select(self, dataset, oracle, seeds, budget):
        return select_val(dataset, budget, self.config, self.pool)


class VolumeStrategy(Strategy):
    name = StrategyName.VOLUME

    def capacity(self, dataset, seeds):
        return dataset.n

    def select(self, dataset, oracle, seeds, budget):
        return select_volume(dataset, budget, self.config)


STRATEGIES: typing.Dict[StrategyName, typing.Type[Strategy]] = {
    StrategyName.VAL: ValStrategy,
    StrategyName.RANDOM: RandomStrategy,
    StrategyName.TED: TedStrategy,
    StrategyName.MARGIN: MarginStrategy,
    StrategyName.VOLUME: VolumeStrategy,
}


def make_strategy(config: StrategyConfig, **kwargs) -> Strategy:
    return STRATEGIES[config.name](config, **kwargs)
