import asyncio
import collections.abc
import dataclasses
import functools
import logging
import statistics
import time
import typing
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from volume_al.classifier import error_rate, predict, train_rlsc
from volume_al.config import ExperimentConfig
from volume_al.dataset import Dataset, LabelOracle
from volume_al.errors import BudgetExceeded, ConfigError
from volume_al.kernel import resolve_kernel
from volume_al.sparsify import SubsetIndices, sparsify_halve
from volume_al.strategies import (
    SeedSet,
    Strategy,
    StrategyConfig,
    StrategyName,
    make_strategy,
)

__all__ = ["CurveRow", "ErrorCurve", "run_experiment", "run_experiment_async"]

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("strategy", "seed", "budget", "error_rate", "queries_used", "wall_ms")


class CurveRow(typing.NamedTuple):
    strategy: str
    seed: int
    budget: int
    error_rate: float
    queries_used: int
    wall_ms: float


class ErrorCurve(collections.abc.Sequence):
    """Rows of (strategy, seed, budget) results in canonical order."""

    __slots__ = ("_rows",)

    def __init__(self, rows: typing.Iterable[CurveRow] = ()):
        rows = sorted(rows, key=lambda r: (r.strategy, r.seed, r.budget))
        keys = [(r.strategy, r.seed, r.budget) for r in rows]
        if len(set(keys)) != len(keys):
            raise ConfigError("error curve has repeated (strategy, seed, budget) rows")
        for row in rows:
            if not 0.0 <= row.error_rate <= 1.0:
                raise ConfigError(f"error rate {row.error_rate} outside [0, 1]")
        self._rows = tuple(rows)

    def __getitem__(self, key):
        return self._rows[key]

    def __len__(self) -> int:
        return len(self._rows)

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, type(self)):
            return False
        return self._rows == other._rows

    @property
    def strategies(self) -> typing.List[str]:
        return sorted({row.strategy for row in self._rows})

    def mean_curves(self) -> typing.Dict[str, typing.List[typing.Tuple[int, float]]]:
        """Per strategy, the mean error over seeds at each budget."""
        grouped: typing.Dict[str, typing.Dict[int, typing.List[float]]] = {}
        for row in self._rows:
            grouped.setdefault(row.strategy, {}).setdefault(row.budget, []).append(
                row.error_rate
            )
        return {
            strategy: [
                (budget, statistics.mean(errors))
                for budget, errors in sorted(budgets.items())
            ]
            for strategy, budgets in sorted(grouped.items())
        }


def _check_feasible(
    config: ExperimentConfig, dataset: Dataset, strategies: typing.List[Strategy]
) -> SeedSet:
    seeds = SeedSet.first_of_each_class(LabelOracle(dataset))
    for strategy in strategies:
        # raises ConfigError prefixed with the strategy name
        strategy.check_budget(dataset, seeds, config.budgets[-1])
    return seeds


def _evaluate(
    config: ExperimentConfig,
    dataset: Dataset,
    kernel,
    strategy: Strategy,
    seed: int,
    budget: int,
) -> CurveRow:
    start = time.perf_counter()
    oracle = LabelOracle(dataset, budget=budget)
    seeds = SeedSet.first_of_each_class(oracle)
    selected = strategy.select(dataset, oracle, seeds, budget)
    if strategy.label_free and oracle.queries_used:
        raise BudgetExceeded(
            f"{strategy.name.value} consulted {oracle.queries_used} labels "
            "while selecting"
        )
    queried_labels = oracle.query_many(selected)
    if oracle.queries_used != budget:
        raise BudgetExceeded(
            f"{strategy.name.value} charged {oracle.queries_used} queries "
            f"for budget {budget}"
        )

    seed_indices = set(seeds.indices)
    train = list(seeds.indices) + [i for i in selected if i not in seed_indices]
    labels = dict(zip(seeds.indices, seeds.labels))
    labels.update(zip(selected, queried_labels))
    model = train_rlsc(
        dataset.features[train],
        [labels[i] for i in train],
        kernel,
        config.lam,
        num_classes=dataset.num_classes,
    )
    predicted, _ = predict(model, dataset.features)
    if config.held_out:
        mask = np.ones(dataset.n, dtype=bool)
        mask[train] = False
        error = error_rate(predicted[mask], dataset.labels[mask])
    else:
        error = error_rate(predicted, dataset.labels)
    wall_ms = 1000 * (time.perf_counter() - start)
    logger.info(
        "%s seed=%d budget=%d: error %.4f in %.1f ms",
        strategy.name.value,
        seed,
        budget,
        error,
        wall_ms,
    )
    return CurveRow(
        strategy=strategy.name.value,
        seed=seed,
        budget=budget,
        error_rate=error,
        queries_used=oracle.queries_used,
        wall_ms=round(wall_ms, 3) if config.record_wall_time else 0.0,
    )


def _run_cell(
    config: ExperimentConfig,
    dataset: Dataset,
    kernel,
    name: StrategyName,
    seed: int,
    pool: typing.Optional[SubsetIndices],
) -> typing.List[CurveRow]:
    rows = []
    for budget in config.budgets:
        strategy_config = StrategyConfig(
            name=name,
            budget=budget,
            kernel=kernel,
            sparsify=config.sparsify,
            em=dataclasses.replace(config.em, seed=seed),
            outlier=config.outlier,
            lam=config.lam,
            seed=seed,
        )
        kwargs = {"pool": pool} if name is StrategyName.VAL else {}
        strategy = make_strategy(strategy_config, **kwargs)
        rows.append(_evaluate(config, dataset, kernel, strategy, seed, budget))
    return rows


async def run_experiment_async(
    config: ExperimentConfig, dataset: typing.Optional[Dataset] = None
) -> ErrorCurve:
    """Run every (strategy, repeat) cell on a thread pool.

    Repeat r uses seed ``master_seed + r`` for every strategy, so strategies
    are compared on identical random streams.
    """
    if dataset is None:
        dataset = config.data.load()
    kernel = resolve_kernel(config.kernel, dataset.features)
    largest = [
        make_strategy(
            StrategyConfig(
                name=name,
                budget=config.budgets[-1],
                kernel=kernel,
                sparsify=config.sparsify,
            )
        )
        for name in config.strategies
    ]
    _check_feasible(config, dataset, largest)

    pool = None
    if StrategyName.VAL in config.strategies:
        pool = sparsify_halve(dataset.features, kernel, config.sparsify)

    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        tasks = set()
        for name in config.strategies:
            for repeat in range(config.repeats):
                seed = config.master_seed + repeat
                cell = functools.partial(
                    _run_cell, config, dataset, kernel, name, seed, pool
                )
                tasks.add(asyncio.ensure_future(loop.run_in_executor(executor, cell)))
        results = await asyncio.gather(*tasks)

    curve = ErrorCurve(row for rows in results for row in rows)
    logger.info(
        "Experiment on %s finished: %d rows from %d cells",
        dataset.name,
        len(curve),
        len(results),
    )
    return curve


def run_experiment(
    config: ExperimentConfig, dataset: typing.Optional[Dataset] = None
) -> ErrorCurve:
    return asyncio.run(run_experiment_async(config, dataset))
