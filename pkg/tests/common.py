import typing
from pathlib import Path

import numpy as np

from volume_al.config import DataSource, ExperimentConfig
from volume_al.dataset import Dataset, Shape, gen_synthetic
from volume_al.kernel import KernelKind, KernelMatrix, KernelSpec


def random_cloud(seed: int, n: int = 20, m: int = 2) -> np.ndarray:
    return np.random.default_rng(seed).normal(size=(n, m))


def random_psd(seed: int, n: int) -> KernelMatrix:
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, int(rng.integers(1, n + 1))))
    entries = A @ A.T
    entries = (entries + entries.T) / 2
    return KernelMatrix(entries, KernelSpec(KernelKind.LINEAR))


def three_blobs(seed: int = 0, per_class: int = 50) -> Dataset:
    return gen_synthetic(Shape.BLOBS, 3, per_class, 10.0, 1.0, seed)


def write_lines(path: Path, lines: typing.Iterable[str]) -> Path:
    path.write_text("\n".join(lines) + "\n")
    return path


def small_experiment(output_dir: Path, **overrides) -> ExperimentConfig:
    kwargs: typing.Dict[str, typing.Any] = dict(
        data=DataSource(shape=Shape.BLOBS, classes=3, per_class=10, seed=1),
        budgets=(3, 6),
        output_dir=output_dir,
    )
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)
