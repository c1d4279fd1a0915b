import collections.abc
import dataclasses
import typing
from pathlib import Path

from volume_al.classifier import DEFAULT_LAMBDA
from volume_al.dataset import Dataset, Shape, gen_synthetic, load_csv, scale_min_max
from volume_al.errors import ConfigError, IoError
from volume_al.geometry import OutlierParams
from volume_al.kernel import KernelKind, KernelSpec
from volume_al.represent import EmParams, InitMode
from volume_al.sparsify import SparsifyParams
from volume_al.strategies import StrategyName

__all__ = ["ConfigPayload", "DataSource", "ExperimentConfig"]

KNOWN_KEYS = frozenset(
    [
        "data.csv",
        "data.label_column",
        "data.shape",
        "data.classes",
        "data.per_class",
        "data.separation",
        "data.noise_std",
        "data.seed",
        "data.scale_features",
        "kernel.kind",
        "kernel.gamma",
        "kernel.kappa",
        "sparsify.mu",
        "sparsify.target_fraction",
        "sparsify.score_variant",
        "em.tol",
        "em.max_iter",
        "em.init",
        "em.restarts",
        "outlier.eps_prime",
        "outlier.neighborhood",
        "classifier.lambda",
        "classifier.held_out",
        "experiment.strategies",
        "experiment.budgets",
        "experiment.repeats",
        "experiment.master_seed",
        "experiment.workers",
        "experiment.record_wall_time",
        "output.dir",
    ]
)

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigPayload(collections.abc.Mapping):
    """Read-only view of flat ``section.key=value`` settings with typed getters."""

    __slots__ = ("_values",)

    def __init__(self, values: typing.Mapping[str, str]):
        if values is not None and not isinstance(values, collections.abc.Mapping):
            raise ConfigError("configuration must be a mapping")
        unknown = sorted(set(values or {}) - KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        self._values = dict(values or {})

    def __getitem__(self, key: str) -> str:
        return self._values[key]

    def __iter__(self) -> typing.Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    @classmethod
    def parse(cls, text: str) -> "ConfigPayload":
        values: typing.Dict[str, str] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(f"line {number}: expected key=value, got {raw!r}")
            if key in values:
                raise ConfigError(f"line {number}: duplicate key {key!r}")
            if key not in KNOWN_KEYS:
                raise ConfigError(f"line {number}: unknown key {key!r}")
            values[key] = value.strip()
        return cls(values)

    def _convert(self, key: str, default, convert):
        if key not in self._values:
            return default
        try:
            return convert(self._values[key])
        except ValueError as e:
            raise ConfigError(f"{key}: {e}") from e

    def get_str(self, key: str, default=None) -> typing.Optional[str]:
        return self._values.get(key, default)

    def get_int(self, key: str, default=None) -> typing.Optional[int]:
        return self._convert(key, default, int)

    def get_float(self, key: str, default=None) -> typing.Optional[float]:
        return self._convert(key, default, float)

    def get_bool(self, key: str, default: bool = False) -> bool:
        def convert(value: str) -> bool:
            if value.lower() in _TRUE:
                return True
            if value.lower() in _FALSE:
                return False
            raise ValueError(f"expected a boolean, got {value!r}")

        return self._convert(key, default, convert)

    def get_list(self, key: str, default=None, item=str) -> typing.Optional[list]:
        def convert(value: str) -> list:
            return [item(part.strip()) for part in value.split(",") if part.strip()]

        return self._convert(key, default, convert)


@dataclasses.dataclass(frozen=True)
class DataSource:
    csv: typing.Optional[Path] = None
    label_column: typing.Union[int, str, None] = None
    shape: typing.Optional[Shape] = None
    classes: int = 3
    per_class: int = 50
    separation: float = 10.0
    noise_std: float = 1.0
    seed: int = 0
    scale_features: bool = False

    def __post_init__(self):
        if (self.csv is None) == (self.shape is None):
            raise ConfigError("exactly one of data.csv and data.shape is required")

    def load(self) -> Dataset:
        if self.csv is not None:
            dataset = load_csv(self.csv, self.label_column)
        else:
            dataset = gen_synthetic(
                self.shape,
                self.classes,
                self.per_class,
                self.separation,
                self.noise_std,
                self.seed,
            )
        if self.scale_features:
            dataset = scale_min_max(dataset)
        return dataset


DEFAULT_STRATEGIES = (
    StrategyName.VAL,
    StrategyName.RANDOM,
    StrategyName.TED,
    StrategyName.MARGIN,
)


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    data: DataSource
    budgets: typing.Tuple[int, ...]
    kernel: KernelSpec = KernelSpec()
    sparsify: SparsifyParams = SparsifyParams()
    em: EmParams = EmParams()
    outlier: OutlierParams = OutlierParams()
    lam: float = DEFAULT_LAMBDA
    held_out: bool = False
    strategies: typing.Tuple[StrategyName, ...] = DEFAULT_STRATEGIES
    repeats: int = 1
    master_seed: int = 0
    workers: int = 1
    record_wall_time: bool = False
    output_dir: Path = Path("results")

    def __post_init__(self):
        if not self.budgets:
            raise ConfigError("experiment.budgets must list at least one budget")
        if any(b < 1 for b in self.budgets):
            raise ConfigError(f"budgets must be positive, got {list(self.budgets)}")
        if any(a >= b for a, b in zip(self.budgets, self.budgets[1:])):
            raise ConfigError(
                f"budgets must be strictly ascending, got {list(self.budgets)}"
            )
        if not self.strategies:
            raise ConfigError("experiment.strategies must not be empty")
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigError("experiment.strategies lists a strategy twice")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be at least 1, got {self.repeats}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if not self.lam > 0:
            raise ConfigError(f"classifier.lambda must be positive, got {self.lam}")
        if self.em.init is InitMode.GIVEN:
            raise ConfigError("em.init=given needs centers a config cannot supply")

    @classmethod
    def load(cls, data: typing.Mapping[str, str]) -> "ExperimentConfig":
        payload = data if isinstance(data, ConfigPayload) else ConfigPayload(data)
        csv_path = payload.get_str("data.csv")
        shape = payload.get_str("data.shape")
        try:
            data_source = DataSource(
                csv=Path(csv_path) if csv_path else None,
                label_column=payload.get_str("data.label_column"),
                shape=Shape(shape) if shape else None,
                classes=payload.get_int("data.classes", 3),
                per_class=payload.get_int("data.per_class", 50),
                separation=payload.get_float("data.separation", 10.0),
                noise_std=payload.get_float("data.noise_std", 1.0),
                seed=payload.get_int("data.seed", 0),
                scale_features=payload.get_bool("data.scale_features"),
            )
            gamma = payload.get_str("kernel.gamma", "auto")
            kernel = KernelSpec(
                kind=KernelKind(payload.get_str("kernel.kind", "rbf")),
                gamma=None if gamma == "auto" else float(gamma),
                kappa=payload.get_float("kernel.kappa"),
            )
            sparsify = SparsifyParams(
                mu=payload.get_float("sparsify.mu", 0.1),
                target_fraction=payload.get_float("sparsify.target_fraction", 0.5),
                score_variant=payload.get_str("sparsify.score_variant", "paper"),
            )
            em = EmParams(
                tol=payload.get_float("em.tol", 1e-9),
                max_iter=payload.get_int("em.max_iter", 300),
                init=payload.get_str("em.init", "passive_random"),
                restarts=payload.get_int("em.restarts", 1),
            )
            outlier = OutlierParams(
                eps_prime=payload.get_float("outlier.eps_prime", 0.05),
                neighborhood=payload.get_int("outlier.neighborhood", 5),
            )
            strategies = payload.get_list(
                "experiment.strategies", list(DEFAULT_STRATEGIES), StrategyName
            )
            budgets = payload.get_list("experiment.budgets", None, int)
        except ValueError as e:
            # enum lookups and float() on kernel.gamma
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from e
        if budgets is None:
            raise ConfigError("experiment.budgets is required")

        return cls(
            data=data_source,
            budgets=tuple(budgets),
            kernel=kernel,
            sparsify=sparsify,
            em=em,
            outlier=outlier,
            lam=payload.get_float("classifier.lambda", DEFAULT_LAMBDA),
            held_out=payload.get_bool("classifier.held_out"),
            strategies=tuple(strategies),
            repeats=payload.get_int("experiment.repeats", 1),
            master_seed=payload.get_int("experiment.master_seed", 0),
            workers=payload.get_int("experiment.workers", 1),
            record_wall_time=payload.get_bool("experiment.record_wall_time"),
            output_dir=Path(payload.get_str("output.dir", "results")),
        )

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        return cls.load(ConfigPayload.parse(text))

    @classmethod
    def from_file(cls, path: typing.Union[str, Path]) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise IoError(f"cannot read config {path}: {e}") from e
        return cls.loads(text)
