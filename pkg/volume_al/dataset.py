import csv
import enum
import io
import logging
import math
import typing
from pathlib import Path

import numpy as np

from volume_al.errors import (
    BudgetExceeded,
    ConfigError,
    IoError,
    MalformedInput,
    ShapeError,
)

__all__ = [
    "Shape",
    "Dataset",
    "LabelOracle",
    "load_csv",
    "save_csv",
    "gen_synthetic",
    "scale_min_max",
]

logger = logging.getLogger(__name__)

LabelColumn = typing.Union[int, str, None]


class Shape(enum.Enum):
    BLOBS = "blobs"
    RINGS = "rings"
    SPIRALS = "spirals"


class Dataset:
    """A feature matrix with hidden ground-truth labels.

    Arrays are stored read-only so a Dataset can be shared between threads.
    Strategies should only ever see labels through a `LabelOracle`.
    """

    __slots__ = ("_features", "_labels", "_name")

    _features: np.ndarray
    _labels: np.ndarray
    _name: str

    def __init__(self, features, labels, name: str = "dataset"):
        features = np.array(features, dtype=float)
        labels = np.array(labels)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ShapeError(
                f"features must be a non-empty n x m matrix, got {features.shape}"
            )
        if labels.shape != (features.shape[0],):
            raise ShapeError(
                f"expected {features.shape[0]} labels, got shape {labels.shape}"
            )
        if not np.all(np.isfinite(features)):
            raise MalformedInput("features contain non-finite values")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            raise MalformedInput("labels must be integer class ids")
        labels = labels.astype(np.int64)
        if np.any(labels < 0):
            raise MalformedInput("labels must be non-negative")
        features.setflags(write=False)
        labels.setflags(write=False)
        self._features = features
        self._labels = labels
        self._name = name

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, type(self)):
            return False
        return all(
            [
                np.array_equal(self.features, other.features),
                np.array_equal(self.labels, other.labels),
            ]
        )

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return (
            f"Dataset(name={self.name!r}, n={self.n}, m={self.m}, "
            f"classes={self.num_classes})"
        )

    @property
    def features(self) -> np.ndarray:
        return self._features

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def name(self) -> str:
        return self._name

    @property
    def n(self) -> int:
        return self._features.shape[0]

    @property
    def m(self) -> int:
        return self._features.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self._labels.max()) + 1

    def with_features(self, features: np.ndarray) -> "Dataset":
        return type(self)(features, self._labels, self._name)


class LabelOracle:
    """Reveals labels one index at a time and charges the query budget.

    Repeated queries of an index are charged once. Labels handed out through
    `grant` (the per-class seeds) are free and do not count as queries.
    Not thread-safe: a single caller owns an oracle.
    """

    dataset: Dataset
    budget: typing.Optional[int]
    _queried: typing.Dict[int, int]
    _granted: typing.Set[int]

    def __init__(self, dataset: Dataset, budget: typing.Optional[int] = None):
        if budget is not None and budget < 0:
            raise ConfigError(f"budget must be non-negative, got {budget}")
        self.dataset = dataset
        self.budget = budget
        self._queried = {}
        self._granted = set()

    @property
    def queries_used(self) -> int:
        return len(self._queried)

    @property
    def queried(self) -> typing.List[int]:
        return list(self._queried)

    def _check_index(self, index: int) -> int:
        index = int(index)
        if not 0 <= index < self.dataset.n:
            raise ShapeError(f"index {index} outside [0, {self.dataset.n})")
        return index

    def query(self, index: int) -> int:
        index = self._check_index(index)
        if index not in self._queried:
            if self.budget is not None and self.queries_used >= self.budget:
                raise BudgetExceeded(
                    f"query budget of {self.budget} exhausted (index {index})"
                )
            self._queried[index] = int(self.dataset.labels[index])
        return self._queried[index]

    def query_many(self, indices: typing.Iterable[int]) -> np.ndarray:
        return np.array([self.query(i) for i in indices], dtype=np.int64)

    def grant(self, indices: typing.Iterable[int]) -> np.ndarray:
        checked = [self._check_index(i) for i in indices]
        self._granted.update(checked)
        return self.dataset.labels[checked].copy()

    def is_known(self, index: int) -> bool:
        return index in self._queried or index in self._granted


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _resolve_label_column(
    label_column: LabelColumn, header: typing.Optional[typing.List[str]], width: int
) -> int:
    if label_column is None:
        return width - 1
    if isinstance(label_column, str) and label_column.strip().isdigit():
        label_column = int(label_column)
    if isinstance(label_column, int):
        if not 1 <= label_column <= width:
            raise ConfigError(
                f"label column {label_column} outside 1..{width} (1-based)"
            )
        return label_column - 1
    if header is None:
        raise ConfigError(
            f"label column {label_column!r} given by name but the file has no header"
        )
    try:
        return header.index(label_column)
    except ValueError:
        raise ConfigError(f"no column named {label_column!r} in header {header}")


def load_csv(
    path: typing.Union[str, Path], label_column: LabelColumn = None
) -> Dataset:
    """Load a comma-separated file into a Dataset.

    The first row is a header when none of its cells is numeric. The label
    column is a 1-based index or a header name and defaults to the last column.
    Labels are re-encoded to 0..c-1 in order of first appearance.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line = raw[: e.start].count(b"\n") + 1
        raise MalformedInput(f"{path} is not UTF-8 text: {e.reason}", row=line) from e
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        rows = [(row, line) for line, row in _numbered(reader)]
    except csv.Error as e:
        raise MalformedInput(str(e), row=reader.line_num) from e
    if not rows:
        raise MalformedInput(f"{path} contains no rows")

    header = None
    first, _ = rows[0]
    if not any(_is_number(cell) for cell in first):
        header = [cell.strip() for cell in first]
        rows = rows[1:]
    if not rows:
        raise MalformedInput(f"{path} contains a header but no data")

    width = len(header) if header is not None else len(rows[0][0])
    if width < 2:
        raise MalformedInput(f"{path} has no feature columns")
    label_index = _resolve_label_column(label_column, header, width)

    features = []
    raw_labels = []
    for row, line in rows:
        if len(row) != width:
            raise MalformedInput(f"expected {width} cells, got {len(row)}", row=line)
        values = []
        for i, cell in enumerate(row):
            if i == label_index:
                continue
            try:
                value = float(cell)
            except ValueError:
                raise MalformedInput(f"non-numeric feature {cell!r}", row=line)
            if not math.isfinite(value):
                raise MalformedInput(f"non-finite feature {cell!r}", row=line)
            values.append(value)
        features.append(values)
        raw_labels.append(row[label_index].strip())

    encoding: typing.Dict[str, int] = {}
    labels = [encoding.setdefault(label, len(encoding)) for label in raw_labels]
    logger.debug("Loaded %s: %d rows, %d classes", path, len(labels), len(encoding))
    return Dataset(np.array(features), np.array(labels), name=path.stem)


def _numbered(reader) -> typing.Iterator[typing.Tuple[int, typing.List[str]]]:
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        yield reader.line_num, row


def save_csv(dataset: Dataset, path: typing.Union[str, Path]) -> None:
    path = Path(path)
    header = [f"f{j + 1}" for j in range(dataset.m)] + ["label"]
    try:
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for x, y in zip(dataset.features, dataset.labels):
                writer.writerow([f"{v:.17g}" for v in x] + [int(y)])
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def gen_synthetic(
    shape: typing.Union[Shape, str],
    classes: int,
    per_class: int,
    separation: float,
    noise_std: float,
    seed: int,
) -> Dataset:
    """Generate a balanced two-dimensional data set, class-major ordered.

    blobs: isotropic Gaussians on a circle, adjacent centres `separation` apart.
    rings: concentric rings of radius separation * (c + 1).
    spirals: interleaved arms scaled by `separation`.
    """
    shape = Shape(shape)
    if classes < 2:
        raise ConfigError(f"classes must be at least 2, got {classes}")
    if per_class < 1:
        raise ConfigError(f"per_class must be at least 1, got {per_class}")
    if noise_std < 0:
        raise ConfigError(f"noise_std must be non-negative, got {noise_std}")
    if separation <= 0:
        raise ConfigError(f"separation must be positive, got {separation}")

    rng = np.random.default_rng(seed)
    parts = []
    for c in range(classes):
        if shape is Shape.BLOBS:
            radius = separation / (2 * math.sin(math.pi / classes))
            angle = 2 * math.pi * c / classes
            centre = radius * np.array([math.cos(angle), math.sin(angle)])
            points = np.tile(centre, (per_class, 1))
        elif shape is Shape.RINGS:
            theta = rng.uniform(0, 2 * math.pi, per_class)
            radius = separation * (c + 1)
            points = radius * np.column_stack([np.cos(theta), np.sin(theta)])
        else:
            t = rng.uniform(0.25, 1.0, per_class)
            theta = 3 * math.pi * t + 2 * math.pi * c / classes
            points = separation * t[:, None] * np.column_stack(
                [np.cos(theta), np.sin(theta)]
            )
        parts.append(points + rng.normal(0.0, noise_std, size=(per_class, 2)))

    features = np.vstack(parts)
    labels = np.repeat(np.arange(classes), per_class)
    return Dataset(features, labels, name=f"{shape.value}-{classes}x{per_class}")


def scale_min_max(dataset: Dataset) -> Dataset:
    """Scale every feature column to [0, 1]; constant columns become 0."""
    features = dataset.features
    low = features.min(axis=0)
    span = features.max(axis=0) - low
    span[span == 0] = 1.0
    return dataset.with_features((features - low) / span)
