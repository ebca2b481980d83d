"""Loading, encoding and sampling of tabular classification datasets.

Categorical columns are ordinal-encoded (sorted category order), missing
numeric cells get the column median and missing categorical cells get a
dedicated ``MISSING`` category. Every sampling routine is a pure function
of its inputs and seed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

MISSING = "<missing>"
MAX_FEATURES = 50
MIN_ROWS = 3000
MIN_PILOT = 20
SCHEMA_VERSION = 1

TASKS = ("binary", "multiclass", "binarized-regression", "regression")


class DatasetError(ValueError):
    """Raised for malformed or ineligible datasets."""


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str  # "numeric", "categorical" or "label"
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical", "label"):
            raise DatasetError(f"unknown column kind {self.kind!r}")
        if len(set(self.categories)) != len(self.categories):
            raise DatasetError(f"duplicate categories in column {self.name!r}")

    def encode(self, value: str) -> int:
        return self.categories.index(value)

    def decode(self, code: int) -> str:
        return self.categories[int(code)]

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "categories": list(self.categories)}

    @classmethod
    def from_dict(cls, data: dict) -> "ColumnSchema":
        return cls(data["name"], data["kind"], tuple(data.get("categories", ())))


@dataclass(frozen=True)
class TabularDataset:
    """Encoded dataset. ``index`` holds row ids into the source dataset."""

    schema: tuple[ColumnSchema, ...]
    rows: np.ndarray
    labels: np.ndarray
    task: str
    name: str
    n_classes: int
    index: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.index is None:
            object.__setattr__(self, "index", np.arange(self.rows.shape[0]))
        if self.rows.ndim != 2:
            raise DatasetError("rows must be a 2-D matrix")
        if self.rows.shape[0] != self.labels.shape[0]:
            raise DatasetError("row count and label count differ")
        if sum(c.kind == "label" for c in self.schema) != 1:
            raise DatasetError("schema needs exactly one label column")
        if len(self.feature_columns) != self.rows.shape[1]:
            raise DatasetError("schema and matrix disagree on feature count")
        if self.task not in TASKS:
            raise DatasetError(f"unknown task {self.task!r}")
        if self.task != "regression" and self.n_classes < 2:
            raise DatasetError("need at least 2 classes")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @property
    def feature_columns(self) -> list[ColumnSchema]:
        return [c for c in self.schema if c.kind != "label"]

    @property
    def label_column(self) -> ColumnSchema:
        return next(c for c in self.schema if c.kind == "label")

    def take(self, idx) -> "TabularDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return replace(self, rows=self.rows[idx], labels=self.labels[idx], index=self.index[idx])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels.astype(np.int64), minlength=self.n_classes)


@dataclass(frozen=True)
class DatasetSplit:
    train: TabularDataset
    test: TabularDataset
    source_name: str


@dataclass(frozen=True)
class PilotStudy:
    data: TabularDataset
    m: int
    seed: int

    def __post_init__(self):
        if self.m != self.data.n:
            raise DatasetError("pilot size does not match its data")
        if self.m < MIN_PILOT:
            raise DatasetError(f"pilot size must be at least {MIN_PILOT}")


@dataclass(frozen=True)
class Eligibility:
    passed: bool
    reasons: tuple[str, ...] = ()

    def __bool__(self):
        return self.passed


def _parse_float(cell: str):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _dense_label_ids(values: list[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    names = tuple(sorted(set(values)))
    lookup = {v: i for i, v in enumerate(names)}
    return np.array([lookup[v] for v in values], dtype=np.int64), names


def _task_for(n_classes: int) -> str:
    return "binary" if n_classes == 2 else "multiclass"


def load_csv(path, label_column: str, regression: bool = False, name: str | None = None) -> TabularDataset:
    """Read a headed, comma-separated UTF-8 file into an encoded dataset.

    With ``regression=True`` the label column is kept as floats (task
    ``"regression"``); pass the result through :func:`binarize_regression`.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path} is empty") from None
        body = [row for row in reader if row]
    if label_column not in header:
        raise DatasetError(f"label column {label_column!r} not in {path.name}")
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise DatasetError(f"row {i + 2} of {path.name} has {len(row)} cells, expected {len(header)}")
    if not body:
        raise DatasetError(f"{path} has no data rows")

    label_pos = header.index(label_column)
    raw_labels = [row[label_pos].strip() for row in body]
    if any(v == "" for v in raw_labels):
        raise DatasetError("missing label value")

    schema: list[ColumnSchema] = []
    columns: list[np.ndarray] = []
    for j, col in enumerate(header):
        if j == label_pos:
            continue
        cells = [row[j].strip() for row in body]
        present = [c for c in cells if c != ""]
        if not present:
            raise DatasetError(f"column {col!r} has no values to impute from")
        parsed = [_parse_float(c) for c in present]
        if all(p is not None for p in parsed):
            median = float(np.median(parsed))
            values = np.array([median if c == "" else float(c) for c in cells])
            schema.append(ColumnSchema(col, "numeric"))
        else:
            cats = sorted(set(present))
            if len(present) < len(cells):
                cats.append(MISSING)
            lookup = {c: i for i, c in enumerate(cats)}
            values = np.array([lookup[c if c != "" else MISSING] for c in cells], dtype=np.float64)
            schema.append(ColumnSchema(col, "categorical", tuple(cats)))
        columns.append(values)

    rows = np.column_stack(columns) if columns else np.empty((len(body), 0))
    name = name or path.stem

    if regression:
        targets = []
        for v in raw_labels:
            p = _parse_float(v)
            if p is None:
                raise DatasetError(f"non-numeric regression label {v!r}")
            targets.append(p)
        schema.insert(label_pos, ColumnSchema(label_column, "label"))
        return TabularDataset(tuple(schema), rows, np.array(targets), "regression", name, 0)

    labels, names = _dense_label_ids(raw_labels)
    if len(names) < 2:
        raise DatasetError("single-class dataset")
    schema.insert(label_pos, ColumnSchema(label_column, "label", names))
    return TabularDataset(tuple(schema), rows, labels, _task_for(len(names)), name, len(names))


def binarize_labels(values) -> np.ndarray:
    """Median split: values <= median -> 0, above -> 1."""
    values = np.asarray(values, dtype=np.float64)
    median = np.median(values)
    out = (values > median).astype(np.int64)
    if out.min() == out.max():
        raise DatasetError("degenerate median split: labels are all identical")
    return out


def binarize_regression(dataset: TabularDataset) -> TabularDataset:
    labels = binarize_labels(dataset.labels)
    schema = tuple(
        ColumnSchema(c.name, "label", ("low", "high")) if c.kind == "label" else c
        for c in dataset.schema
    )
    return replace(dataset, schema=schema, labels=labels, task="binarized-regression", n_classes=2)


def validate_eligibility(dataset: TabularDataset) -> Eligibility:
    reasons = []
    if dataset.n < MIN_ROWS:
        reasons.append(f"too few rows: {dataset.n} < {MIN_ROWS}")
    if dataset.d >= MAX_FEATURES:
        reasons.append(f"too many features: {dataset.d} >= {MAX_FEATURES}")
    return Eligibility(not reasons, tuple(reasons))


def subsample_and_split(dataset: TabularDataset, n_total: int = 3000, n_test: int = 500,
                        seed: int = 0) -> DatasetSplit:
    """Sample ``n_total`` rows without replacement; ``n_test`` become the test set."""
    if n_total > dataset.n:
        raise DatasetError(f"cannot sample {n_total} rows from {dataset.n}")
    if not 0 < n_test < n_total:
        raise DatasetError("n_test must be between 1 and n_total - 1")
    if dataset.d >= MAX_FEATURES:
        raise DatasetError(f"too many features: {dataset.d}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(dataset.n, size=n_total, replace=False)
    return DatasetSplit(
        train=dataset.take(idx[n_test:]),
        test=dataset.take(idx[:n_test]),
        source_name=dataset.name,
    )


def draw_pilot(split: DatasetSplit, m: int, seed: int = 0) -> PilotStudy:
    n_train = split.train.n
    if m < MIN_PILOT or m > n_train:
        raise DatasetError(f"pilot size {m} outside [{MIN_PILOT}, {n_train}]")
    rng = np.random.default_rng(seed)
    idx = rng.choice(n_train, size=m, replace=False)
    return PilotStudy(data=split.train.take(idx), m=m, seed=seed)


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 3000
    d: int = 5
    classes: int = 2
    separation: float = 2.0
    label_noise: float = 0.0
    n_informative: int | None = None
    class_weights: tuple[float, ...] | None = None
    name: str = "synthetic"

    def validate(self):
        if self.classes < 2 or self.d < 1 or self.n < self.classes:
            raise DatasetError("synthetic spec needs classes >= 2, d >= 1, n >= classes")
        if self.separation < 0 or not 0.0 <= self.label_noise <= 1.0:
            raise DatasetError("separation must be >= 0 and label_noise in [0, 1]")
        k = self.d if self.n_informative is None else self.n_informative
        if not 1 <= k <= self.d:
            raise DatasetError("n_informative must be in [1, d]")
        if self.class_weights is not None and (
            len(self.class_weights) != self.classes or min(self.class_weights) <= 0
        ):
            raise DatasetError("class_weights must be positive, one per class")


def generate_synthetic(spec: SyntheticSpec | dict, seed: int = 0) -> TabularDataset:
    """Gaussian class clusters with unit noise.

    Centroids are placed so that every pair of classes is ``separation``
    apart when ``classes <= n_informative``; otherwise they sit on a line
    with ``separation`` between neighbours. A ``label_noise`` fraction of
    rows gets a uniformly drawn different label.
    """
    if isinstance(spec, dict):
        spec = SyntheticSpec(**spec)
    spec.validate()
    rng = np.random.default_rng(seed)
    C, d = spec.classes, spec.d
    k = d if spec.n_informative is None else spec.n_informative

    centroids = np.zeros((C, d))
    if C <= k:
        q, _ = np.linalg.qr(rng.normal(size=(k, C)))
        centroids[:, :k] = q.T * (spec.separation / math.sqrt(2.0))
    else:
        direction = rng.normal(size=k)
        direction /= np.linalg.norm(direction)
        steps = np.arange(C) - (C - 1) / 2.0
        centroids[:, :k] = np.outer(steps * spec.separation, direction)

    if spec.class_weights is None:
        counts = np.full(C, spec.n // C)
        counts[: spec.n % C] += 1
    else:
        w = np.asarray(spec.class_weights, dtype=np.float64)
        counts = np.floor(w / w.sum() * spec.n).astype(np.int64)
        counts = np.maximum(counts, 1)
        counts[np.argmax(counts)] += spec.n - counts.sum()
    labels = np.repeat(np.arange(C), counts)
    rng.shuffle(labels)
    rows = centroids[labels] + rng.normal(size=(spec.n, d))

    n_flip = int(round(spec.label_noise * spec.n))
    if n_flip:
        flip = rng.choice(spec.n, size=n_flip, replace=False)
        shift = rng.integers(1, C, size=n_flip)
        labels = labels.copy()
        labels[flip] = (labels[flip] + shift) % C

    schema = tuple(ColumnSchema(f"x{j}", "numeric") for j in range(d)) + (
        ColumnSchema("label", "label", tuple(str(c) for c in range(C))),
    )
    return TabularDataset(schema, rows, labels.astype(np.int64), _task_for(C), spec.name, C)


def save_dataset(dataset: TabularDataset, directory) -> Path:
    """Write ``<name>.csv`` plus a ``<name>.schema.json`` sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{dataset.name}.csv"
    header = [c.name for c in dataset.feature_columns] + [dataset.label_column.name]
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row, label in zip(dataset.rows, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [repr(label.item())])
    sidecar = {
        "version": SCHEMA_VERSION,
        "name": dataset.name,
        "task": dataset.task,
        "n_classes": dataset.n_classes,
        "columns": [c.to_dict() for c in dataset.schema],
    }
    (directory / f"{dataset.name}.schema.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path


def load_dataset(directory, name: str) -> TabularDataset:
    """Inverse of :func:`save_dataset`."""
    directory = Path(directory)
    schema_path = directory / f"{name}.schema.json"
    csv_path = directory / f"{name}.csv"
    if not schema_path.is_file() or not csv_path.is_file():
        raise DatasetError(f"dataset {name!r} not found in {directory}")
    meta = json.loads(schema_path.read_text(encoding="utf-8"))
    if meta.get("version") != SCHEMA_VERSION:
        raise DatasetError(f"unsupported schema version {meta.get('version')}")
    schema = tuple(ColumnSchema.from_dict(c) for c in meta["columns"])
    with csv_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        body = [row for row in reader if row]
    table = np.array([[float(v) for v in row] for row in body], dtype=np.float64)
    table = table.reshape(len(body), -1)
    rows = np.ascontiguousarray(table[:, :-1])
    if meta["task"] == "regression":
        labels = table[:, -1]
    else:
        labels = table[:, -1].astype(np.int64)
    return TabularDataset(schema, rows, labels, meta["task"], meta["name"], int(meta["n_classes"]))
