"""Benchmark corpora: entries, the synthetic stand-in, and the ground-truth cache."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..curves import GroundTruth, compute_ground_truth, default_needed_grid, derive_seed
from ..learners import ForestParams
from ..tabular import DatasetSplit, SyntheticSpec, TabularDataset, generate_synthetic, subsample_and_split

log = logging.getLogger(__name__)

CACHE_VERSION = 1

FAMILIES = (
    "volcano", "credit", "house", "sensor", "genome",
    "weather", "traffic", "retail", "clinic", "orbit",
)


@dataclass(frozen=True)
class GroundTruthConfig:
    repetitions: int = 20
    n_trees: int = 100
    grid: tuple[int, ...] | None = None
    threshold: float = 0.99
    seed: int = 0

    def params(self) -> ForestParams:
        return ForestParams(n_trees=self.n_trees, seed=self.seed)

    def to_dict(self) -> dict:
        return {
            "repetitions": self.repetitions,
            "n_trees": self.n_trees,
            "grid": None if self.grid is None else list(self.grid),
            "threshold": self.threshold,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    split: DatasetSplit
    ground_truth: GroundTruth | None = None
    meta: dict = field(default_factory=dict)


def synthetic_specs(n_datasets: int = 40, seed: int = 0, n: int = 3000) -> list[SyntheticSpec]:
    """Difficulty-graded synthetic datasets named after ten domain families.

    Difficulty (separation, label noise, informative features, class count)
    is drawn independently of the family, so name clusters do not encode it.
    """
    rng = np.random.default_rng(seed)
    grade = rng.permutation(n_datasets) / max(1, n_datasets - 1)
    specs = []
    for i in range(n_datasets):
        family = FAMILIES[i % len(FAMILIES)]
        g = float(grade[i])  # 0 = easiest, 1 = hardest
        d = int(rng.integers(3, 11))
        classes = int(rng.choice([2, 2, 2, 3, 4]))
        k = int(rng.integers(1, d + 1))
        weights = None
        if rng.random() < 0.3:
            minority = float(rng.uniform(0.1, 0.4))
            weights = tuple([minority] + [1.0] * (classes - 1))
        specs.append(SyntheticSpec(
            n=n,
            d=d,
            classes=classes,
            separation=round(0.2 + 5.8 * (1.0 - g) ** 1.5, 4),
            label_noise=round(float(rng.uniform(0.0, 0.2)) * g, 4),
            n_informative=k,
            class_weights=weights,
            name=f"{family}_{i // len(FAMILIES) + 1:02d}",
        ))
    return specs


def synthetic_corpus(n_datasets: int = 40, seed: int = 0, split_seed: int = 0) -> list[CorpusEntry]:
    entries = []
    for i, spec in enumerate(synthetic_specs(n_datasets, seed)):
        ds = generate_synthetic(spec, seed=derive_seed(seed, i))
        entries.append(CorpusEntry(spec.name, subsample_and_split(ds, seed=derive_seed(split_seed, i)),
                                   meta={"separation": spec.separation, "label_noise": spec.label_noise,
                                         "classes": spec.classes, "d": spec.d}))
    return entries


def split_corpus(datasets: Sequence[TabularDataset], split_seed: int = 0) -> list[CorpusEntry]:
    return [CorpusEntry(ds.name, subsample_and_split(ds, seed=derive_seed(split_seed, i)))
            for i, ds in enumerate(datasets)]


def _cache_path(cache_dir: Path, name: str) -> Path:
    return cache_dir / f"{name}.groundtruth.json"


class StaleCacheError(ValueError):
    pass


def read_cached_record(cache_dir, name: str) -> dict | None:
    """Raw cache record regardless of settings; None when absent or unreadable."""
    path = _cache_path(Path(cache_dir), name)
    if not path.is_file():
        return None
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
        GroundTruth.from_dict(record["ground_truth"])
        if record["version"] != CACHE_VERSION or not isinstance(record["config"], dict):
            return None
        return record
    except (ValueError, KeyError, TypeError):
        return None


def load_cached(cache_dir, name: str, config: GroundTruthConfig,
                on_stale: str = "recompute") -> GroundTruth | None:
    """Cached record for ``name`` or None when absent, stale or unreadable.

    A readable record computed with other settings raises StaleCacheError
    when ``on_stale == "error"``; corrupted records always come back as None.
    """
    path = _cache_path(Path(cache_dir), name)
    if not path.is_file():
        return None
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
        gt = GroundTruth.from_dict(record["ground_truth"])
        stale = record["version"] != CACHE_VERSION or record["config"] != config.to_dict()
    except (ValueError, KeyError, TypeError) as exc:
        log.warning("corrupted ground-truth cache for %s (%s); recomputing", name, exc)
        return None
    if stale:
        if on_stale == "error":
            raise StaleCacheError(
                f"cached ground truth for {name} used other settings; rerun with --force to replace it")
        log.warning("ground truth for %s was computed with other settings; recomputing", name)
        return None
    return gt


def store_cached(cache_dir, name: str, config: GroundTruthConfig, gt: GroundTruth) -> Path:
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    record = {"version": CACHE_VERSION, "name": name, "config": config.to_dict(),
              "ground_truth": gt.to_dict()}
    path = _cache_path(cache_dir, name)
    path.write_text(json.dumps(record, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return path


def _compute(split: DatasetSplit, config: GroundTruthConfig) -> GroundTruth:
    grid = config.grid if config.grid is not None else default_needed_grid(split.train.n)
    return compute_ground_truth(split, grid, config.repetitions, config.threshold,
                                config.params(), config.seed)


def attach_ground_truth(entries: Sequence[CorpusEntry], config: GroundTruthConfig = GroundTruthConfig(),
                        cache_dir=None, force: bool = False, jobs: int = 1,
                        on_stale: str = "recompute") -> tuple[list[CorpusEntry], int]:
    """Fill in ground truth, reusing the cache. Returns entries and recompute count."""
    cached: dict[int, GroundTruth] = {}
    todo = []
    for i, e in enumerate(entries):
        gt = None if (force or cache_dir is None) else load_cached(cache_dir, e.name, config, on_stale)
        if gt is None:
            todo.append(i)
        else:
            cached[i] = gt

    if todo:
        results = _parallel_map(_compute, [(entries[i].split, config) for i in todo], jobs)
        for i, gt in zip(todo, results):
            cached[i] = gt
            if cache_dir is not None:
                store_cached(cache_dir, entries[i].name, config, gt)

    out = [CorpusEntry(e.name, e.split, cached[i], e.meta) for i, e in enumerate(entries)]
    return out, len(todo)


def _parallel_map(fn, arg_tuples, jobs: int):
    if jobs <= 1 or len(arg_tuples) <= 1:
        return [fn(*args) for args in arg_tuples]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=jobs)(delayed(fn)(*args) for args in arg_tuples)
