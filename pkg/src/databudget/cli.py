"""Command-line entry point: ``databudget <command> [options]``.

Outputs land under ``--out`` (default ``databudget-out``)::

    datasets/      canonical CSV + schema sidecars (ingest, synth)
    groundtruth/   cached O_D / Need_D records (groundtruth)
    curves/        pilot curves and plots (curve)
    models/        serialized budget models (budget train)
    benchmark/     report.json, rows.csv and figures (benchmark)

Option values resolve as: command-line flag, then the JSON ``--config`` file
(top level for global keys, a per-command section for the rest), then the
built-in default. Failures exit nonzero after printing a one-line JSON error
record on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, plots, powerlaw
from .budgeter import (
    PAPER_BINS,
    BudgetError,
    BudgetModel,
    BudgetReport,
    assign_bin,
    percent_grid,
    predict_budget,
    train_budget_model,
)
from .curves import (
    CurveConfig,
    CurveError,
    LearningCurve,
    default_pilot_grid,
    derive_seed,
    pilot_curve,
    save_curve,
)
from .evalharness import (
    BenchmarkConfig,
    BenchmarkError,
    CorpusEntry,
    GroundTruthConfig,
    attach_ground_truth,
    build_pilots,
    cluster_datasets,
    corpus_split_comparison,
    needed_targets,
    one_point_profile,
    pilot_features,
    read_cached_record,
    report_balance,
    report_coefficients,
    run_benchmark,
    scheme_for,
    synthetic_specs,
)
from .evalharness.corpus import StaleCacheError
from .learners import ForestParams
from .powerlaw import PowerLawError
from .tabular import (
    DatasetError,
    PilotStudy,
    binarize_regression,
    draw_pilot,
    generate_synthetic,
    load_csv,
    load_dataset,
    save_dataset,
    subsample_and_split,
    validate_eligibility,
)

log = logging.getLogger("databudget")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2

DEFAULTS: dict[str, dict] = {
    "global": {"seed": 0, "jobs": 1, "out": "databudget-out"},
    "ingest": {"label": None, "binarize": False},
    "synth": {"n_datasets": 40, "rows": 3000},
    "curve": {"m": 100, "reps": 500, "trees": 100, "compare_reps": None},
    "groundtruth": {"reps": 20, "trees": 100, "grid_step": None, "threshold": 0.99, "force": False},
    "budget_train": {"kind": "LR", "mode": "fixed", "m": 100, "reps": 500, "trees": 100,
                     "grid_points": None, "bins": "quantile"},
    "budget_predict": {"model": [], "method": "powerlaw", "reps": 500, "trees": 100,
                       "label": None},
    "benchmark": {"m": 100, "varying": False, "reps": 40, "methods": "powerlaw,learning-LR,learning-RF",
                  "curve_reps": 500, "curve_trees": 100, "grid_points": None, "bins": "quantile",
                  "clusters": None, "split_reps": 100, "plots": True},
}


@dataclass
class RunConfig:
    """Effective settings of one invocation, after merging flags, file and defaults."""

    command: str
    seed: int
    jobs: int
    out: Path
    inputs: list[str] = field(default_factory=list)
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        # jobs is left out on purpose: it never changes results
        return {"command": self.command, "seed": self.seed, "out": str(self.out),
                "inputs": list(self.inputs), "options": dict(sorted(self.options.items()))}

    def subdir(self, name: str) -> Path:
        path = self.out / name
        path.mkdir(parents=True, exist_ok=True)
        return path


class Reporter:
    """The single console channel; worker processes never print."""

    def __init__(self, stream=None):
        self.stream = stream or sys.stdout

    def line(self, text: str = "") -> None:
        print(text, file=self.stream, flush=True)

    def table(self, header: list[str], rows: list[list]) -> None:
        cells = [header] + [[str(c) for c in r] for r in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        for r in cells:
            self.line("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())


def _write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _csv_list(value) -> list[str]:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [v.strip() for v in str(value).split(",") if v.strip()]


def name_seed(seed: int, name: str) -> int:
    """Per-dataset split seed keyed by name, so adding datasets moves nothing."""
    return derive_seed(seed, zlib.crc32(name.encode("utf-8")))


def stored_names(directory: Path) -> list[str]:
    return sorted(p.name[: -len(".schema.json")] for p in directory.glob("*.schema.json"))


def _datasets_dir(cfg: RunConfig, explicit) -> Path:
    return Path(explicit) if explicit else cfg.out / "datasets"


def _load_corpus(directory: Path, names: list[str], split_seed: int) -> list[CorpusEntry]:
    entries = []
    for name in names:
        ds = load_dataset(directory, name)
        entries.append(CorpusEntry(name, subsample_and_split(ds, seed=name_seed(split_seed, name))))
    return entries


# ---------------------------------------------------------------- commands

def cmd_ingest(cfg: RunConfig, out: Reporter) -> int:
    labels = _csv_list(cfg.options["label"])
    if not labels:
        raise DatasetError("ingest needs --label (one column name, or one per file)")
    if len(labels) not in (1, len(cfg.inputs)):
        raise DatasetError(f"got {len(labels)} label columns for {len(cfg.inputs)} files")
    store = cfg.subdir("datasets")
    rows, stored = [], 0
    for i, path in enumerate(cfg.inputs):
        label = labels[0] if len(labels) == 1 else labels[i]
        try:
            ds = load_csv(path, label, regression=cfg.options["binarize"])
            if cfg.options["binarize"]:
                ds = binarize_regression(ds)
        except DatasetError as exc:
            rows.append({"file": path, "status": "rejected", "reason": str(exc)})
            continue
        save_dataset(ds, store)
        stored += 1
        check = validate_eligibility(ds)
        rows.append({"file": path, "status": "stored", "name": ds.name, "rows": ds.n, "features": ds.d,
                     "classes": ds.n_classes, "task": ds.task, "eligible": check.passed,
                     "reason": "; ".join(check.reasons)})
    out.table(["file", "status", "name", "rows", "features", "classes", "eligible", "reason"],
              [[r["file"], r["status"], r.get("name", "-"), r.get("rows", "-"), r.get("features", "-"),
                r.get("classes", "-"), r.get("eligible", "-"), r.get("reason", "")] for r in rows])
    _write_json(store / "ingest_report.json", {"config": cfg.to_dict(), "files": rows})
    return EXIT_OK if stored else EXIT_INPUT


def cmd_synth(cfg: RunConfig, out: Reporter) -> int:
    store = cfg.subdir("datasets")
    specs = synthetic_specs(int(cfg.options["n_datasets"]), cfg.seed, int(cfg.options["rows"]))
    manifest = []
    for i, spec in enumerate(specs):
        ds = generate_synthetic(spec, seed=derive_seed(cfg.seed, i))
        save_dataset(ds, store)
        manifest.append({"name": spec.name, "d": spec.d, "classes": spec.classes,
                         "separation": spec.separation, "label_noise": spec.label_noise})
    _write_json(store / "synth_manifest.json", {"config": cfg.to_dict(), "datasets": manifest})
    out.line(f"wrote {len(specs)} synthetic datasets to {store}")
    return EXIT_OK


def cmd_curve(cfg: RunConfig, out: Reporter) -> int:
    o = cfg.options
    directory = _datasets_dir(cfg, o.get("data"))
    if not cfg.inputs:
        raise DatasetError("curve needs a dataset name")
    name = cfg.inputs[0]
    ds = load_dataset(directory, name)
    split = subsample_and_split(ds, seed=name_seed(cfg.seed, name))
    m = int(o["m"])
    pilot = draw_pilot(split, m, seed=derive_seed(cfg.seed, 1))
    params = ForestParams(n_trees=int(o["trees"]))
    folder = cfg.subdir("curves")
    compare = [int(r) for r in _csv_list(o["compare_reps"])]
    curves = {}
    for reps in compare or [int(o["reps"])]:
        curve = pilot_curve(pilot, CurveConfig(repetitions=reps, seed=derive_seed(cfg.seed, 2)), params)
        stem = f"{name}_m{m}_R{reps}"
        save_curve(curve, folder / f"{stem}.csv")
        curves[f"R={reps}"] = curve
        out.line(f"{stem}: {len(curve.grid)} points, s_{int(curve.grid[-1])} = {curve.s[-1]:.4f}")
    stem = f"{name}_m{m}" + ("_compare" if compare else f"_R{int(o['reps'])}")
    plots.plot_curves(curves, folder / f"{stem}.svg", title=f"{name}, pilot m={m}")
    _write_json(folder / f"{stem}.json", {"config": cfg.to_dict(), "generator": plots.GENERATOR})
    return EXIT_OK


def _gt_config(cfg: RunConfig, n_train: int) -> GroundTruthConfig:
    o = cfg.options
    step = o["grid_step"]
    grid = None if step is None else tuple(sorted(set(range(int(step), n_train, int(step))) | {n_train}))
    return GroundTruthConfig(repetitions=int(o["reps"]), n_trees=int(o["trees"]), grid=grid,
                             threshold=float(o["threshold"]), seed=cfg.seed)


def cmd_groundtruth(cfg: RunConfig, out: Reporter) -> int:
    directory = _datasets_dir(cfg, cfg.options.get("data"))
    names = cfg.inputs or stored_names(directory)
    if not names:
        raise DatasetError(f"no stored datasets in {directory}")
    cache = cfg.subdir("groundtruth")
    rows, ok_entries, failures = [], [], []
    for name in names:
        try:
            ok_entries.extend(_load_corpus(directory, [name], cfg.seed))
        except DatasetError as exc:
            failures.append({"name": name, "error": str(exc)})
    if ok_entries:
        config = _gt_config(cfg, ok_entries[0].split.train.n)
        entries, recomputed = attach_ground_truth(
            ok_entries, config, cache_dir=cache, force=bool(cfg.options["force"]), jobs=cfg.jobs,
            on_stale="error")
        for e in entries:
            gt = e.ground_truth
            rows.append([e.name, f"{gt.final_performance:.4f}", gt.needed_amount,
                         "yes" if gt.needs_all_data else "no"])
        out.table(["dataset", "final", "needed", "all data"], rows)
        out.line(f"{recomputed} computed, {len(entries) - recomputed} from cache")
    for f in failures:
        out.line(f"failed: {f['name']}: {f['error']}")
    return EXIT_OK if not failures else EXIT_INPUT


def _load_ground_truth_corpus(cfg: RunConfig, directory: Path) -> list[CorpusEntry]:
    """Stored datasets joined with their cached ground truth, split as when it was computed."""
    from .curves import GroundTruth

    cache = cfg.out / "groundtruth"
    names = cfg.inputs or stored_names(directory)
    entries, missing = [], []
    for name in names:
        record = read_cached_record(cache, name)
        if record is None:
            missing.append(name)
            continue
        split_seed = int(record["config"].get("seed", 0))
        (entry,) = _load_corpus(directory, [name], split_seed)
        entries.append(CorpusEntry(name, entry.split, GroundTruth.from_dict(record["ground_truth"])))
    if missing:
        raise DatasetError(f"no cached ground truth for {', '.join(missing)}; run 'groundtruth' first")
    if not entries:
        raise DatasetError(f"no datasets found in {directory}")
    return entries


def _train_config(cfg: RunConfig) -> BenchmarkConfig:
    o = cfg.options
    return BenchmarkConfig(
        pilot_size="varying" if o["mode"] == "percent" else int(o["m"]),
        curve_repetitions=int(o["reps"]), curve_trees=int(o["trees"]),
        grid_points=None if o["grid_points"] is None else int(o["grid_points"]),
        bins=o["bins"], seed=cfg.seed)


def cmd_budget_train(cfg: RunConfig, out: Reporter) -> int:
    o = cfg.options
    if o["mode"] not in ("fixed", "percent"):
        raise BudgetError("--mode must be 'fixed' or 'percent'")
    directory = _datasets_dir(cfg, o.get("data"))
    corpus = _load_ground_truth_corpus(cfg, directory)
    bcfg = _train_config(cfg)
    if len(corpus) < 2:
        raise BudgetError("budget training needs at least two datasets")
    # clusters only label the pilots here; no split is made
    index = cluster_datasets([e.name for e in corpus], 2)
    pilots = build_pilots(corpus, index, bcfg, cfg.jobs)
    features = pilot_features(pilots, bcfg.varying)
    gts = [e.ground_truth for e in corpus]
    labels = needed_targets(gts, features, bcfg.varying)
    scheme = scheme_for(labels, labels, bcfg)
    model = train_budget_model(list(zip(features, gts)), o["kind"], scheme, seed=cfg.seed,
                               min_corpus=2)
    path = cfg.subdir("models") / f"budget-{o['kind']}-{o['mode']}.json"
    model.save(path)
    out.line(f"trained {model.method} ({o['mode']}) on {len(corpus)} datasets -> {path}")
    out.line(f"fingerprint {model.fingerprint()}; bins {scheme.to_dict()['uppers']}")
    return EXIT_OK


def _powerlaw_report(curve: LearningCurve, scheme) -> BudgetReport:
    fit = powerlaw.fit_power_law(curve)
    needed = powerlaw.extrapolate_needed(fit)
    value = needed / curve.m if scheme.mode == "ratio" else needed
    k = assign_bin(value, scheme)
    return BudgetReport(
        predicted_final=powerlaw.extrapolate_final(fit), predicted_bin=k,
        bin_interval=scheme.interval(k), method="powerlaw",
        inputs={"m": curve.m, "b": fit.b, "c": fit.c, "needed_amount": needed},
        predicted_ratio_bin=scheme.mode == "ratio")


def cmd_budget_predict(cfg: RunConfig, out: Reporter) -> int:
    o = cfg.options
    if not cfg.inputs:
        raise DatasetError("budget predict needs a pilot CSV")
    if not o["label"]:
        raise DatasetError("budget predict needs --label")
    data = load_csv(cfg.inputs[0], o["label"])
    m = data.n
    pilot = PilotStudy(data, m, cfg.seed)
    methods = _csv_list(o["method"])
    models: dict[str, BudgetModel] = {}
    for path in _csv_list(o["model"]):
        model = BudgetModel.load(path)
        models[model.method] = model
    missing = [meth for meth in methods if meth != "powerlaw" and meth not in models]
    if missing:
        raise BudgetError(f"no model file given for {', '.join(missing)}")

    grid: set[int] = set()
    for meth in methods:
        if meth == "powerlaw":
            grid |= set(default_pilot_grid(m)) if m >= 20 else set()
            continue
        model = models[meth]
        if model.mode == "fixed":
            top = max(model.positions)
            if top > m - 10:
                raise BudgetError(
                    f"{meth} model uses curve position x={top}, which needs a pilot of at least "
                    f"{top + 10} rows; this pilot has {m}")
            grid |= set(model.positions)
        else:
            grid |= set(percent_grid(m))
    if not grid:
        raise CurveError(f"a pilot of {m} rows is too small for a learning curve")
    curve = pilot_curve(pilot, CurveConfig(repetitions=int(o["reps"]), grid=tuple(sorted(grid)),
                                           seed=derive_seed(cfg.seed, 2)),
                        ForestParams(n_trees=int(o["trees"])))

    reports = []
    for meth in methods:
        if meth == "powerlaw":
            fixed = [mm for mm in models.values() if mm.mode == "fixed"]
            scheme = fixed[0].scheme if fixed else PAPER_BINS
            reports.append(_powerlaw_report(curve, scheme))
        else:
            reports.append(predict_budget(models[meth], curve))
    for r in reports:
        out.line(r.summary())
    folder = cfg.subdir("predictions")
    stem = Path(cfg.inputs[0]).stem
    _write_json(folder / f"{stem}.budget.json",
                {"config": cfg.to_dict(), "reports": [r.to_dict() for r in reports]})
    save_curve(curve, folder / f"{stem}.curve.csv")
    return EXIT_OK


def cmd_benchmark(cfg: RunConfig, out: Reporter) -> int:
    o = cfg.options
    directory = _datasets_dir(cfg, o.get("data"))
    corpus = _load_ground_truth_corpus(cfg, directory)
    methods = tuple(_csv_list(o["methods"]))
    bcfg = BenchmarkConfig(
        methods=methods,
        pilot_size="varying" if o["varying"] else int(o["m"]),
        repetitions=int(o["reps"]),
        clusters=None if o["clusters"] is None else int(o["clusters"]),
        curve_repetitions=int(o["curve_reps"]), curve_trees=int(o["curve_trees"]),
        grid_points=None if o["grid_points"] is None else int(o["grid_points"]),
        bins=o["bins"], seed=cfg.seed)
    report = run_benchmark(corpus, bcfg, jobs=cfg.jobs)
    folder = cfg.subdir("benchmark")
    payload = report.to_dict()
    payload["run"] = cfg.to_dict()
    _write_json(folder / "report.json", payload)
    (folder / "rows.csv").write_text(report.rows_csv(), encoding="utf-8")

    out.table(["method", "R2", "Acc0", "Acc1", "undefined R2 reps"],
              [[name, "n/a" if s.r2 is None else f"{s.r2:.4f}", f"{s.acc0:.4f}", f"{s.acc1:.4f}",
                s.r2_undefined_reps] for name, s in report.methods.items()])

    if o["plots"]:
        learning = [m for m in methods if m != "powerlaw"]
        plots.plot_one_point(one_point_profile(report), folder / "one_point_r2.svg")
        if "learning-LR" in learning:
            positions, weights = report_coefficients(report)
            plots.plot_coefficients(positions, weights, folder / "coefficients.svg")
        bal = report_balance(report, learning[0] if learning else "powerlaw")
        plots.plot_balance(bal.minority_ratio, bal.abs_error, folder / "balance.svg",
                           bal.slope, bal.intercept)
        m_cmp = 100 if bcfg.varying else int(bcfg.pilot_size)
        comparisons = corpus_split_comparison(corpus, m=m_cmp, repetitions=int(o["split_reps"]),
                                              n_trees=bcfg.curve_trees, seed=cfg.seed)
        plots.plot_split_comparison(comparisons, folder / "split_comparison.svg")
        _write_json(folder / "figures.json", {
            "generator": plots.GENERATOR,
            "balance": {"slope": bal.slope, "intercept": bal.intercept},
            "split_comparison_mean_error": {
                k: float(np.mean([c.error_rates[k] for c in comparisons]))
                for k in ("single_split", "five_fold", "multiple_split", "full_test")},
        })
    out.line(f"report written to {folder}")
    return EXIT_OK


# ---------------------------------------------------------------- parsing

def _common_options(default) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default, help="master seed (default 0)")
    common.add_argument("--config", type=Path, default=default, help="JSON config file")
    common.add_argument("--out", type=Path, default=default, help="output directory")
    common.add_argument("--jobs", type=int, default=default, help="parallel worker processes")
    return common


def build_parser() -> argparse.ArgumentParser:
    # subcommands suppress their defaults so a flag given before the command survives
    common = _common_options(argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="databudget", parents=[_common_options(None)],
                                     description="Data budgeting from pilot learning curves.")
    parser.add_argument("--version", action="version", version=f"databudget {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="validate and store CSV datasets")
    p.add_argument("inputs", nargs="+", metavar="CSV")
    p.add_argument("--label", default=None, help="label column, or comma list (one per file)")
    p.add_argument("--binarize", action="store_true", default=None,
                   help="treat labels as numeric and split them at the median")

    p = sub.add_parser("synth", parents=[common], help="generate the synthetic corpus")
    p.add_argument("--n-datasets", dest="n_datasets", type=int, default=None)
    p.add_argument("--rows", type=int, default=None)

    p = sub.add_parser("curve", parents=[common], help="pilot learning curve of a stored dataset")
    p.add_argument("inputs", nargs=1, metavar="DATASET")
    p.add_argument("--data", default=None, help="dataset directory (default OUT/datasets)")
    p.add_argument("-m", "--m", type=int, default=None, help="pilot size")
    p.add_argument("--reps", type=int, default=None, help="splitting repetitions R")
    p.add_argument("--trees", type=int, default=None)
    p.add_argument("--compare-reps", dest="compare_reps", default=None,
                   help="comma list of R values to overlay")

    p = sub.add_parser("groundtruth", parents=[common], help="compute and cache ground truth")
    p.add_argument("inputs", nargs="*", metavar="DATASET")
    p.add_argument("--data", default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--trees", type=int, default=None)
    p.add_argument("--grid-step", dest="grid_step", type=int, default=None,
                   help="evenly spaced needed-amount grid instead of the default one")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--force", action="store_true", default=None, help="recompute cached records")

    p = sub.add_parser("budget", help="train or apply budget models")
    bsub = p.add_subparsers(dest="action", required=True)
    t = bsub.add_parser("train", parents=[common])
    t.add_argument("inputs", nargs="*", metavar="DATASET")
    t.add_argument("--data", default=None)
    t.add_argument("--kind", choices=["LR", "RF"], default=None)
    t.add_argument("--mode", choices=["fixed", "percent"], default=None)
    t.add_argument("-m", "--m", type=int, default=None)
    t.add_argument("--reps", type=int, default=None)
    t.add_argument("--trees", type=int, default=None)
    t.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    t.add_argument("--bins", choices=["quantile", "paper"], default=None)
    q = bsub.add_parser("predict", parents=[common])
    q.add_argument("inputs", nargs=1, metavar="PILOT_CSV")
    q.add_argument("--label", default=None)
    q.add_argument("--model", action="append", default=None, help="model file (repeatable)")
    q.add_argument("--method", default=None, help="comma list, e.g. powerlaw,learning-RF")
    q.add_argument("--reps", type=int, default=None)
    q.add_argument("--trees", type=int, default=None)

    p = sub.add_parser("benchmark", parents=[common], help="cluster-bootstrap evaluation")
    p.add_argument("inputs", nargs="*", metavar="DATASET")
    p.add_argument("--data", default=None)
    p.add_argument("-m", "--m", type=int, default=None)
    p.add_argument("--varying", action="store_true", default=None)
    p.add_argument("--reps", type=int, default=None, help="bootstrap repetitions")
    p.add_argument("--methods", default=None)
    p.add_argument("--curve-reps", dest="curve_reps", type=int, default=None)
    p.add_argument("--curve-trees", dest="curve_trees", type=int, default=None)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    p.add_argument("--bins", choices=["quantile", "paper"], default=None)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--split-reps", dest="split_reps", type=int, default=None)
    p.add_argument("--no-plots", dest="plots", action="store_false", default=None)
    return parser


COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "curve": cmd_curve,
    "groundtruth": cmd_groundtruth,
    "budget_train": cmd_budget_train,
    "budget_predict": cmd_budget_predict,
    "benchmark": cmd_benchmark,
}


def resolve(args: argparse.Namespace) -> RunConfig:
    command = args.command + (f"_{args.action}" if args.command == "budget" else "")
    file_cfg: dict = {}
    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise DatasetError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise DatasetError("config file must hold a JSON object")
    section = file_cfg.get(command, {})

    def pick(key, scope):
        value = getattr(args, key, None)
        if value is not None:
            return value
        if key in section:
            return section[key]
        if key in file_cfg and not isinstance(file_cfg[key], dict):
            return file_cfg[key]
        return DEFAULTS[scope].get(key)

    options = {key: pick(key, command) for key in DEFAULTS[command]}
    if getattr(args, "data", None) is not None or "data" in section:
        options["data"] = pick("data", command)
    return RunConfig(
        command=command,
        seed=int(pick("seed", "global")),
        jobs=int(pick("jobs", "global")),
        out=Path(pick("out", "global")),
        inputs=list(getattr(args, "inputs", None) or section.get("inputs", [])),
        options=options,
    )


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    command = args.command
    try:
        cfg = resolve(args)
        command = cfg.command
        return COMMANDS[cfg.command](cfg, Reporter())
    except (DatasetError, CurveError, BudgetError, BenchmarkError, PowerLawError, StaleCacheError,
            FileNotFoundError) as exc:
        code = EXIT_INPUT
        err = exc
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        code = EXIT_FAILURE
        err = exc
    record = {"status": "error", "command": command, "error": type(err).__name__, "message": str(err)}
    print(json.dumps(record, sort_keys=True), file=sys.stderr, flush=True)
    return code


if __name__ == "__main__":
    sys.exit(main())
