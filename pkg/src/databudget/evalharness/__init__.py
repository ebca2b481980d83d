from .analysis import (
    BalanceAnalysis,
    balance_analysis,
    corpus_split_comparison,
    one_point_profile,
    report_balance,
    report_coefficients,
)
from .benchmark import (
    METHODS,
    BenchmarkConfig,
    BenchmarkError,
    EvalReport,
    MethodScore,
    PilotRecord,
    SplitPlan,
    acc_metrics,
    bootstrap_split,
    build_pilots,
    fixed_grid,
    needed_targets,
    pilot_features,
    run_benchmark,
    scheme_for,
)
from .clustering import (
    NameClusterIndex,
    average_linkage,
    cluster_datasets,
    default_cluster_count,
    name_similarity,
    similarity_matrix,
)
from .corpus import (
    CorpusEntry,
    GroundTruthConfig,
    StaleCacheError,
    attach_ground_truth,
    load_cached,
    read_cached_record,
    split_corpus,
    store_cached,
    synthetic_corpus,
    synthetic_specs,
)
