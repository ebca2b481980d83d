from .forest import (
    ForestModel,
    ForestParams,
    Tree,
    fit_forest_classifier,
    fit_forest_regressor,
    fit_predict,
    predict,
    train_forest,
    vote_counts,
)
from .linear import LinearModel, LogisticModel, fit_linear_regression, fit_logistic_regression
from .metrics import MetricVector, f1_macro, metric_vector, metric_vector_array, r2_defined, r2_score

__all__ = [
    "ForestModel",
    "ForestParams",
    "LinearModel",
    "LogisticModel",
    "MetricVector",
    "Tree",
    "f1_macro",
    "fit_forest_classifier",
    "fit_forest_regressor",
    "fit_linear_regression",
    "fit_logistic_regression",
    "fit_predict",
    "metric_vector",
    "metric_vector_array",
    "predict",
    "r2_defined",
    "r2_score",
    "train_forest",
    "vote_counts",
]
