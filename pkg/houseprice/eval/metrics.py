from typing import Any, Optional

import numpy as np

from houseprice.types.types import EvaluationPair, MetricSet


def mae(pair: EvaluationPair) -> float:
    return float(np.mean(np.abs(pair.predicted - pair.actual)))


def rmse(pair: EvaluationPair) -> float:
    return float(np.sqrt(np.mean((pair.actual - pair.predicted) ** 2)))


def r_squared(pair: EvaluationPair) -> Optional[float]:
    """Coefficient of determination, or None when the actuals are constant."""
    total = float(np.sum((pair.actual - pair.actual_mean) ** 2))
    if pair.n < 2 or total == 0.0:
        return None
    residual = float(np.sum((pair.actual - pair.predicted) ** 2))
    return 1.0 - residual / total


def metric_set(predicted: Any, actual: Any) -> MetricSet:
    pair = EvaluationPair(predicted=predicted, actual=actual)
    return MetricSet(mae=mae(pair), rmse=rmse(pair), r2=r_squared(pair))
