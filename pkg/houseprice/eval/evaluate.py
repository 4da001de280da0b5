"""Results grid across model families and year buckets.

For every (family, bucket): split the bucket, tune on the training split by
k-fold cross-validation, refit the best candidate on the whole training
split, and score it on the held-out test split.
"""
import logging
from pathlib import Path
from typing import Any, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from houseprice.dataset.utils import format_number
from houseprice.errors import DatasetError, LoadError, SchemaError
from houseprice.eval.grid_search import default_grids, grid_search
from houseprice.eval.metrics import metric_set
from houseprice.eval.split import train_test_split
from houseprice.models.base_types import HyperParams, ModelFamily
from houseprice.models.factory import fit_model
from houseprice.models.interface import Regressor
from houseprice.types.types import Dataset, EvalCell, EvalReport, MetricSet, YearBucket

logger = logging.getLogger(__name__)

RESULTS_COLUMNS = ["model", "bucket", "RMSE", "MAE", "R-square", "cv_RMSE", "n_train", "n_test"]
UNDEFINED = "undefined"


class EvalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    families: list[ModelFamily] = Field(default_factory=lambda: list(ModelFamily))
    test_fraction: float = Field(default=0.2, gt=0, lt=1)
    folds: int = Field(default=5, ge=2)
    seed: int = 0
    n_jobs: int = 1
    grids: Optional[dict[ModelFamily, list[HyperParams]]] = None  # None: shipped grids.yaml

    def grid_for(self, family: ModelFamily) -> list[HyperParams]:
        grids = self.grids if self.grids is not None else default_grids()
        if family not in grids:
            raise DatasetError(f"no tuning grid configured for '{family.value}'")
        return grids[family]


class FittedCell(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: Regressor
    train: Dataset
    test: Dataset


class EvaluationRun(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    report: EvalReport
    fitted: dict[tuple[ModelFamily, YearBucket], FittedCell] = Field(default_factory=dict)


def run_evaluation(buckets: dict[YearBucket, Dataset], config: Optional[EvalConfig] = None) -> EvaluationRun:
    """Tune, refit and score every configured family on every bucket.

    Returns the report together with the refitted models and the splits
    they were scored on.

    Raises:
        DatasetError: an empty bucket or a bucket too small to split and fold.
        ParameterError: an invalid grid candidate.
    """
    config = config or EvalConfig()
    run = EvaluationRun(
        report=EvalReport(split_seed=config.seed, test_fraction=config.test_fraction, folds=config.folds)
    )
    for bucket in [b for b in YearBucket if b in buckets]:
        dataset = buckets[bucket]
        if dataset.n_rows == 0:
            raise DatasetError(f"bucket {bucket.value} is empty")
        train, test = train_test_split(dataset, config.test_fraction, config.seed)
        logger.info(f"Bucket {bucket.value}: {train.n_rows} train / {test.n_rows} test row(s)")

        for family in config.families:
            params, cv_rmse = grid_search(
                family, config.grid_for(family), train, seed=config.seed, folds=config.folds, n_jobs=config.n_jobs
            )
            model = fit_model(family, train, params, seed=config.seed)
            metrics = metric_set(model.predict_batch(test.rows), test.target)
            logger.info(
                f"{family.value:>6} {bucket.value:>7}: RMSE {metrics.rmse:.2f} MAE {metrics.mae:.2f} "
                f"R2 {metrics.r2 if metrics.r2 is not None else UNDEFINED}"
            )
            run.report.cells.append(
                EvalCell(
                    family=family.value,
                    bucket=bucket,
                    metrics=metrics,
                    params=model.params_dict(),
                    cv_rmse=cv_rmse,
                    n_train=train.n_rows,
                    n_test=test.n_rows,
                )
            )
            run.fitted[(family, bucket)] = FittedCell(model=model, train=train, test=test)
    return run


def evaluate_all(buckets: dict[YearBucket, Dataset], config: Optional[EvalConfig] = None) -> EvalReport:
    return run_evaluation(buckets, config).report


def _metric(value: Optional[float]) -> str:
    return UNDEFINED if value is None else format_number(round(value, 6))


def write_results_csv(report: EvalReport, path: Union[str, Path]) -> Path:
    """Results table: one row per (model, bucket) with RMSE, MAE and R-square."""
    path = Path(path)
    body = [
        [
            cell.family,
            cell.bucket.value,
            _metric(cell.metrics.rmse),
            _metric(cell.metrics.mae),
            _metric(cell.metrics.r2),
            _metric(cell.cv_rmse),
            str(cell.n_train),
            str(cell.n_test),
        ]
        for cell in report.cells
    ]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(body, columns=RESULTS_COLUMNS, dtype=str).to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise LoadError(f"cannot write {path}: {str(e)}")
    logger.info(f"Wrote {len(body)} result row(s) to {path}")
    return path


def read_results_csv(path: Union[str, Path]) -> list[dict[str, Any]]:
    """Rows of a results CSV as dicts; R-square is None where undefined.

    Raises:
        LoadError: unreadable file.
        SchemaError: a required column is missing or a metric is not numeric.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.EmptyDataError) as e:
        raise LoadError(f"cannot read results {path}: {str(e)}")
    for column in ("model", "bucket", "RMSE", "MAE", "R-square"):
        if column not in frame.columns:
            raise SchemaError(f"results file {path} is missing column '{column}'")
    rows = []
    for record in frame.to_dict(orient="records"):
        try:
            rows.append(
                {
                    "model": record["model"],
                    "bucket": record["bucket"],
                    "metrics": MetricSet(
                        rmse=float(record["RMSE"]),
                        mae=float(record["MAE"]),
                        r2=None if record["R-square"] == UNDEFINED else float(record["R-square"]),
                    ),
                }
            )
        except ValueError as e:
            raise SchemaError(f"results file {path} has a non-numeric metric: {str(e)}")
    return rows
