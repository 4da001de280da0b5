import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from houseprice.dataset.utils import format_number
from houseprice.errors import DatasetError, LoadError, SchemaError
from houseprice.types.types import CorrMatrix, Dataset, StatsTable, YearBucket

logger = logging.getLogger(__name__)

"""
Attributes of the averages table, in display order, with their row labels.
"baths" is baths_full + 0.5 * baths_half.
"""
STATS_ATTRIBUTES: dict[str, str] = {
    "year_built": "Year Built",
    "price": "Price",
    "car_spaces": "Car Spaces",
    "beds": "Beds",
    "baths": "Baths",
    "sqft": "Sqft",
    "baths_full": "Full Baths",
    "baths_half": "Half Baths",
    "carpet_rooms": "Carpet Rooms",
    "hardwood_rooms": "Hardwood Rooms",
    "total_rooms": "Total Number of Rooms",
    "basement_sqft": "Basement Sqft",
    "tax_annual": "Tax Annual Amount",
}


def _attribute_column(dataset: Dataset, attribute: str) -> np.ndarray:
    if attribute == "baths":
        return dataset.column("baths_full") + 0.5 * dataset.column("baths_half")
    return dataset.column(attribute)


def summary_stats(buckets: dict[YearBucket, Dataset]) -> StatsTable:
    """Arithmetic mean of every averages-table attribute, per year bucket."""
    ordered = [bucket for bucket in YearBucket if bucket in buckets]
    means: dict[YearBucket, dict[str, float]] = {}
    counts: dict[YearBucket, int] = {}
    for bucket in ordered:
        dataset = buckets[bucket]
        if dataset.n_rows == 0:
            raise DatasetError(f"bucket {bucket.value} is empty")
        means[bucket] = {
            attribute: float(np.mean(_attribute_column(dataset, attribute)))
            for attribute in STATS_ATTRIBUTES
        }
        counts[bucket] = dataset.n_rows
        logger.info(f"Bucket {bucket.value}: {dataset.n_rows} row(s), mean price {means[bucket]['price']:.2f}")
    return StatsTable(attributes=list(STATS_ATTRIBUTES), buckets=ordered, means=means, row_counts=counts)


def price_trend(stats: StatsTable) -> list[tuple[YearBucket, YearBucket, float]]:
    """Relative change of mean price between consecutive buckets."""
    trend = []
    for before, after in zip(stats.buckets, stats.buckets[1:]):
        old, new = stats.mean(before, "price"), stats.mean(after, "price")
        trend.append((before, after, (new - old) / old if old else 0.0))
    return trend


def correlation_matrix(dataset: Dataset) -> CorrMatrix:
    """Pearson correlations over every feature column plus price.

    Zero-variance columns correlate 0 with everything else, keep a unit
    diagonal, and are listed in ``zero_variance``.

    Raises:
        DatasetError: fewer than two rows.
    """
    if dataset.n_rows < 2:
        raise DatasetError("correlation needs at least 2 rows")

    names = list(dataset.feature_names) + ["price"]
    values = np.column_stack([dataset.rows, dataset.target])
    centered = values - values.mean(axis=0)
    std = np.sqrt(np.mean(centered**2, axis=0))
    scale = np.maximum(1.0, np.abs(values.mean(axis=0)))
    flat = std <= 1e-12 * scale

    z = np.zeros_like(centered)
    z[:, ~flat] = centered[:, ~flat] / std[~flat]
    corr = z.T @ z / dataset.n_rows
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)

    zero_variance = [name for name, is_flat in zip(names, flat) if is_flat]
    if zero_variance:
        logger.warning(f"Zero-variance column(s) reported as uncorrelated: {zero_variance}")
    return CorrMatrix(names=names, values=corr, zero_variance=zero_variance)


def _write(frame: pd.DataFrame, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise LoadError(f"cannot write {path}: {str(e)}")
    return path


def write_stats_csv(stats: StatsTable, path: Union[str, Path]) -> Path:
    header = ["attribute"] + [bucket.value for bucket in stats.buckets]
    body = [
        [STATS_ATTRIBUTES.get(attribute, attribute)]
        + [format_number(round(stats.mean(bucket, attribute), 6)) for bucket in stats.buckets]
        for attribute in stats.attributes
    ]
    body.append(["Listings"] + [str(stats.row_counts[bucket]) for bucket in stats.buckets])
    logger.info(f"Writing averages table to {path}")
    return _write(pd.DataFrame(body, columns=header, dtype=str), Path(path))


def write_corr_csv(corr: CorrMatrix, path: Union[str, Path]) -> Path:
    header = ["feature"] + corr.names
    body = [
        [name] + [format_number(round(float(v), 12)) for v in corr.values[i]]
        for i, name in enumerate(corr.names)
    ]
    logger.info(f"Writing correlation matrix to {path}")
    return _write(pd.DataFrame(body, columns=header, dtype=str), Path(path))


def _read(path: Path, kind: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.EmptyDataError) as e:
        raise LoadError(f"cannot read {kind} {path}: {str(e)}")


def read_corr_csv(path: Union[str, Path]) -> CorrMatrix:
    """Load a matrix written by ``write_corr_csv``.

    Raises:
        SchemaError: the "feature" column is missing or the matrix is not square.
    """
    path = Path(path)
    frame = _read(path, "correlation matrix")
    if "feature" not in frame.columns:
        raise SchemaError(f"correlation file {path} is missing column 'feature'")
    names = list(frame["feature"])
    for name in names:
        if name not in frame.columns:
            raise SchemaError(f"correlation file {path} is missing column '{name}'")
    try:
        values = frame[names].astype(float).to_numpy()
    except ValueError as e:
        raise SchemaError(f"correlation file {path} has a non-numeric cell: {str(e)}")
    return CorrMatrix(names=names, values=values)


def read_stats_csv(path: Union[str, Path]) -> StatsTable:
    """Load an averages table written by ``write_stats_csv``."""
    path = Path(path)
    frame = _read(path, "averages table")
    if "attribute" not in frame.columns:
        raise SchemaError(f"averages file {path} is missing column 'attribute'")
    try:
        buckets = [YearBucket(column) for column in frame.columns if column != "attribute"]
    except ValueError as e:
        raise SchemaError(f"averages file {path} has an unknown bucket column: {str(e)}")
    keys = {label: key for key, label in STATS_ATTRIBUTES.items()}
    means: dict[YearBucket, dict[str, float]] = {bucket: {} for bucket in buckets}
    counts: dict[YearBucket, int] = {}
    attributes = []
    try:
        for record in frame.to_dict(orient="records"):
            label = record["attribute"]
            if label == "Listings":
                counts = {bucket: int(record[bucket.value]) for bucket in buckets}
                continue
            attribute = keys.get(label, label)
            attributes.append(attribute)
            for bucket in buckets:
                means[bucket][attribute] = float(record[bucket.value])
    except ValueError as e:
        raise SchemaError(f"averages file {path} has a non-numeric cell: {str(e)}")
    return StatsTable(attributes=attributes, buckets=buckets, means=means, row_counts=counts)
