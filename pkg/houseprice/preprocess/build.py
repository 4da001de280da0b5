import logging
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import pandas as pd

from houseprice.dataset.utils import format_number
from houseprice.errors import DatasetError, LoadError
from houseprice.preprocess.categorize import (
    categorize_basement,
    categorize_cooling,
    categorize_heating,
    categorize_property,
    combine_rooms,
)
from houseprice.types.types import (
    BasementCategory,
    CoolingCategory,
    Dataset,
    HeatingCategory,
    PropertyCategory,
    RawListing,
)

logger = logging.getLogger(__name__)

PRICE_CEILING = 2_500_000
SQFT_LIMIT = 10_000

IMPUTED_COLUMNS: tuple[str, ...] = (
    "sqft",
    "year_built",
    "car_spaces",
    "beds",
    "baths_full",
    "baths_half",
    "basement_sqft",
    "tax_annual",
)

NUMERIC_FEATURES: tuple[str, ...] = (
    "sqft",
    "year_built",
    "car_spaces",
    "beds",
    "baths_full",
    "baths_half",
    "total_rooms",
    "basement_sqft",
    "tax_annual",
)

PROPERTY_COLUMNS = {
    PropertyCategory.SINGLE_FAMILY: "prop_single_family",
    PropertyCategory.CONDO: "prop_condo",
    PropertyCategory.TOWNHOUSE: "prop_townhouse",
}
HEATING_COLUMNS = {
    HeatingCategory.NATURAL_GAS: "heat_natural_gas",
    HeatingCategory.BASEBOARD: "heat_baseboard",
    HeatingCategory.OTHER: "heat_other",
}
COOLING_COLUMNS = {
    CoolingCategory.CENTRAL_AIR: "cool_central_air",
    CoolingCategory.ZONED: "cool_zoned",
    CoolingCategory.OTHER: "cool_other",
}
BASEMENT_COLUMNS = {
    BasementCategory.NONE: "bsmt_none",
    BasementCategory.FULL: "bsmt_full",
    BasementCategory.PARTIAL: "bsmt_partial",
    BasementCategory.ENGLISH: "bsmt_english",
    BasementCategory.WALKOUT: "bsmt_walkout",
}

ONE_HOT_GROUPS: tuple[tuple[str, ...], ...] = tuple(
    tuple(group.values()) for group in (PROPERTY_COLUMNS, HEATING_COLUMNS, COOLING_COLUMNS, BASEMENT_COLUMNS)
)

FEATURE_NAMES: tuple[str, ...] = NUMERIC_FEATURES + tuple(c for group in ONE_HOT_GROUPS for c in group)

AUX_NAMES: tuple[str, ...] = ("carpet_rooms", "hardwood_rooms")


def _keep(record: RawListing) -> bool:
    if record.price is None or record.price >= PRICE_CEILING:
        return False
    return record.sqft is None or record.sqft <= SQFT_LIMIT


def filter_outliers(records: Iterable[RawListing]) -> tuple[list[RawListing], int]:
    """Drop unpriced listings, prices of $2,500,000 or more, and homes over 10,000 sqft."""
    records = list(records)
    kept = [record for record in records if _keep(record)]
    dropped = len(records) - len(kept)
    logger.info(f"Outlier filter kept {len(kept)} of {len(records)} row(s), dropped {dropped}")
    return kept, dropped


def column_medians(records: list[RawListing]) -> dict[str, float]:
    medians = {}
    for column in IMPUTED_COLUMNS:
        present = [float(getattr(r, column)) for r in records if getattr(r, column) is not None]
        medians[column] = float(np.median(present)) if present else 0.0
    return medians


def feature_row(record: RawListing, medians: dict[str, float]) -> list[float]:
    """The 23 model inputs of one listing, in FEATURE_NAMES order."""
    values = {}
    for column in IMPUTED_COLUMNS:
        raw = getattr(record, column)
        values[column] = float(raw) if raw is not None else medians[column]
    values["total_rooms"] = float(combine_rooms(record.carpet_rooms, record.hardwood_rooms))

    basement_text = " ".join(t for t in (record.basement, record.basement_description) if t)
    hot = {
        PROPERTY_COLUMNS[categorize_property(record.property_type)],
        HEATING_COLUMNS[categorize_heating(record.heating)],
        COOLING_COLUMNS[categorize_cooling(record.cooling)],
        BASEMENT_COLUMNS[categorize_basement(basement_text or None)],
    }
    row = [values[name] for name in NUMERIC_FEATURES]
    row += [1.0 if name in hot else 0.0 for group in ONE_HOT_GROUPS for name in group]
    return row


def build_dataset(records: Iterable[RawListing]) -> Dataset:
    """Encode an outlier-filtered table into the numeric model matrix.

    Absent numerics take the column median of this table, absent categoricals
    fall into their "other"/"none" column and absent room counts count as 0.

    Raises:
        DatasetError: no priced rows remain.
    """
    records = list(records)
    priced = [record for record in records if record.price is not None]
    if len(priced) < len(records):
        logger.warning(f"Dropping {len(records) - len(priced)} row(s) without a price")
    if not priced:
        raise DatasetError("no rows")

    medians = column_medians(priced)
    logger.debug(f"Imputation medians: {medians}")

    rows = [feature_row(record, medians) for record in priced]
    aux = [[float(record.carpet_rooms or 0), float(record.hardwood_rooms or 0)] for record in priced]
    dataset = Dataset(
        feature_names=list(FEATURE_NAMES),
        rows=np.array(rows, dtype=float),
        target=np.array([record.price for record in priced], dtype=float),
        aux_names=list(AUX_NAMES),
        aux=np.array(aux, dtype=float),
    )
    logger.info(f"Built dataset with {dataset.n_rows} row(s) x {dataset.n_features} feature(s)")
    return dataset


def write_dataset_csv(dataset: Dataset, path: Union[str, Path]) -> Path:
    """Cleaned-dataset CSV: feature columns then price, one row per listing."""
    path = Path(path)
    columns = list(dataset.feature_names) + ["price"]
    body = [
        [format_number(v) for v in row] + [format_number(price)]
        for row, price in zip(dataset.rows.tolist(), dataset.target.tolist())
    ]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(body, columns=columns, dtype=str).to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise LoadError(f"cannot write {path}: {str(e)}")
    logger.info(f"Wrote cleaned dataset ({dataset.n_rows} row(s)) to {path}")
    return path
