from datetime import date
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class RawListing(BaseModel):
    """One scraped property record, as captured from a listing page.

    Every field is optional: listing pages frequently omit attributes and the
    record keeps those gaps as ``None``. Field order is the CSV column order.
    """

    model_config = ConfigDict(frozen=True)

    sqft: Optional[float] = None
    property_type: Optional[str] = None
    year_built: Optional[int] = None
    price: Optional[float] = None
    car_spaces: Optional[float] = None
    address: Optional[str] = None
    high_school: Optional[str] = None
    beds: Optional[float] = None
    baths_full: Optional[float] = None
    baths_half: Optional[float] = None
    heating: Optional[str] = None
    cooling: Optional[str] = None
    carpet_rooms: Optional[float] = None
    hardwood_rooms: Optional[float] = None
    basement: Optional[str] = None
    basement_sqft: Optional[float] = None
    basement_description: Optional[str] = None
    tax_annual: Optional[float] = None
    sold_date: Optional[date] = None
    city: Optional[str] = None

    def missing_fields(self) -> list[str]:
        return [name for name in type(self).model_fields if getattr(self, name) is None]


class RejectedRow(BaseModel):
    index: int
    reason: str


class ListingTable(BaseModel):
    """Records accepted by the CSV loader plus the rows it could not parse."""

    model_config = ConfigDict(frozen=True)

    records: list[RawListing] = Field(default_factory=list)
    load_rejections: list[RejectedRow] = Field(default_factory=list)
    source_path: Optional[str] = None

    def __len__(self) -> int:
        return len(self.records)


class ValidationReport(BaseModel):
    row_count: int
    missing_counts: dict[str, int] = Field(default_factory=dict)
    rejected_rows: list[RejectedRow] = Field(default_factory=list)

    def rejected_indices(self) -> set[int]:
        return {row.index for row in self.rejected_rows}


class YearBucket(str, Enum):
    Y2018 = "2018"
    Y2019 = "2019"
    Y2020 = "2020"
    Y2021_22 = "2021-22"

    @classmethod
    def for_date(cls, sold: date) -> Optional["YearBucket"]:
        if sold.year in (2021, 2022):
            return cls.Y2021_22
        try:
            return cls(str(sold.year))
        except ValueError:
            return None


class Partition(BaseModel):
    buckets: dict[YearBucket, list[RawListing]] = Field(default_factory=dict)
    dropped: int = 0

    def sizes(self) -> dict[YearBucket, int]:
        return {bucket: len(rows) for bucket, rows in self.buckets.items()}


class ParsedPage(BaseModel):
    source_path: Optional[str] = None
    record: RawListing
    missing_fields: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _missing_matches_record(self) -> "ParsedPage":
        if self.missing_fields != self.record.missing_fields():
            raise ValueError("missing_fields must list exactly the absent fields of record")
        return self


class HeatingCategory(str, Enum):
    NATURAL_GAS = "natural_gas"
    BASEBOARD = "baseboard"
    OTHER = "other"


class CoolingCategory(str, Enum):
    CENTRAL_AIR = "central_air"
    ZONED = "zoned"
    OTHER = "other"


class BasementCategory(str, Enum):
    NONE = "none"
    FULL = "full"
    PARTIAL = "partial"
    ENGLISH = "english"
    WALKOUT = "walkout"


class PropertyCategory(str, Enum):
    SINGLE_FAMILY = "single_family"
    CONDO = "condo"
    TOWNHOUSE = "townhouse"


def _frozen_matrix(values: Any, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.size == 0 and arr.ndim != ndim:
        arr = arr.reshape((0,) if ndim == 1 else (0, 0))
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class Dataset(BaseModel):
    """Fully numeric model input: feature matrix, price target and column names.

    ``aux`` holds per-row columns that are reported in statistics but are not
    model inputs (the separate carpet and hardwood room counts).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    feature_names: list[str]
    rows: np.ndarray
    target: np.ndarray
    aux_names: list[str] = Field(default_factory=list)
    aux: Optional[np.ndarray] = None

    @field_validator("rows", mode="before")
    @classmethod
    def _rows_matrix(cls, value: Any) -> np.ndarray:
        return _frozen_matrix(value, 2)

    @field_validator("target", mode="before")
    @classmethod
    def _target_vector(cls, value: Any) -> np.ndarray:
        return _frozen_matrix(value, 1)

    @field_validator("aux", mode="before")
    @classmethod
    def _aux_matrix(cls, value: Any) -> Optional[np.ndarray]:
        return None if value is None else _frozen_matrix(value, 2)

    @model_validator(mode="after")
    def _shapes_agree(self) -> "Dataset":
        n = self.rows.shape[0]
        if self.target.shape[0] != n:
            raise ValueError(f"row count {n} does not match target length {self.target.shape[0]}")
        if n and self.rows.shape[1] != len(self.feature_names):
            raise ValueError(
                f"column count {self.rows.shape[1]} does not match {len(self.feature_names)} feature names"
            )
        if not np.all(np.isfinite(self.rows)) or not np.all(np.isfinite(self.target)):
            raise ValueError("dataset values must be finite")
        if self.aux is not None and self.aux.shape != (n, len(self.aux_names)):
            raise ValueError(f"aux shape {self.aux.shape} does not match ({n}, {len(self.aux_names)})")
        return self

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def column(self, name: str) -> np.ndarray:
        if name == "price":
            return self.target
        if name in self.feature_names:
            return self.rows[:, self.feature_names.index(name)]
        if name in self.aux_names and self.aux is not None:
            return self.aux[:, self.aux_names.index(name)]
        raise KeyError(name)

    def subset(self, indices: Any) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            feature_names=list(self.feature_names),
            rows=self.rows[idx].reshape(len(idx), self.n_features),
            target=self.target[idx],
            aux_names=list(self.aux_names),
            aux=None if self.aux is None else self.aux[idx].reshape(len(idx), len(self.aux_names)),
        )


class StatsTable(BaseModel):
    attributes: list[str]
    buckets: list[YearBucket]
    means: dict[YearBucket, dict[str, float]] = Field(default_factory=dict)
    row_counts: dict[YearBucket, int] = Field(default_factory=dict)

    def mean(self, bucket: YearBucket, attribute: str) -> float:
        return self.means[bucket][attribute]


class CorrMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    names: list[str]
    values: np.ndarray
    zero_variance: list[str] = Field(default_factory=list)

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.names.index(a), self.names.index(b)])

    def price_ranking(self) -> list[tuple[str, float]]:
        """Feature correlations with price, strongest positive first."""
        j = self.names.index("price")
        pairs = [(name, float(self.values[i, j])) for i, name in enumerate(self.names) if name != "price"]
        return sorted(pairs, key=lambda p: (-p[1], p[0]))


class EvaluationPair(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    predicted: np.ndarray
    actual: np.ndarray

    @field_validator("predicted", "actual", mode="before")
    @classmethod
    def _vector(cls, value: Any) -> np.ndarray:
        return _frozen_matrix(value, 1)

    @model_validator(mode="after")
    def _lengths_agree(self) -> "EvaluationPair":
        if self.predicted.shape != self.actual.shape:
            raise ValueError("predicted and actual must have equal lengths")
        if self.actual.shape[0] < 1:
            raise ValueError("an evaluation pair needs at least one sample")
        return self

    @property
    def n(self) -> int:
        return int(self.actual.shape[0])

    @property
    def actual_mean(self) -> float:
        return float(np.mean(self.actual))


class MetricSet(BaseModel):
    mae: float
    rmse: float
    r2: Optional[float] = None  # None: undefined (constant actuals)


class EvalCell(BaseModel):
    family: str
    bucket: YearBucket
    metrics: MetricSet
    params: dict[str, Any] = Field(default_factory=dict)
    cv_rmse: float
    n_train: int
    n_test: int


class EvalReport(BaseModel):
    cells: list[EvalCell] = Field(default_factory=list)
    split_seed: int
    test_fraction: float
    folds: int

    def cell(self, family: str, bucket: YearBucket) -> EvalCell:
        for c in self.cells:
            if c.family == family and c.bucket == bucket:
                return c
        raise KeyError((family, bucket))


class ShapExplanation(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    feature_names: list[str]
    phi: np.ndarray
    base_value: float
    prediction: float
    row: Optional[np.ndarray] = None


class ShapSummary(BaseModel):
    feature_names: list[str]
    pairs: dict[str, list[tuple[float, float]]] = Field(default_factory=dict)
    mean_abs: dict[str, float] = Field(default_factory=dict)
    ranking: list[str] = Field(default_factory=list)
