import logging
from pathlib import Path
from typing import Iterable, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from houseprice.dataset.loader import accepted_records, load_listings, partition_by_year, validate
from houseprice.preprocess.build import build_dataset, filter_outliers
from houseprice.types.types import Dataset, ListingTable, RawListing, ValidationReport, YearBucket

logger = logging.getLogger(__name__)


class PreparedData(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    table: ListingTable
    report: ValidationReport
    records: dict[YearBucket, list[RawListing]] = Field(default_factory=dict)
    datasets: dict[YearBucket, Dataset] = Field(default_factory=dict)
    outliers: dict[YearBucket, int] = Field(default_factory=dict)
    out_of_range: int = 0

    def all_records(self) -> list[RawListing]:
        return [record for bucket in YearBucket for record in self.records.get(bucket, [])]


def prepare_buckets(
    path: Union[str, Path],
    buckets: Optional[Iterable[YearBucket]] = None,
) -> PreparedData:
    """Raw listings CSV to one encoded dataset per year bucket.

    Load, validate, keep accepted rows, partition by sale year, drop
    outliers per bucket and encode. Buckets left empty are skipped.
    """
    wanted = list(buckets) if buckets is not None else list(YearBucket)
    table = load_listings(path)
    report = validate(table)
    partition = partition_by_year(accepted_records(table, report))

    prepared = PreparedData(table=table, report=report, out_of_range=partition.dropped)
    for bucket in wanted:
        kept, dropped = filter_outliers(partition.buckets.get(bucket, []))
        prepared.outliers[bucket] = dropped
        if not kept:
            logger.warning(f"Bucket {bucket.value} has no rows after filtering; skipping it")
            continue
        prepared.records[bucket] = kept
        prepared.datasets[bucket] = build_dataset(kept)
    return prepared
