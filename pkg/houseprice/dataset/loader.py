import logging
from datetime import date
from pathlib import Path
from typing import Iterable, Optional, Union

import pandas as pd

from houseprice.dataset.schema import (
    DATE_COLUMN,
    INTEGER_COLUMNS,
    LISTING_COLUMNS,
    NUMERIC_COLUMNS,
)
from houseprice.dataset.utils import format_number, normalize_number, normalize_text
from houseprice.errors import DatasetError, LoadError, SchemaError
from houseprice.types.types import (
    ListingTable,
    Partition,
    RawListing,
    RejectedRow,
    ValidationReport,
    YearBucket,
)

logger = logging.getLogger(__name__)

Records = Union[ListingTable, Iterable[RawListing]]


def _records(table: Records) -> list[RawListing]:
    if isinstance(table, ListingTable):
        return list(table.records)
    return list(table)


def _parse_row(row: dict[str, str]) -> RawListing:
    """Convert one CSV row into a RawListing.

    Raises ValueError naming the column when a numeric cell cannot be parsed.
    """
    values: dict[str, object] = {}
    for column in LISTING_COLUMNS:
        cell = row.get(column, "")
        if column in NUMERIC_COLUMNS:
            try:
                number = normalize_number(cell)
            except ValueError:
                raise ValueError(f"unparseable numeric value in column {column}: {cell!r}")
            if number is not None and column in INTEGER_COLUMNS:
                if not number.is_integer():
                    raise ValueError(f"unparseable numeric value in column {column}: {cell!r}")
                number = int(number)
            values[column] = number
        elif column == DATE_COLUMN:
            text = normalize_text(cell)
            sold: Optional[date] = None
            if text:
                try:
                    sold = date.fromisoformat(text)
                except ValueError:
                    logger.warning(f"Unparseable sold_date {text!r}; loading as absent")
            values[column] = sold
        else:
            values[column] = normalize_text(cell)
    return RawListing(**values)


def load_listings(path: Union[str, Path]) -> ListingTable:
    """Load a listings CSV into RawListing records.

    Column order is free but the header must name exactly the documented
    columns. Rows whose numeric cells cannot be parsed are skipped and
    recorded as load rejections.

    Raises:
        LoadError: the file does not exist or cannot be read.
        SchemaError: a column is unknown or missing, or there is no header.
    """
    path = Path(path)
    logger.info(f"Loading listings from {path}")
    if not path.is_file():
        raise LoadError(f"listings file not found: {path}")

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False)
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path} has no header row")
    except (OSError, UnicodeDecodeError) as e:
        raise LoadError(f"cannot read {path}: {str(e)}")

    columns = [str(c).strip() for c in frame.columns]
    frame.columns = columns
    for column in columns:
        if column not in LISTING_COLUMNS:
            raise SchemaError(f"unknown column '{column}' in {path}")
    for column in LISTING_COLUMNS:
        if column not in columns:
            raise SchemaError(f"missing required column '{column}' in {path}")

    records: list[RawListing] = []
    rejections: list[RejectedRow] = []
    for index, row in enumerate(frame.to_dict("records")):
        try:
            records.append(_parse_row(row))
        except ValueError as e:
            logger.warning(f"Row {index} rejected: {str(e)}")
            rejections.append(RejectedRow(index=index, reason=str(e)))

    logger.info(f"Loaded {len(records)} listing(s), {len(rejections)} rejected at load")
    return ListingTable(records=records, load_rejections=rejections, source_path=str(path))


def write_listings(table: Records, path: Union[str, Path]) -> Path:
    """Write records in the listings CSV schema (header in canonical order)."""
    path = Path(path)
    rows = []
    for record in _records(table):
        row = {}
        for column in LISTING_COLUMNS:
            value = getattr(record, column)
            if value is None:
                row[column] = ""
            elif column in NUMERIC_COLUMNS:
                row[column] = format_number(value)
            elif column == DATE_COLUMN:
                row[column] = value.isoformat()
            else:
                row[column] = value
        rows.append(row)

    frame = pd.DataFrame(rows, columns=list(LISTING_COLUMNS), dtype=str)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        logger.error(f"Failed to write listings to {path}: {str(e)}", exc_info=True)
        raise LoadError(f"cannot write {path}: {str(e)}")
    logger.info(f"Wrote {len(rows)} listing(s) to {path}")
    return path


def validate(table: Records) -> ValidationReport:
    """Count absent fields and reject rows that break the record invariants.

    Rejections carry the row's position in the table. A row is rejected for a
    negative count or dollar amount, a missing/unparseable sold_date, or a
    missing city; multiple reasons are joined with "; ".
    """
    records = _records(table)
    missing = {column: 0 for column in LISTING_COLUMNS}
    rejected: list[RejectedRow] = []

    for index, record in enumerate(records):
        for column in record.missing_fields():
            missing[column] += 1

        reasons = []
        negatives = [
            column for column in NUMERIC_COLUMNS
            if getattr(record, column) is not None and getattr(record, column) < 0
        ]
        if negatives:
            logger.debug(f"Row {index} has negative value(s) in {negatives}")
            reasons.append("negative value")
        if record.sold_date is None:
            reasons.append("missing or unparseable sold_date")
        if not record.city:
            reasons.append("missing city")
        if reasons:
            rejected.append(RejectedRow(index=index, reason="; ".join(reasons)))

    report = ValidationReport(row_count=len(records), missing_counts=missing, rejected_rows=rejected)
    logger.info(f"Validated {report.row_count} row(s): {len(rejected)} rejected")
    return report


def accepted_records(table: Records, report: ValidationReport) -> list[RawListing]:
    rejected = report.rejected_indices()
    return [record for index, record in enumerate(_records(table)) if index not in rejected]


def partition_by_year(table: Records) -> Partition:
    """Split records into the year buckets; sales outside 2018-2022 are dropped.

    Raises:
        DatasetError: a row has no sold_date.
    """
    records = _records(table)
    buckets: dict[YearBucket, list[RawListing]] = {bucket: [] for bucket in YearBucket}
    dropped = 0
    for index, record in enumerate(records):
        if record.sold_date is None:
            raise DatasetError(f"row {index} has no sold_date; validate the table first")
        bucket = YearBucket.for_date(record.sold_date)
        if bucket is None:
            dropped += 1
            continue
        buckets[bucket].append(record)

    partition = Partition(buckets=buckets, dropped=dropped)
    logger.info(
        f"Partitioned {len(records)} row(s): "
        + ", ".join(f"{b.value}={n}" for b, n in partition.sizes().items())
        + f", dropped={dropped}"
    )
    return partition
