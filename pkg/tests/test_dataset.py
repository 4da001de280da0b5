from datetime import date

import pytest

from houseprice.dataset.loader import (
    accepted_records,
    load_listings,
    partition_by_year,
    validate,
    write_listings,
)
from houseprice.dataset.schema import LISTING_COLUMNS
from houseprice.dataset.utils import format_number, normalize_number, normalize_text
from houseprice.errors import DatasetError, LoadError, SchemaError
from houseprice.types.types import RawListing, YearBucket

HEADER = ",".join(LISTING_COLUMNS)


def _row(**values) -> str:
    return ",".join(values.get(column, "") for column in LISTING_COLUMNS)


def test_normalize_number():
    assert normalize_number("$335,000") == 335000.0
    assert normalize_number(" 1,180 ") == 1180.0
    assert normalize_number("") is None
    assert normalize_number(None) is None
    with pytest.raises(ValueError):
        normalize_number("three")
    with pytest.raises(ValueError):
        normalize_number("inf")


def test_normalize_text_and_format_number():
    assert normalize_text("  Fairfax ") == "Fairfax"
    assert normalize_text("   ") is None
    assert format_number(335000.0) == "335000"
    assert format_number(2.5) == "2.5"
    assert format_number(None) == ""


def test_load_two_valid_rows(tmp_path):
    path = tmp_path / "listings.csv"
    path.write_text(
        "\n".join(
            [
                HEADER,
                _row(price="300000", sold_date="2019-01-01", city="Fairfax"),
                _row(price="400000", sold_date="2020-05-05", city="Vienna"),
            ]
        )
        + "\n"
    )
    table = load_listings(path)
    assert len(table) == 2
    assert table.load_rejections == []


def test_load_fixture(listings_csv):
    table = load_listings(listings_csv)

    assert len(table) == 6
    assert [r.index for r in table.load_rejections] == [5]
    assert "beds" in table.load_rejections[0].reason

    first, second = table.records[0], table.records[1]
    assert first.price == 675000
    assert first.sqft == 2450
    assert first.tax_annual == 7120
    assert first.sold_date == date(2021, 6, 1)
    assert first.heating == "Natural Gas, Forced Air"
    assert second.beds is None
    assert second.basement is None


def test_load_missing_file(tmp_path):
    with pytest.raises(LoadError):
        load_listings(tmp_path / "absent.csv")


def test_load_missing_column(tmp_path):
    path = tmp_path / "listings.csv"
    columns = [c for c in LISTING_COLUMNS if c != "beds"]
    path.write_text(",".join(columns) + "\n")
    with pytest.raises(SchemaError, match="beds"):
        load_listings(path)


def test_load_unknown_column(tmp_path):
    path = tmp_path / "listings.csv"
    path.write_text(HEADER + ",garden\n")
    with pytest.raises(SchemaError, match="garden"):
        load_listings(path)


def test_load_column_order_is_free(tmp_path):
    path = tmp_path / "listings.csv"
    columns = list(reversed(LISTING_COLUMNS))
    values = {"price": "1", "city": "Fairfax", "sold_date": "2019-02-02"}
    path.write_text(",".join(columns) + "\n" + ",".join(values.get(c, "") for c in columns) + "\n")
    table = load_listings(path)
    assert table.records[0].price == 1
    assert table.records[0].city == "Fairfax"


def test_validate_empty_table():
    report = validate([])
    assert report.row_count == 0
    assert all(count == 0 for count in report.missing_counts.values())
    assert set(report.missing_counts) == set(LISTING_COLUMNS)


def test_validate_counts_missing_beds():
    report = validate([RawListing(price=1, sold_date=date(2019, 1, 1), city="Fairfax")])
    assert report.missing_counts["beds"] == 1
    assert report.rejected_rows == []


def test_validate_rejects_negative_price():
    report = validate([RawListing(price=-5, sold_date=date(2019, 1, 1), city="Fairfax")])
    assert len(report.rejected_rows) == 1
    assert report.rejected_rows[0].index == 0
    assert report.rejected_rows[0].reason == "negative value"


def test_validate_fixture(listings_csv):
    table = load_listings(listings_csv)
    report = validate(table)

    assert report.row_count == 6
    assert [r.index for r in report.rejected_rows] == [3, 5]
    assert report.rejected_rows[1].reason == "missing city"
    assert report.missing_counts["city"] == 1
    assert report.missing_counts["sold_date"] == 0


def test_partition_by_year():
    records = [
        RawListing(price=1, sold_date=date(2021, 6, 1), city="a"),
        RawListing(price=2, sold_date=date(2022, 3, 15), city="a"),
        RawListing(price=3, sold_date=date(2019, 1, 1), city="a"),
        RawListing(price=4, sold_date=date(2017, 12, 31), city="a"),
    ]
    partition = partition_by_year(records)

    assert [r.price for r in partition.buckets[YearBucket.Y2021_22]] == [1, 2]
    assert [r.price for r in partition.buckets[YearBucket.Y2019]] == [3]
    assert partition.buckets[YearBucket.Y2018] == []
    assert partition.dropped == 1


def test_partition_requires_sold_date():
    with pytest.raises(DatasetError):
        partition_by_year([RawListing(price=1, city="a")])


def test_fixture_pipeline_is_deterministic(listings_csv):
    reports = []
    for _ in range(2):
        table = load_listings(listings_csv)
        report = validate(table)
        partition = partition_by_year(accepted_records(table, report))
        reports.append((report.model_dump_json(), partition.sizes(), partition.dropped))

    assert reports[0] == reports[1]
    sizes, dropped = reports[0][1], reports[0][2]
    assert sizes[YearBucket.Y2021_22] == 2
    assert sizes[YearBucket.Y2019] == 1
    assert dropped == 1


def test_write_then_load_preserves_records(tmp_path, listings_csv):
    table = load_listings(listings_csv)
    path = write_listings(table, tmp_path / "copy.csv")
    assert load_listings(path).records == table.records
