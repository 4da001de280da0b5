import pytest

from houseprice.dataset.loader import load_listings
from houseprice.errors import ConfigError, ListingParseError
from houseprice.listing_parser.parser import (
    export_csv,
    load_rules,
    parse_directory,
    parse_index_page,
    parse_listing_page,
)
from houseprice.types.types import RawListing


@pytest.fixture
def html_dir(fixtures_dir):
    return fixtures_dir / "html"


def _read(html_dir, name):
    return (html_dir / name).read_text(encoding="utf-8")


def test_index_page_links_in_order(html_dir):
    links = parse_index_page(_read(html_dir, "index.html"))
    assert links == [
        "/VA/Fairfax/4105-Chain-Bridge-Rd-22030/home/9876543",
        "https://www.redfin.com/VA/Vienna/212-Maple-Ave-W-22180/home/1234567",
    ]


def test_index_page_empty_document():
    assert parse_index_page("") == []


def test_index_page_deduplicates():
    link = "/VA/Fairfax/1-Main-St-22030/home/42"
    page = f'<html><body><a href="{link}">a</a><a href="{link}">b</a></body></html>'
    assert parse_index_page(page) == [link]


def test_full_listing_page(html_dir):
    page = parse_listing_page(_read(html_dir, "listing_full.html"))
    record = page.record

    assert page.missing_fields == []
    assert record.address == "4105 Chain Bridge Rd"
    assert record.city == "Fairfax"
    assert record.price == 675000
    assert record.sqft == 2450
    assert record.beds == 4
    assert record.year_built == 1995
    assert record.tax_annual == 7120
    assert record.property_type == "Single Family Residential"
    assert record.heating == "Natural Gas, Forced Air"
    assert record.basement_description == "Partial, Walk-Out Access"
    assert record.basement_sqft == 1100
    assert record.sold_date.isoformat() == "2021-06-01"


def test_partial_listing_page_reports_basement_missing(html_dir):
    page = parse_listing_page(_read(html_dir, "listing_partial.html"))

    assert page.missing_fields == ["basement", "basement_sqft", "basement_description"]
    assert page.record.basement is None
    assert page.record.sold_date.isoformat() == "2019-03-15"
    assert page.record.cooling == "Zoned, Central Air"


def test_non_listing_document():
    with pytest.raises(ListingParseError, match="listing_root"):
        parse_listing_page("just some plain text, nothing to see")


def test_missing_second_anchor_is_named():
    page = '<html><body><div data-rf-test-id="listing-page"><p>no address</p></div></body></html>'
    with pytest.raises(ListingParseError, match="address"):
        parse_listing_page(page)


def test_unconvertible_value_is_left_absent():
    page = (
        '<html><body><div data-rf-test-id="listing-page">'
        '<div class="street-address">1 Main St</div>'
        '<div class="keyDetail"><span class="header">Year Built</span><span class="content">unknown</span></div>'
        "</div></body></html>"
    )
    parsed = parse_listing_page(page)
    assert parsed.record.year_built is None
    assert "year_built" in parsed.missing_fields


def test_export_and_reload(tmp_path, html_dir):
    pages = [
        parse_listing_page(_read(html_dir, "listing_full.html")),
        parse_listing_page(_read(html_dir, "listing_partial.html")),
        parse_listing_page(_read(html_dir, "listing_full.html")),
    ]
    path = export_csv(pages, tmp_path / "listings.csv")

    lines = path.read_text().splitlines()
    assert len(lines) == 4
    table = load_listings(path)
    assert table.records == [page.record for page in pages]


def test_export_writes_empty_cell_for_absent_beds(tmp_path):
    from houseprice.types.types import ParsedPage

    record = RawListing(price=1, city="Fairfax")
    path = export_csv([ParsedPage(record=record, missing_fields=record.missing_fields())], tmp_path / "out.csv")
    header, row = path.read_text().splitlines()
    assert row.split(",")[header.split(",").index("beds")] == ""


def test_parse_directory(html_dir):
    result = parse_directory(html_dir)

    assert len(result.pages) == 2
    assert len(result.links) == 2
    assert [p.record.city for p in result.pages] == ["Fairfax", "Vienna"]


def test_rules_file_must_be_valid(tmp_path):
    path = tmp_path / "rules.yaml"
    path.write_text("detail_link_pattern: '.*'\nfields:\n  garden:\n    xpath: '//div'\n")
    with pytest.raises(ConfigError, match="garden"):
        load_rules(path)


def test_custom_rules_change_extraction(tmp_path, html_dir):
    path = tmp_path / "rules.yaml"
    path.write_text(
        "detail_link_pattern: '^/home/\\d+$'\n"
        "anchors:\n  - name: body\n    xpath: '//body'\n"
        "fields:\n  city:\n    xpath: \"//span[@class='region']\"\n"
    )
    rules = load_rules(path)
    page = parse_listing_page(_read(html_dir, "listing_full.html"), rules)
    assert page.record.city == "VA"
    assert parse_index_page('<a href="/home/7">x</a>', rules) == ["/home/7"]
