"""
Column vocabulary of the listings CSV.

Header names are fixed; column order in a file is free. An empty cell means
the attribute was absent on the listing page.
"""
from houseprice.types.types import RawListing

LISTING_COLUMNS: tuple[str, ...] = tuple(RawListing.model_fields)


"""
Numeric columns. Cells may carry a leading dollar sign and thousands
separators ("$335,000"); both are stripped before parsing.
"""
NUMERIC_COLUMNS: tuple[str, ...] = (
    "sqft",
    "year_built",
    "price",
    "car_spaces",
    "beds",
    "baths_full",
    "baths_half",
    "carpet_rooms",
    "hardwood_rooms",
    "basement_sqft",
    "tax_annual",
)

INTEGER_COLUMNS: tuple[str, ...] = ("year_built",)


"""
@type: ISO-8601 date (YYYY-MM-DD)
"""
DATE_COLUMN = "sold_date"


TEXT_COLUMNS: tuple[str, ...] = tuple(
    c for c in LISTING_COLUMNS if c not in NUMERIC_COLUMNS and c != DATE_COLUMN
)
