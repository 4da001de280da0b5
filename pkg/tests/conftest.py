from datetime import date
from pathlib import Path

import numpy as np
import pytest

from houseprice.dataset.loader import write_listings
from houseprice.types.types import Dataset, RawListing

FIXTURES = Path(__file__).parent / "fixtures"


def hedonic_listings(n: int, year: int = 2019, seed: int = 0) -> list[RawListing]:
    """Synthetic listings whose price is a nonlinear function of size, baths, age and tax plus noise.

    Size saturates, a large home with two or more full baths earns a step
    premium, both old and new construction sell above the middle years, and
    the tax effect flattens out at both ends.
    """
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        sqft = float(rng.integers(800, 4000))
        tax = float(round(sqft * rng.uniform(2.0, 3.5)))
        baths = int(rng.integers(1, 4))
        year_built = int(rng.integers(1940, 2021))
        size = 260_000 * (1 - np.exp(-(sqft - 800) / 900))
        premium = 180_000 if sqft > 2_500 and baths >= 2 else 0
        vintage = 90_000 if year_built < 1965 or year_built > 2010 else 0
        price = 150_000 + size + premium + vintage + 60_000 * np.tanh((tax - 6_000) / 1_500) + rng.normal(0, 8_000)
        records.append(
            RawListing(
                sqft=sqft,
                property_type=["Single Family Residential", "Townhouse", "Condo/Co-op"][i % 3],
                year_built=year_built,
                price=float(round(price)),
                car_spaces=float(rng.integers(0, 3)),
                address=f"{i} Synthetic Way",
                high_school="Fairfax High School",
                beds=float(rng.integers(1, 6)),
                baths_full=float(baths),
                baths_half=float(rng.integers(0, 2)),
                heating=["Natural Gas", "Baseboard", "Heat Pump"][i % 3],
                cooling=["Central Air", "Zoned", "None"][i % 3],
                carpet_rooms=float(rng.integers(0, 5)),
                hardwood_rooms=float(rng.integers(0, 5)),
                basement=["Full", "Partial", None, "Walk-Out"][i % 4],
                basement_sqft=float(rng.integers(0, 1500)),
                tax_annual=tax,
                sold_date=date(year, 1 + i % 12, 1 + i % 28),
                city="Fairfax",
            )
        )
    return records


def small_dataset(n: int = 40, seed: int = 0) -> Dataset:
    """Three-feature regression problem with a threshold effect on the first column."""
    rng = np.random.default_rng(seed)
    X = np.column_stack(
        [
            rng.integers(1000, 3000, size=n).astype(float),
            rng.integers(1, 5, size=n).astype(float),
            rng.integers(0, 2, size=n).astype(float),
        ]
    )
    y = 50_000 + 100 * X[:, 0] + 20_000 * X[:, 1] + 80_000 * (X[:, 0] > 2000) + 5_000 * X[:, 2]
    y = y + rng.normal(0, 2_000, size=n)
    return Dataset(feature_names=["sqft", "beds", "garage"], rows=X, target=y)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def listings_csv() -> Path:
    return FIXTURES / "listings.csv"


@pytest.fixture
def dataset() -> Dataset:
    return small_dataset()


@pytest.fixture
def synthetic_csv(tmp_path) -> Path:
    records = hedonic_listings(30, year=2019, seed=1) + hedonic_listings(30, year=2021, seed=2)
    return write_listings(records, tmp_path / "synthetic.csv")
