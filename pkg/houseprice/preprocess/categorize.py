"""Free-text listing attributes to the categories used as one-hot columns.

All matching is case-insensitive substring matching on the raw description.
Where a description mentions several categories the most specific one wins:
zoned before central air, and walk-out > English > full > partial.
"""
import re
from typing import Optional

from houseprice.types.types import (
    BasementCategory,
    CoolingCategory,
    HeatingCategory,
    PropertyCategory,
)

_WALKOUT = re.compile(r"walk[\s-]?out", re.IGNORECASE)


def categorize_heating(text: Optional[str]) -> HeatingCategory:
    lowered = (text or "").lower()
    if "natural gas" in lowered:
        return HeatingCategory.NATURAL_GAS
    if "baseboard" in lowered:
        return HeatingCategory.BASEBOARD
    return HeatingCategory.OTHER


def categorize_cooling(text: Optional[str]) -> CoolingCategory:
    lowered = (text or "").lower()
    if "zoned" in lowered:
        return CoolingCategory.ZONED
    if "central air" in lowered:
        return CoolingCategory.CENTRAL_AIR
    return CoolingCategory.OTHER


def categorize_basement(text: Optional[str]) -> BasementCategory:
    lowered = (text or "").lower()
    if _WALKOUT.search(lowered):
        return BasementCategory.WALKOUT
    if "english" in lowered:
        return BasementCategory.ENGLISH
    if "full" in lowered:
        return BasementCategory.FULL
    if "partial" in lowered:
        return BasementCategory.PARTIAL
    return BasementCategory.NONE


def categorize_property(text: Optional[str]) -> PropertyCategory:
    # "Condo/Co-op", "Townhouse", "Single Family Residential"; unknown -> single family
    lowered = (text or "").lower()
    if "condo" in lowered or "co-op" in lowered:
        return PropertyCategory.CONDO
    if "town" in lowered:
        return PropertyCategory.TOWNHOUSE
    return PropertyCategory.SINGLE_FAMILY


def combine_rooms(carpet: Optional[float], hardwood: Optional[float]) -> float:
    return (carpet or 0) + (hardwood or 0)
