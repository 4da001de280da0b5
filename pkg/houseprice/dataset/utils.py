import math
import re
from typing import Optional

_NUMBER_NOISE = re.compile(r"[\s$,]")


def normalize_number(cell: Optional[str]) -> Optional[float]:
    """Parse a scraped numeric cell: "$335,000" -> 335000.0, "" -> None.

    Raises ValueError when the cell is not a finite number.
    """
    if cell is None:
        return None
    text = _NUMBER_NOISE.sub("", str(cell))
    if not text:
        return None
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number: {cell!r}")
    return value


def normalize_text(cell: Optional[str]) -> Optional[str]:
    if cell is None:
        return None
    text = str(cell).strip()
    return text or None


def format_number(value: Optional[float]) -> str:
    """Deterministic CSV rendering: integral values without a fraction."""
    if value is None:
        return ""
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)
