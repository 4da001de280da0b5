import logging
import re
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import lxml.html
import yaml
from dateutil import parser as dateparser
from lxml import etree
from pydantic import BaseModel, Field, ValidationError

from houseprice.dataset.loader import write_listings
from houseprice.dataset.schema import DATE_COLUMN, INTEGER_COLUMNS, NUMERIC_COLUMNS
from houseprice.dataset.utils import normalize_number
from houseprice.errors import ConfigError, ListingParseError
from houseprice.listing_parser.base_types import FieldRule, RuleTable
from houseprice.types.types import ParsedPage, RawListing

logger = logging.getLogger(__name__)

DEFAULT_RULES_PATH = Path(__file__).with_name("rules.yaml")

_HTML_PARSER = lxml.html.HTMLParser(encoding="utf-8", recover=True)


def load_rules(path: Union[str, Path, None] = None) -> RuleTable:
    """Read and validate a rule-table YAML file (the packaged table by default)."""
    path = Path(path) if path is not None else DEFAULT_RULES_PATH
    logger.info(f"Loading listing rules from {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read rules file {path}: {str(e)}")
    except yaml.YAMLError as e:
        raise ConfigError(f"rules file {path} is not valid YAML: {str(e)}")
    if not isinstance(raw, dict):
        raise ConfigError(f"rules file {path} must hold a mapping")
    try:
        return RuleTable(**raw)
    except (ValidationError, re.error) as e:
        raise ConfigError(f"rules file {path} is invalid: {str(e)}")


@lru_cache(maxsize=1)
def _default_rules() -> RuleTable:
    return load_rules(DEFAULT_RULES_PATH)


def _tree(document: str) -> Optional[etree._Element]:
    if not document or not document.strip():
        return None
    try:
        return lxml.html.document_fromstring(document.encode("utf-8"), parser=_HTML_PARSER)
    except (etree.ParserError, ValueError):
        return None


def _text(node) -> str:
    if isinstance(node, str):
        return " ".join(node.split())
    content = node.text_content() if hasattr(node, "text_content") else "".join(node.itertext())
    return " ".join(content.split())


def parse_index_page(document: str, rules: Optional[RuleTable] = None) -> list[str]:
    """Return property-detail links of an index page in document order, without repeats."""
    rules = rules or _default_rules()
    tree = _tree(document)
    if tree is None:
        return []

    pattern = re.compile(rules.detail_link_pattern)
    links: list[str] = []
    seen: set[str] = set()
    for anchor in tree.iter("a"):
        href = (anchor.get("href") or "").strip()
        if href and pattern.match(href) and href not in seen:
            seen.add(href)
            links.append(href)
    logger.info(f"Found {len(links)} property link(s) on index page")
    return links


def _label_value(tree: etree._Element, rules: RuleTable, label: str) -> Optional[str]:
    rows = rules.label_rows
    wanted = " ".join(label.split()).lower()
    for row in tree.xpath(rows.row_xpath):
        labels = row.xpath(rows.label_xpath)
        if labels and _text(labels[0]).lower() == wanted:
            values = row.xpath(rows.value_xpath)
            return _text(values[0]) if values else None
    return None


def _entry_value(tree: etree._Element, rules: RuleTable, key: str) -> Optional[str]:
    entries = rules.entries
    wanted = " ".join(key.split()).lower()
    for item in tree.xpath(entries.item_xpath):
        text = _text(item)
        head, sep, tail = text.partition(entries.separator)
        if sep and head.strip().lower() == wanted:
            return tail.strip()
    return None


def _locate(tree: etree._Element, rules: RuleTable, rule: FieldRule) -> Optional[str]:
    if rule.xpath is not None:
        found = tree.xpath(rule.xpath)
        text = _text(found[0]) if found else None
    elif rule.label is not None:
        text = _label_value(tree, rules, rule.label)
    else:
        text = _entry_value(tree, rules, rule.entry)

    if text and rule.pattern is not None:
        match = re.search(rule.pattern, text)
        text = match.group(1).strip() if match else None
    return text or None


def _convert(field: str, text: str) -> object:
    if field in NUMERIC_COLUMNS:
        number = normalize_number(text)
        if number is not None and field in INTEGER_COLUMNS:
            if not number.is_integer():
                raise ValueError(f"{text!r} is not a whole number")
            return int(number)
        return number
    if field == DATE_COLUMN:
        try:
            return dateparser.parse(text).date()
        except (ValueError, OverflowError) as e:
            raise ValueError(str(e))
    return text


def parse_listing_page(
    document: str,
    rules: Optional[RuleTable] = None,
    source_path: Optional[str] = None,
) -> ParsedPage:
    """Extract a RawListing from a saved listing page using the rule table.

    Attributes the rules cannot find, or whose text does not convert, are left
    absent and reported in ``missing_fields``.

    Raises:
        ListingParseError: the document has no listing structure; the message
            names the first anchor rule that matched nothing.
    """
    rules = rules or _default_rules()
    tree = _tree(document)
    for anchor in rules.anchors:
        if tree is None or not tree.xpath(anchor.xpath):
            raise ListingParseError(f"anchor rule '{anchor.name}' matched nothing")
    if tree is None:
        raise ListingParseError("document is empty")

    values: dict[str, object] = {}
    for field, rule in rules.fields.items():
        text = _locate(tree, rules, rule)
        if text is None:
            continue
        try:
            values[field] = _convert(field, text)
        except ValueError as e:
            logger.warning(f"Field {field} text {text!r} did not convert ({str(e)}); leaving it absent")

    record = RawListing(**values)
    page = ParsedPage(source_path=source_path, record=record, missing_fields=record.missing_fields())
    logger.debug(f"Parsed listing {record.address!r} with {len(page.missing_fields)} missing field(s)")
    return page


def export_csv(pages: list[ParsedPage], path: Union[str, Path]) -> Path:
    """Write parsed pages in the listings CSV schema."""
    return write_listings([page.record for page in pages], path)


class DirectoryParse(BaseModel):
    pages: list[ParsedPage] = Field(default_factory=list)
    links: list[str] = Field(default_factory=list)
    index_files: list[str] = Field(default_factory=list)


def parse_directory(directory: Union[str, Path], rules: Optional[RuleTable] = None) -> DirectoryParse:
    """Parse every ``*.html`` file in a directory, in file-name order.

    Files whose name starts with ``index`` are treated as index pages and
    contribute detail links; every other file must be a listing page.

    Raises:
        ListingParseError: a listing file failed; the message names the file.
    """
    directory = Path(directory)
    rules = rules or _default_rules()
    result = DirectoryParse()
    for path in sorted(directory.glob("*.html")):
        try:
            document = path.read_text(encoding="utf-8", errors="replace")
        except OSError as e:
            raise ListingParseError(f"{path}: cannot read file: {str(e)}")
        if path.name.startswith("index"):
            for link in parse_index_page(document, rules):
                if link not in result.links:
                    result.links.append(link)
            result.index_files.append(str(path))
            continue
        try:
            result.pages.append(parse_listing_page(document, rules, source_path=str(path)))
        except ListingParseError as e:
            logger.error(f"Failed to parse {path}: {str(e)}")
            raise ListingParseError(f"{path}: {str(e)}")
    logger.info(f"Parsed {len(result.pages)} listing page(s) and {len(result.index_files)} index page(s)")
    return result
