"""Typed form of the listing-page rule table."""
import re
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from houseprice.types.types import RawListing


class AnchorRule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    xpath: str


class LabelRows(BaseModel):
    model_config = ConfigDict(extra="forbid")

    row_xpath: str
    label_xpath: str
    value_xpath: str


class EntryRows(BaseModel):
    model_config = ConfigDict(extra="forbid")

    item_xpath: str
    separator: str = ":"


class FieldRule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    xpath: Optional[str] = None
    label: Optional[str] = None
    entry: Optional[str] = None
    pattern: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one_locator(self) -> "FieldRule":
        given = [k for k in ("xpath", "label", "entry") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError(f"a field rule needs exactly one of xpath/label/entry, got {given or 'none'}")
        return self

    @field_validator("pattern")
    @classmethod
    def _pattern_compiles(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            compiled = re.compile(value)
            if compiled.groups < 1:
                raise ValueError(f"pattern {value!r} must contain a capture group")
        return value


class RuleTable(BaseModel):
    model_config = ConfigDict(extra="forbid")

    detail_link_pattern: str
    anchors: list[AnchorRule] = Field(default_factory=list)
    label_rows: Optional[LabelRows] = None
    entries: Optional[EntryRows] = None
    fields: dict[str, FieldRule] = Field(default_factory=dict)

    @field_validator("detail_link_pattern")
    @classmethod
    def _link_pattern_compiles(cls, value: str) -> str:
        re.compile(value)
        return value

    @model_validator(mode="after")
    def _fields_are_listing_fields(self) -> "RuleTable":
        unknown = [name for name in self.fields if name not in RawListing.model_fields]
        if unknown:
            raise ValueError(f"rule table names unknown listing field(s): {unknown}")
        if any(rule.label is not None for rule in self.fields.values()) and self.label_rows is None:
            raise ValueError("label rules need a label_rows section")
        if any(rule.entry is not None for rule in self.fields.values()) and self.entries is None:
            raise ValueError("entry rules need an entries section")
        return self
