"""
Result Records
==============
One record per evaluated query, plus the text, JSON and CSV renderings.

JSON records always carry exactly the keys
    name, kind, numerator, denominator, quotient, error
with quotient/error (and, for failed queries, numerator/denominator) null.
Floats are written with 17 significant digits so doubles round-trip exactly.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import pandas as pd

from probe_helpers.engineLevers import JSON_SIGNIFICANT_DIGITS
from probe_helpers.text_blocks.cliTextBlocks import errorLineText, resultLineText

RECORD_KEYS = ("name", "kind", "numerator", "denominator", "quotient", "error")


@dataclass(frozen=True)
class QueryRecord:
    name: str
    kind: str
    numerator: Optional[float] = None
    denominator: Optional[float] = None
    quotient: Optional[float] = None
    error: Optional[str] = None
    diagnostics: tuple[str, ...] = ()

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_dict(self) -> dict:
        return {key: getattr(self, key) for key in RECORD_KEYS}


def _json_number(x: Optional[float]) -> str:
    if x is None or not math.isfinite(x):
        return "null"
    return format(float(x), f".{JSON_SIGNIFICANT_DIGITS}g")


def _json_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    return _json_number(value)


def format_json(records: Sequence[QueryRecord]) -> str:
    """JSON array of records (hand-assembled so every float uses the fixed digit count)."""
    if not records:
        return "[]"
    rows = []
    for record in records:
        items = ", ".join(f"{json.dumps(key)}: {_json_scalar(value)}" for key, value in record.to_dict().items())
        rows.append("  {" + items + "}")
    return "[\n" + ",\n".join(rows) + "\n]"


def _short(x: Optional[float]) -> str:
    return "null" if x is None else f"{x:.12g}"


def format_text_line(record: QueryRecord) -> str:
    if record.failed:
        return errorLineText.format(name=record.name, error=record.error)
    return resultLineText.format(
        name=record.name,
        quotient=_short(record.quotient),
        numerator=_short(record.numerator),
        denominator=_short(record.denominator),
    )


def format_text(records: Sequence[QueryRecord]) -> str:
    return "\n".join(format_text_line(r) for r in records)


def records_frame(records: Sequence[QueryRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.to_dict() for r in records], columns=list(RECORD_KEYS))


def save_csv(records: Sequence[QueryRecord], path) -> None:
    """Write the records as CSV with one row per query."""
    records_frame(records).to_csv(path, index=False, float_format=f"%.{JSON_SIGNIFICANT_DIGITS}g")
