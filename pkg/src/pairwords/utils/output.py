"""
Output Module

This module handles writing result tables as CSV (RFC 4180 quoting) or as
a single JSON document with the keys inputs, values, tail_bound,
periodic_part and seed.
"""

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


@dataclass
class Table:
    """
    A result table with fixed column order.

    Args:
        columns: Header, in output order
        rows: One mapping per row; missing cells are written empty
        inputs: Parameters that produced the table
        tail_bound: Certified bound on the discarded remainder, if any
        periodic_part: Oscillating contribution, if any
        seed: Master seed of a simulation, if any
    """

    columns: Sequence[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    inputs: Dict[str, Any] = field(default_factory=dict)
    tail_bound: Optional[float] = None
    periodic_part: Optional[float] = None
    seed: Optional[int] = None

    def add(self, **cells: Any) -> None:
        unknown = set(cells) - set(self.columns)
        if unknown:
            raise KeyError(f"columns not in table header: {sorted(unknown)}")
        self.rows.append(cells)


def _plain(value: Any) -> Any:
    """JSON-safe scalar: NaN and infinities become null, Fractions become strings."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "item"):
        return _plain(value.item())
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(table: Table) -> str:
    """Render the table as CSV with a header row and CRLF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(row.get(c)) for c in table.columns])
    return buffer.getvalue()


def to_document(table: Table) -> Dict[str, Any]:
    """The JSON document for one table."""
    return {
        "inputs": _plain(table.inputs),
        "values": [{c: _plain(row.get(c)) for c in table.columns} for row in table.rows],
        "tail_bound": _plain(table.tail_bound),
        "periodic_part": _plain(table.periodic_part),
        "seed": table.seed,
    }


def to_json(table: Table) -> str:
    return json.dumps(to_document(table), ensure_ascii=False, indent=2, allow_nan=False) + "\n"


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"unknown output format {fmt!r}; expected one of {FORMATS}")


def emit(
    table: Table,
    fmt: str,
    output: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """
    Write the table to a file or to a stream (stdout by default).

    Args:
        table: Result table
        fmt: 'csv' or 'json'
        output: File path; the stream is used when omitted
        stream: Target stream when no path is given
    """
    text = render(table, fmt)
    if output is not None:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        # newline="" keeps the CRLF terminators written by csv
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info(f"Wrote {len(table.rows)} row(s) to {path}")
        return
    stream = stream or sys.stdout
    stream.write(text)
    stream.flush()


def error_document(kind: str, reason: str, required: Any = None, budget: Any = None) -> str:
    """Machine-readable refusal written in JSON mode."""
    payload = {
        "error": {
            "type": kind,
            "reason": reason,
            "required": _plain(required),
            "budget": _plain(budget),
        }
    }
    return json.dumps(payload, ensure_ascii=False) + "\n"
