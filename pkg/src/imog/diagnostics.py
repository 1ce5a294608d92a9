"""Diagnostic codes, severities, source spans, and the two output formats.

Every finding produced by the toolkit is a Diagnostic with a catalogued
code; the code alone determines the severity, so exit codes and report
formats never disagree about what counts as an error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True, order=True)
class SourceSpan:
    """1-based [start, end] region of a source file, end-inclusive."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int


# code -> (severity, summary). The catalog is the single source of truth:
# a code not listed here cannot be emitted.
CATALOG: dict[str, tuple[Severity, str]] = {
    # parser
    "P-001": (Severity.ERROR, "unexpected token"),
    "P-002": (Severity.ERROR, "duplicate id"),
    "P-003": (Severity.ERROR, "bad cardinality"),
    "P-004": (Severity.ERROR, "property redefinition"),
    # reference resolution
    "R-101": (Severity.ERROR, "unresolved reference"),
    "R-102": (Severity.ERROR, "illegal relation endpoints"),
    # structural validation
    "R-201": (Severity.ERROR, "feature tree is not a forest"),
    "R-202": (Severity.ERROR, "more than one root feature"),
    "R-203": (Severity.ERROR, "containment violates level order"),
    "W-201": (Severity.WARNING, "variation point nested under or-group"),
    "W-202": (Severity.WARNING, "feature or function not allocated"),
    "W-203": (Severity.WARNING, "block neither allocated nor contained"),
    "W-204": (Severity.WARNING, "requirement has no checkable attribute"),
    "W-205": (Severity.WARNING, "goal not referenced by any feature or function"),
    "I-201": (Severity.INFO, "perspective is empty"),
    # requirement conflicts
    "C-301": (Severity.ERROR, "conflicting requirements on a block"),
    "I-301": (Severity.INFO, "unit mismatch, not compared"),
    # knowledge base
    "R-401": (Severity.ERROR, "knowledge reference not found"),
    "I-401": (Severity.INFO, "knowledge entry available after target year"),
    "W-401": (Severity.WARNING, "knowledge entry has no year of availability"),
}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    elements: tuple[str, ...] = ()
    span: SourceSpan | None = None

    @property
    def severity(self) -> Severity:
        return CATALOG[self.code][0]


def make(
    code: str,
    message: str,
    elements: Sequence[str] = (),
    span: SourceSpan | None = None,
) -> Diagnostic:
    if code not in CATALOG:
        raise ValueError(f"unknown diagnostic code {code!r}")
    return Diagnostic(code, message, tuple(elements), span)


def _sort_key(d: Diagnostic) -> tuple:
    span = d.span
    if span is None:
        return ("", 0, 0, d.code, d.elements)
    return (span.file, span.start_line, span.start_col, d.code, d.elements)


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    """Deterministic report order: by (file, span, code)."""
    return sorted(diags, key=_sort_key)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)


def format_text(d: Diagnostic) -> str:
    """`CODE severity file:line:col message [ids]`, location omitted if unknown."""
    parts = [d.code, d.severity.value]
    if d.span is not None:
        parts.append(f"{d.span.file}:{d.span.start_line}:{d.span.start_col}")
    parts.append(d.message)
    if d.elements:
        parts.append("[" + " ".join(d.elements) + "]")
    return " ".join(parts)


def format_record(d: Diagnostic) -> str:
    span = None
    if d.span is not None:
        span = {
            "file": d.span.file,
            "startLine": d.span.start_line,
            "startCol": d.span.start_col,
            "endLine": d.span.end_line,
            "endCol": d.span.end_col,
        }
    return json.dumps(
        {
            "code": d.code,
            "severity": d.severity.value,
            "message": d.message,
            "elements": list(d.elements),
            "span": span,
        },
        sort_keys=False,
    )
