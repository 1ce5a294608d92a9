"""Persistent store for reusable solution elements.

Insights extracted from finished models (blocks, variants,
requirements) become flat-file entries that later models reference via
`kbref`. The store is one record per line and diff-friendly: a
distributed committee merges it with ordinary text merges.

Store line format (`kb.imogkb`):

    entry <id> name="..." type=<token> year=<nat> prop.<key>=<value>[unit]... provenance="model@timestamp"

Lines starting with `#` are comments; saving canonicalizes (id-sorted,
comments dropped) and replaces the file atomically.
"""

from __future__ import annotations

import os
import re
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import Diagnostic, make, sort_diagnostics
from .errors import KindNotExtractableError, StoreCorruptError, UnknownElementError
from .model import ElementKind, Model, Property, RelationKind
from .printer import escape_string, format_number

MIN_YEAR = 1900

_EXTRACTABLE = frozenset(
    {ElementKind.BLOCK, ElementKind.VARIANT, ElementKind.REQUIREMENT}
)

_TOKEN_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_NUMBER_RE = re.compile(r"^(-?\d+(?:\.\d+)?)([A-Za-z_][A-Za-z0-9_]*)?$")


@dataclass(frozen=True)
class KnowledgeEntry:
    id: str
    name: str
    type: str
    year_available: int
    properties: tuple[Property, ...] = ()
    provenance: tuple[str, str] = ("", "")  # (model name, timestamp)


@dataclass(frozen=True)
class ExtractResult:
    entries: list[KnowledgeEntry]
    diagnostics: list[Diagnostic] = field(default_factory=list)


def current_timestamp() -> str:
    """UTC timestamp; SOURCE_DATE_EPOCH pins it for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def extract(
    model: Model, ids: list[str], *, timestamp: str | None = None
) -> ExtractResult:
    """Convert blocks, variants, or requirements into store entries.

    The entry type comes from a `stereotype` property when present, else
    from the element kind; the availability year from a `year` property.
    A missing or pre-1900 year is flagged (W-401) and replaced by the
    extraction year.
    """
    ts = timestamp or current_timestamp()
    fallback_year = int(ts[:4])
    entries: list[KnowledgeEntry] = []
    diags: list[Diagnostic] = []
    for element_id in ids:
        element = model.elements.get(element_id)
        if element is None:
            raise UnknownElementError(element_id)
        if element.kind not in _EXTRACTABLE:
            raise KindNotExtractableError(element_id, element.kind.value)
        stereotype = element.property_value("stereotype")
        entry_type = (
            stereotype if isinstance(stereotype, str) else element.kind.value
        )
        year = element.property_value("year")
        if not isinstance(year, int) or isinstance(year, bool) or year < MIN_YEAR:
            diags.append(
                make(
                    "W-401",
                    f"{element_id!r} has no usable year property, "
                    f"assuming {fallback_year}",
                    [element_id],
                    model.span_of(element_id),
                )
            )
            year = fallback_year
        props = tuple(
            p for p in element.properties if p.key not in ("year", "stereotype")
        )
        entries.append(
            KnowledgeEntry(
                id=element.id,
                name=element.name,
                type=entry_type,
                year_available=year,
                properties=props,
                provenance=(model.name, ts),
            )
        )
    return ExtractResult(entries, sort_diagnostics(diags))


# --- store file ----------------------------------------------------------------


def _format_value(prop: Property) -> str:
    v = prop.value
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return format_number(v) + (prop.unit or "")
    return f'"{escape_string(v)}"'


def format_entry(entry: KnowledgeEntry) -> str:
    fields = [
        "entry",
        entry.id,
        f'name="{escape_string(entry.name)}"',
        f"type={entry.type}",
        f"year={entry.year_available}",
    ]
    for p in entry.properties:
        fields.append(f"prop.{p.key}={_format_value(p)}")
    model_name, ts = entry.provenance
    fields.append(f'provenance="{escape_string(model_name)}@{ts}"')
    return " ".join(fields)


class _LineScanner:
    def __init__(self, path: str, line_no: int, text: str):
        self.path = path
        self.line_no = line_no
        self.text = text
        self.pos = 0

    def fail(self, reason: str) -> StoreCorruptError:
        return StoreCorruptError(self.path, self.line_no, reason)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] == " ":
            self.pos += 1

    def done(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def word(self, what: str) -> str:
        self.skip_ws()
        m = re.match(r"[^\s=]+", self.text[self.pos :])
        if not m:
            raise self.fail(f"expected {what}")
        self.pos += m.end()
        return m.group(0)

    def quoted(self, what: str) -> str:
        if self.pos >= len(self.text) or self.text[self.pos] != '"':
            raise self.fail(f"expected quoted {what}")
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.fail(f"unterminated {what}")
            ch = self.text[self.pos]
            self.pos += 1
            if ch == '"':
                return "".join(out)
            if ch == "\\":
                if self.pos >= len(self.text):
                    raise self.fail(f"unterminated {what}")
                esc = self.text[self.pos]
                self.pos += 1
                out.append({"n": "\n", "t": "\t"}.get(esc, esc))
            else:
                out.append(ch)

    def field(self) -> tuple[str, str, bool]:
        """(key, value, was_quoted)."""
        self.skip_ws()
        m = re.match(r"[A-Za-z_][A-Za-z0-9_.]*", self.text[self.pos :])
        if not m:
            raise self.fail("expected a key=value field")
        key = m.group(0)
        self.pos += m.end()
        if self.pos >= len(self.text) or self.text[self.pos] != "=":
            raise self.fail(f"field {key!r} has no value")
        self.pos += 1
        if self.pos < len(self.text) and self.text[self.pos] == '"':
            return key, self.quoted(key), True
        m = re.match(r"[^\s]+", self.text[self.pos :])
        if not m:
            raise self.fail(f"missing value for {key}")
        self.pos += m.end()
        return key, m.group(0), False


def _parse_line(path: str, line_no: int, line: str) -> KnowledgeEntry:
    scanner = _LineScanner(path, line_no, line)
    head = scanner.word("'entry'")
    if head != "entry":
        raise scanner.fail(f"expected 'entry', found {head!r}")
    entry_id = scanner.word("entry id")
    if not _TOKEN_RE.match(entry_id):
        raise scanner.fail(f"bad entry id {entry_id!r}")
    name = None
    entry_type = None
    year = None
    provenance = ("", "")
    props: list[Property] = []
    while not scanner.done():
        key, value, was_quoted = scanner.field()
        if key == "name":
            if not was_quoted:
                raise scanner.fail("name must be quoted")
            name = value
        elif key == "type":
            if not _TOKEN_RE.match(value):
                raise scanner.fail(f"bad type token {value!r}")
            entry_type = value
        elif key == "year":
            if not value.isdigit():
                raise scanner.fail(f"bad year {value!r}")
            year = int(value)
        elif key == "provenance":
            if not was_quoted:
                raise scanner.fail("provenance must be quoted")
            model_name, sep, ts = value.rpartition("@")
            if not sep:
                raise scanner.fail("provenance must be model@timestamp")
            provenance = (model_name, ts)
        elif key.startswith("prop."):
            props.append(_parse_prop(scanner, key[5:], value, was_quoted))
        else:
            raise scanner.fail(f"unknown field {key!r}")
    if name is None or entry_type is None or year is None:
        raise scanner.fail("entry needs name, type and year")
    if year < MIN_YEAR:
        raise scanner.fail(f"year {year} is before {MIN_YEAR}")
    return KnowledgeEntry(
        entry_id, name, entry_type, year, tuple(props), provenance
    )


def _parse_prop(
    scanner: _LineScanner, key: str, raw: str, was_quoted: bool
) -> Property:
    if not _TOKEN_RE.match(key):
        raise scanner.fail(f"bad property key {key!r}")
    if was_quoted:
        return Property(key, raw)
    if raw == "true":
        return Property(key, True)
    if raw == "false":
        return Property(key, False)
    m = _NUMBER_RE.match(raw)
    if m:
        number = m.group(1)
        value = float(number) if "." in number else int(number)
        return Property(key, value, m.group(2))
    raise scanner.fail(f"bad value {raw!r} for property {key!r}")


def load(store: str | Path) -> list[KnowledgeEntry]:
    """All entries, id-sorted. Raises StoreCorrupt naming the bad line."""
    path = Path(store)
    entries: dict[str, KnowledgeEntry] = {}
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            entry = _parse_line(str(path), line_no, text)
            if entry.id in entries:
                raise StoreCorruptError(
                    str(path), line_no, f"duplicate entry id {entry.id!r}"
                )
            entries[entry.id] = entry
    return [entries[k] for k in sorted(entries)]


def save(store: str | Path, entries: list[KnowledgeEntry]) -> int:
    """Append-or-replace by id; atomic replace; returns the store size."""
    path = Path(store)
    merged: dict[str, KnowledgeEntry] = {}
    if path.exists():
        for entry in load(path):
            merged[entry.id] = entry
    for entry in entries:
        if entry.year_available < MIN_YEAR:
            raise ValueError(
                f"entry {entry.id!r}: year {entry.year_available} is before "
                f"{MIN_YEAR}"
            )
        merged[entry.id] = entry
    lines = [format_entry(merged[k]) for k in sorted(merged)]
    fd, tmp_name = tempfile.mkstemp(
        dir=str(path.parent) or ".", prefix=path.name, suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return len(merged)


def query(
    store: str | Path,
    *,
    type: str | None = None,
    max_year: int | None = None,
    property_key: str | None = None,
) -> list[KnowledgeEntry]:
    """Entries matching every given filter; max_year means available by then."""
    out = []
    for entry in load(store):
        if type is not None and entry.type != type:
            continue
        if max_year is not None and entry.year_available > max_year:
            continue
        if property_key is not None and not any(
            p.key == property_key for p in entry.properties
        ):
            continue
        out.append(entry)
    return out


def model_target_year(model: Model) -> int | None:
    """First `target_year` numeric property in declaration order, if any."""
    for element in model.elements.values():
        value = element.property_value("target_year")
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    return None


def check_kbrefs(model: Model, store: str | Path) -> list[Diagnostic]:
    """R-401 for unknown targets, I-401 for entries past the target year.

    A missing store file counts as an empty store; a corrupt one raises.
    """
    path = Path(store)
    stored = {e.id: e for e in load(path)} if path.exists() else {}
    target_year = model_target_year(model)
    diags: list[Diagnostic] = []
    for index, rel in enumerate(model.relations):
        if rel.kind is not RelationKind.KB_REF:
            continue
        target = rel.targets[0]
        span = model.spans.get(index)
        inline = model.elements.get(target)
        if inline is None and target not in stored:
            diags.append(
                make(
                    "R-401",
                    f"knowledge reference {target!r} found neither in the store "
                    "nor in the model",
                    [rel.source, target],
                    span,
                )
            )
            continue
        year: int | None = None
        if target in stored:
            year = stored[target].year_available
        elif inline is not None and inline.kind is ElementKind.KNOWLEDGE_ENTRY:
            value = inline.property_value("year")
            if isinstance(value, int) and not isinstance(value, bool):
                year = value
        if (
            target_year is not None
            and year is not None
            and year > target_year
        ):
            diags.append(
                make(
                    "I-401",
                    f"{target!r} is estimated for {year}, after the declared "
                    f"target year {target_year}",
                    [rel.source, target],
                    span,
                )
            )
    return sort_diagnostics(diags)
