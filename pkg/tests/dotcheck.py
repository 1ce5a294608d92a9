"""Minimal grammar checker for the exported directed-graph text.

Accepts the subset of the DOT language the exporter may emit:

    digraph <id> { (node_stmt | edge_stmt)* }
    node_stmt: id attr_list? ';'?
    edge_stmt: id '->' id attr_list? ';'?
    attr_list: '[' id '=' value (','? id '=' value)* ']'

Ids and values are quoted strings (with \\-escapes) or bare words.
check() raises ValueError on any deviation and returns node/edge stats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_TOKEN_RE = re.compile(
    r"""
    \s+
  | "(?:[^"\\]|\\.)*"
  | ->
  | [{}\[\]=,;]
  | [A-Za-z0-9_.<>+-]+
    """,
    re.VERBOSE,
)


@dataclass
class GraphStats:
    name: str
    nodes: list[str] = field(default_factory=list)
    edges: list[tuple[str, str]] = field(default_factory=list)
    node_attrs: dict[str, dict[str, str]] = field(default_factory=dict)
    edge_attrs: list[dict[str, str]] = field(default_factory=list)


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ValueError(f"dot: bad character at offset {pos}: {text[pos]!r}")
        pos = m.end()
        tok = m.group(0)
        if not tok.isspace():
            tokens.append(tok)
    return tokens


def _unquote(tok: str) -> str:
    if tok.startswith('"'):
        body = tok[1:-1]
        return re.sub(r"\\(.)", lambda m: {"n": "\n"}.get(m.group(1), m.group(1)), body)
    return tok


def _is_id(tok: str) -> bool:
    return tok.startswith('"') or bool(re.match(r"^[A-Za-z0-9_.<>+-]+$", tok))


def check(text: str) -> GraphStats:
    tokens = _tokenize(text)
    pos = 0

    def expect(want: str) -> None:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != want:
            found = tokens[pos] if pos < len(tokens) else "<eof>"
            raise ValueError(f"dot: expected {want!r}, found {found!r}")
        pos += 1

    def take_id(what: str) -> str:
        nonlocal pos
        if pos >= len(tokens) or not _is_id(tokens[pos]):
            found = tokens[pos] if pos < len(tokens) else "<eof>"
            raise ValueError(f"dot: expected {what}, found {found!r}")
        tok = tokens[pos]
        pos += 1
        return _unquote(tok)

    def attr_list() -> dict[str, str]:
        nonlocal pos
        expect("[")
        attrs: dict[str, str] = {}
        while tokens[pos] != "]":
            key = take_id("attribute key")
            expect("=")
            attrs[key] = take_id("attribute value")
            if tokens[pos] == ",":
                pos += 1
        expect("]")
        return attrs

    expect("digraph")
    stats = GraphStats(name=take_id("graph name"))
    expect("{")
    while pos < len(tokens) and tokens[pos] != "}":
        subject = take_id("node id")
        if pos < len(tokens) and tokens[pos] == "->":
            pos += 1
            target = take_id("edge target")
            attrs = attr_list() if pos < len(tokens) and tokens[pos] == "[" else {}
            stats.edges.append((subject, target))
            stats.edge_attrs.append(attrs)
        else:
            attrs = attr_list() if pos < len(tokens) and tokens[pos] == "[" else {}
            stats.nodes.append(subject)
            stats.node_attrs[subject] = attrs
        if pos < len(tokens) and tokens[pos] == ";":
            pos += 1
    expect("}")
    if pos != len(tokens):
        raise ValueError("dot: trailing content after closing brace")
    return stats
