"""Traceability analytics over the allocation/constraint graph.

The bridge between problem and solution space is the allocation edge:
requirements placed on features flow to the blocks realizing them, and
blocks additionally inherit the requirements of their containing
ancestors. A conflict is an attribute of one block constrained to an
empty admissible set by two or more requirements with the same unit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .diagnostics import Diagnostic, make, sort_diagnostics
from .errors import UnknownElementError
from .model import (
    ElementKind,
    Model,
    RelationKind,
    RequirementBody,
    TREE_KINDS,
)


@dataclass(frozen=True)
class Origin:
    kind: str  # "direct" | "allocation" | "inherited"
    via: str | None = None  # allocated feature, or containing ancestor block

    def describe(self) -> str:
        if self.kind == "direct":
            return "direct"
        if self.kind == "allocation":
            return f"via allocation from {self.via}"
        return f"inherited from {self.via}"


@dataclass(frozen=True)
class Interval:
    """Admissible numeric set of one comparator/bound pair."""

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and (self.lo_open or self.hi_open)

    def intersect(self, other: "Interval") -> "Interval":
        # larger lower bound wins, open beating closed at a tie
        if (other.lo, other.lo_open) > (self.lo, self.lo_open):
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open
        # smaller upper bound wins, open beating closed at a tie
        if (other.hi, not other.hi_open) < (self.hi, not self.hi_open):
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open
        return Interval(lo, hi, lo_open, hi_open)

    def __str__(self) -> str:
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        lo = "-inf" if self.lo == -math.inf else f"{self.lo:g}"
        hi = "inf" if self.hi == math.inf else f"{self.hi:g}"
        return f"{left}{lo}, {hi}{right}"


def interval_of(body: RequirementBody) -> Interval:
    cmp, bound = body.comparator, body.bound
    if cmp == "in":
        lo, hi = bound  # type: ignore[misc]
        return Interval(float(lo), float(hi))
    b = float(bound)  # type: ignore[arg-type]
    if cmp == "<=":
        return Interval(-math.inf, b)
    if cmp == "<":
        return Interval(-math.inf, b, hi_open=True)
    if cmp == ">=":
        return Interval(b, math.inf)
    if cmp == ">":
        return Interval(b, math.inf, lo_open=True)
    if cmp == "==":
        return Interval(b, b)
    raise ValueError(f"unknown comparator {cmp!r}")


@dataclass(frozen=True)
class ConflictGroup:
    block: str
    attribute: str
    unit: str | None
    requirements: tuple[tuple[str, Origin, Interval], ...]  # (owner, origin, set)


@dataclass(frozen=True)
class TraceReport:
    unallocated: tuple[str, ...]
    unconstrained: tuple[str, ...]
    conflict_groups: tuple[ConflictGroup, ...]
    goal_coverage: dict[str, tuple[str, ...]]


def effective_requirements(
    model: Model, block: str, *, include_inherited: bool = True
) -> list[tuple[RequirementBody, Origin]]:
    """Direct, allocated, and (optionally) containment-inherited requirements.

    Order is deterministic: direct bodies in declaration order, then one
    batch per allocation edge in edge order, then the ancestors' own
    effective lists, nearest ancestor first.
    """
    if block not in model.elements:
        raise UnknownElementError(block)
    return _effective(model, block, include_inherited, frozenset())


def _effective(
    model: Model, block: str, include_inherited: bool, seen: frozenset[str]
) -> list[tuple[RequirementBody, Origin]]:
    out: list[tuple[RequirementBody, Origin]] = []
    for body in model.requirement_bodies:
        if body.target == block:
            out.append((body, Origin("direct")))
    for rel in model.relations:
        if rel.kind is RelationKind.ALLOCATE and rel.targets[0] == block:
            feature = rel.source
            for body in model.requirement_bodies:
                if body.target == feature:
                    out.append((body, Origin("allocation", via=feature)))
    if include_inherited:
        seen = seen | {block}
        for rel in model.relations:
            if rel.kind is RelationKind.CONTAINS and rel.targets[0] == block:
                parent = rel.source
                if parent in seen or parent not in model.elements:
                    continue
                for body, _origin in _effective(model, parent, True, seen):
                    out.append((body, Origin("inherited", via=parent)))
    return out


def find_conflicts(model: Model) -> list[ConflictGroup]:
    """Empty-intersection groups per (block, attribute, unit).

    Requirements without a checkable attribute triple are skipped
    (already flagged W-204); different units are never compared.
    """
    groups: list[ConflictGroup] = []
    for block in model.elements.values():
        if block.kind is not ElementKind.BLOCK:
            continue
        buckets: dict[tuple[str, str | None], list] = {}
        for body, origin in effective_requirements(model, block.id):
            if not body.machine_checkable:
                continue
            key = (body.attribute, body.unit)
            buckets.setdefault(key, []).append((body, origin))
        for (attribute, unit), entries in sorted(
            buckets.items(), key=lambda kv: (kv[0][0], kv[0][1] or "")
        ):
            if len(entries) < 2:
                continue
            common = Interval(-math.inf, math.inf)
            for body, _ in entries:
                common = common.intersect(interval_of(body))
            if common.empty:
                groups.append(
                    ConflictGroup(
                        block.id,
                        attribute,
                        unit,
                        tuple(
                            (body.owner, origin, interval_of(body))
                            for body, origin in entries
                        ),
                    )
                )
    return groups


def _unit_mismatches(model: Model) -> list[Diagnostic]:
    diags = []
    for block in model.elements.values():
        if block.kind is not ElementKind.BLOCK:
            continue
        by_attr: dict[str, dict[str | None, list[str]]] = {}
        for body, _ in effective_requirements(model, block.id):
            if not body.machine_checkable:
                continue
            by_attr.setdefault(body.attribute, {}).setdefault(
                body.unit, []
            ).append(body.owner)
        for attribute in sorted(by_attr):
            units = by_attr[attribute]
            if len(units) > 1:
                owners = sorted(o for lst in units.values() for o in lst)
                unit_names = ", ".join(
                    sorted(u if u is not None else "(none)" for u in units)
                )
                diags.append(
                    make(
                        "I-301",
                        f"unit mismatch on attribute {attribute!r} of block "
                        f"{block.id!r} ({unit_names}), not compared",
                        [block.id, *owners],
                        model.span_of(block.id),
                    )
                )
    return diags


def conflict_diagnostics(model: Model) -> list[Diagnostic]:
    """C-301 per conflict group plus I-301 unit-mismatch notes."""
    diags = []
    for group in find_conflicts(model):
        owners = [owner for owner, _, _ in group.requirements]
        unit = f" {group.unit}" if group.unit else ""
        diags.append(
            make(
                "C-301",
                f"requirements on attribute {group.attribute!r}{unit} of block "
                f"{group.block!r} admit no common value: "
                + "; ".join(
                    f"{owner} {origin.describe()} {interval}"
                    for owner, origin, interval in group.requirements
                ),
                [group.block, *owners],
                model.span_of(group.block),
            )
        )
    diags.extend(_unit_mismatches(model))
    return sort_diagnostics(diags)


# Edges whose target meaning can change when the source changes.
def _impact_edges(model: Model) -> dict[str, list[str]]:
    adjacency: dict[str, list[str]] = {}

    def add(a: str, b: str) -> None:
        adjacency.setdefault(a, []).append(b)

    for rel in model.relations:
        if rel.kind in TREE_KINDS:
            for t in rel.targets:
                add(rel.source, t)
        elif rel.kind is RelationKind.REFINES_GOAL:
            add(rel.targets[0], rel.source)  # goal -> refining feature
        elif rel.kind is RelationKind.ALLOCATE:
            add(rel.source, rel.targets[0])
        elif rel.kind is RelationKind.CONSTRAINS:
            add(rel.targets[0], rel.source)  # target -> requirement
        elif rel.kind is RelationKind.CONTAINS:
            add(rel.source, rel.targets[0])
        elif rel.kind is RelationKind.KB_REF:
            add(rel.source, rel.targets[0])
    return adjacency


def impact(model: Model, element_id: str) -> set[str]:
    """Everything transitively downstream of the id, the id excluded."""
    if element_id not in model.elements:
        raise UnknownElementError(element_id)
    adjacency = _impact_edges(model)
    seen = {element_id}
    frontier = [element_id]
    while frontier:
        current = frontier.pop()
        for nxt in adjacency.get(current, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    seen.discard(element_id)
    return seen


def coverage_report(model: Model) -> TraceReport:
    unallocated = sorted(
        e.id
        for e in model.elements.values()
        if e.kind in (ElementKind.FEATURE, ElementKind.FUNCTION)
        and not any(
            rel.kind is RelationKind.ALLOCATE and rel.source == e.id
            for rel in model.relations
        )
    )
    unconstrained = sorted(
        e.id
        for e in model.elements.values()
        if e.kind is ElementKind.BLOCK
        and not effective_requirements(model, e.id)
    )
    goal_coverage: dict[str, tuple[str, ...]] = {}
    for goal in sorted(
        e.id for e in model.elements.values() if e.kind is ElementKind.GOAL
    ):
        refiners = sorted(
            rel.source
            for rel in model.relations
            if rel.kind is RelationKind.REFINES_GOAL and rel.targets[0] == goal
        )
        goal_coverage[goal] = tuple(refiners)
    groups = sorted(
        find_conflicts(model), key=lambda g: (g.block, g.attribute, g.unit or "")
    )
    return TraceReport(
        tuple(unallocated), tuple(unconstrained), tuple(groups), goal_coverage
    )


def report_to_text(report: TraceReport) -> str:
    """Human-readable coverage table."""
    lines = ["trace report", "============"]
    lines.append("unallocated features/functions:")
    for i in report.unallocated or ("(none)",):
        lines.append(f"  {i}")
    lines.append("blocks without requirements:")
    for i in report.unconstrained or ("(none)",):
        lines.append(f"  {i}")
    lines.append("requirement conflicts:")
    if not report.conflict_groups:
        lines.append("  (none)")
    for g in report.conflict_groups:
        unit = f" [{g.unit}]" if g.unit else ""
        lines.append(f"  {g.block}.{g.attribute}{unit}:")
        for owner, origin, interval in g.requirements:
            lines.append(f"    {owner} ({origin.describe()}) {interval}")
    lines.append("goal coverage:")
    if not report.goal_coverage:
        lines.append("  (none)")
    for goal, refiners in report.goal_coverage.items():
        covered = " ".join(refiners) if refiners else "(uncovered)"
        lines.append(f"  {goal}: {covered}")
    return "\n".join(lines) + "\n"


def report_to_records(report: TraceReport) -> str:
    """Line-delimited machine-readable form of the coverage report."""
    records: list[str] = []
    for i in report.unallocated:
        records.append(json.dumps({"record": "unallocated", "element": i}))
    for i in report.unconstrained:
        records.append(json.dumps({"record": "unconstrained", "element": i}))
    for g in report.conflict_groups:
        records.append(
            json.dumps(
                {
                    "record": "conflict",
                    "block": g.block,
                    "attribute": g.attribute,
                    "unit": g.unit,
                    "requirements": [
                        {
                            "owner": owner,
                            "origin": origin.kind,
                            "via": origin.via,
                            "interval": str(interval),
                        }
                        for owner, origin, interval in g.requirements
                    ],
                }
            )
        )
    for goal, refiners in report.goal_coverage.items():
        records.append(
            json.dumps(
                {"record": "goal", "goal": goal, "refined_by": list(refiners)}
            )
        )
    return "\n".join(records) + ("\n" if records else "")
