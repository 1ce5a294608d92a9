"""Configuration semantics of the feature tree and its analyses.

A configuration (a set of selected features/functions/variation points)
is valid iff: (1) the root is selected; (2) a selected child implies its
parent; (3) a selected parent forces its mandatory children; (4) an
or-group [m..n] has between m and n selected members when its parent is
selected, none otherwise; (5) a variation point selects exactly one
alternative when selected, none otherwise; (6) requires a->b forces b
with a; (7) excludes a->b forbids selecting both.

Counting and enumeration use backtracking with pruning over ids in
sorted order. Enumeration returns configurations in canonical order,
lexicographic over the sorted tuple of selected ids (so a configuration
precedes its proper extensions); a budget guard keeps analyses at desk
scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import (
    BudgetExceededError,
    InvalidFeatureTreeError,
    UnknownElementError,
)
from .model import (
    ElementKind,
    Model,
    RelationKind,
    TREE_ELEMENT_KINDS,
    TREE_KINDS,
)

DEFAULT_BUDGET = 24


@dataclass(frozen=True)
class Configuration:
    selected: frozenset[str]

    def sorted_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.selected))


@dataclass(frozen=True)
class RuleConflict:
    rule: str
    elements: tuple[str, ...]


@dataclass(frozen=True)
class PropagationState:
    forced_in: frozenset[str]
    forced_out: frozenset[str]
    open: frozenset[str]
    conflict: RuleConflict | None = None


@dataclass(frozen=True)
class _Graph:
    nodes: tuple[str, ...]
    root: str | None
    parent_edges: tuple[tuple[str, str], ...]
    mandatory: tuple[tuple[str, str], ...]
    groups: tuple[tuple[str, tuple[str, ...], int, int], ...]  # incl. alternatives
    requires: tuple[tuple[str, str], ...]
    excludes: tuple[tuple[str, str], ...]


def _build_graph(model: Model) -> _Graph:
    nodes = tuple(
        e.id for e in model.elements.values() if e.kind in TREE_ELEMENT_KINDS
    )
    node_set = set(nodes)
    parent_edges: list[tuple[str, str]] = []
    mandatory: list[tuple[str, str]] = []
    groups: list[tuple[str, tuple[str, ...], int, int]] = []
    requires: list[tuple[str, str]] = []
    excludes: list[tuple[str, str]] = []
    for rel in model.relations:
        if rel.kind in TREE_KINDS:
            if rel.source not in node_set:
                continue
            targets = tuple(t for t in rel.targets if t in node_set)
            if not targets:
                continue
            for t in targets:
                parent_edges.append((rel.source, t))
            if rel.kind is RelationKind.MANDATORY:
                mandatory.append((rel.source, targets[0]))
            elif rel.kind is RelationKind.OR_GROUP:
                lo, hi = rel.cardinality or (1, len(targets))
                groups.append((rel.source, targets, lo, hi))
            elif rel.kind is RelationKind.ALTERNATIVE:
                groups.append((rel.source, targets, 1, 1))
        elif rel.kind is RelationKind.REQUIRES:
            if rel.source in node_set and rel.targets[0] in node_set:
                requires.append((rel.source, rel.targets[0]))
        elif rel.kind is RelationKind.EXCLUDES:
            if rel.source in node_set and rel.targets[0] in node_set:
                excludes.append((rel.source, rel.targets[0]))

    parented = {c for _, c in parent_edges}
    for child, count in _multi_parents(parent_edges).items():
        if count > 1:
            raise InvalidFeatureTreeError(
                f"{child!r} has {count} parents in the feature tree"
            )
    _reject_cycles(nodes, parent_edges)
    roots = [n for n in nodes if n not in parented]
    if len(roots) > 1:
        raise InvalidFeatureTreeError(
            f"feature tree has {len(roots)} roots: {', '.join(sorted(roots))}"
        )
    root = roots[0] if roots else None
    return _Graph(
        nodes,
        root,
        tuple(parent_edges),
        tuple(mandatory),
        tuple(groups),
        tuple(requires),
        tuple(excludes),
    )


def _multi_parents(parent_edges: list[tuple[str, str]]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for _, child in parent_edges:
        counts[child] = counts.get(child, 0) + 1
    return counts


def _reject_cycles(
    nodes: tuple[str, ...], parent_edges: list[tuple[str, str]]
) -> None:
    children: dict[str, list[str]] = {}
    for p, c in parent_edges:
        children.setdefault(p, []).append(c)
    state: dict[str, int] = {}

    def visit(node: str) -> None:
        state[node] = 1
        for child in children.get(node, ()):
            if state.get(child) == 1:
                raise InvalidFeatureTreeError(
                    f"feature tree contains a cycle through {child!r}"
                )
            if state.get(child) is None:
                visit(child)
        state[node] = 2

    for n in nodes:
        if state.get(n) is None:
            visit(n)


# --- constraint evaluation over partial assignments --------------------------


def _constraints(graph: _Graph):
    """(check, involved ids) pairs; check returns False when definitely violated."""
    cons = []
    if graph.root is not None:
        root = graph.root

        def root_check(assign, _root=root):
            return assign.get(_root) is not False

        cons.append((root_check, (root,)))
    for p, c in graph.parent_edges:

        def parent_check(assign, p=p, c=c):
            return not (assign.get(c) is True and assign.get(p) is False)

        cons.append((parent_check, (p, c)))
    for p, c in graph.mandatory:

        def mandatory_check(assign, p=p, c=c):
            return not (assign.get(p) is True and assign.get(c) is False)

        cons.append((mandatory_check, (p, c)))
    for parent, members, lo, hi in graph.groups:

        def group_check(assign, parent=parent, members=members, lo=lo, hi=hi):
            selected = undecided = 0
            for m in members:
                v = assign.get(m)
                if v is True:
                    selected += 1
                elif v is None:
                    undecided += 1
            if selected > hi:
                return False
            pv = assign.get(parent)
            if pv is True and selected + undecided < lo:
                return False
            if pv is False and selected > 0:
                return False
            return True

        cons.append((group_check, (parent, *members)))
    for a, b in graph.requires:

        def requires_check(assign, a=a, b=b):
            return not (assign.get(a) is True and assign.get(b) is False)

        cons.append((requires_check, (a, b)))
    for a, b in graph.excludes:

        def excludes_check(assign, a=a, b=b):
            return not (assign.get(a) is True and assign.get(b) is True)

        cons.append((excludes_check, (a, b)))
    return cons


def _by_node(cons, nodes):
    table: dict[str, list] = {n: [] for n in nodes}
    for check, involved in cons:
        for n in involved:
            table[n].append(check)
    return table


def _solutions(
    graph: _Graph, assumptions: Mapping[str, bool] | None = None
) -> Iterator[frozenset[str]]:
    """All valid configurations extending the assumptions, canonical order."""
    order = sorted(graph.nodes)
    cons = _constraints(graph)
    table = _by_node(cons, graph.nodes)
    assign: dict[str, bool | None] = {n: None for n in graph.nodes}
    fixed: dict[str, bool] = dict(assumptions or {})

    def ok(node: str) -> bool:
        return all(check(assign) for check in table[node])

    def walk(i: int) -> Iterator[frozenset[str]]:
        if i == len(order):
            yield frozenset(n for n, v in assign.items() if v)
            return
        node = order[i]
        choices = (fixed[node],) if node in fixed else (True, False)
        for value in choices:
            assign[node] = value
            if ok(node):
                yield from walk(i + 1)
        assign[node] = None

    yield from walk(0)


def _satisfiable(graph: _Graph, assumptions: Mapping[str, bool]) -> bool:
    for _ in _solutions(graph, assumptions):
        return True
    return False


def _guard_budget(graph: _Graph, budget: int) -> None:
    if len(graph.nodes) > budget:
        raise BudgetExceededError(budget, len(graph.nodes))


def _require_tree_node(model: Model, element_id: str) -> None:
    element = model.elements.get(element_id)
    if element is None or element.kind not in TREE_ELEMENT_KINDS:
        raise UnknownElementError(element_id)


# --- public operations --------------------------------------------------------


def count_configurations(model: Model, *, budget: int = DEFAULT_BUDGET) -> int:
    graph = _build_graph(model)
    _guard_budget(graph, budget)
    return sum(1 for _ in _solutions(graph))


def enumerate_configurations(
    model: Model, limit: int | None = None, *, budget: int = DEFAULT_BUDGET
) -> list[Configuration]:
    graph = _build_graph(model)
    _guard_budget(graph, budget)
    # canonical order compares sorted-id tuples positionally, which no
    # fixed variable order streams directly; desk-scale models make
    # materializing acceptable
    configs = list(_solutions(graph))
    configs.sort(key=lambda s: tuple(sorted(s)))
    if limit is not None:
        configs = configs[:limit]
    return [Configuration(s) for s in configs]


def dead_features(model: Model, *, budget: int = DEFAULT_BUDGET) -> set[str]:
    """Ids that appear in no valid configuration."""
    graph = _build_graph(model)
    _guard_budget(graph, budget)
    return {
        node
        for node in graph.nodes
        if not _satisfiable(graph, {node: True})
    }


def propagate(
    model: Model,
    decisions: Mapping[str, bool],
    *,
    budget: int = DEFAULT_BUDGET,
) -> PropagationState:
    """Forced consequences of a partial selection.

    Unit propagation of the semantic rules runs first; within the budget
    the result is then made exact by satisfiability-probing every open
    feature, so forced-in/forced-out match the brute-force semantics.
    Beyond the budget the (sound) unit-propagation fixpoint is returned.
    """
    graph = _build_graph(model)
    for element_id in decisions:
        _require_tree_node(model, element_id)

    value, conflict = _unit_propagation(graph, decisions)

    if conflict is None and len(graph.nodes) <= budget:
        if not _satisfiable(graph, value):
            conflict = RuleConflict(
                "unsatisfiable", tuple(sorted(decisions))
            )
        else:
            for node in sorted(graph.nodes):
                if node in value:
                    continue
                if not _satisfiable(graph, {**value, node: True}):
                    value[node] = False
                elif not _satisfiable(graph, {**value, node: False}):
                    value[node] = True

    forced_in = frozenset(n for n, v in value.items() if v)
    forced_out = frozenset(n for n, v in value.items() if not v)
    open_ids = frozenset(graph.nodes) - forced_in - forced_out
    return PropagationState(forced_in, forced_out, open_ids, conflict)


def _unit_propagation(
    graph: _Graph, decisions: Mapping[str, bool]
) -> tuple[dict[str, bool], RuleConflict | None]:
    value: dict[str, bool] = dict(decisions)
    conflict: RuleConflict | None = None

    def set_value(node: str, v: bool, rule: str, elements: tuple[str, ...]) -> bool:
        nonlocal conflict
        cur = value.get(node)
        if cur is None:
            value[node] = v
            return True
        if cur != v and conflict is None:
            conflict = RuleConflict(rule, elements)
        return False

    changed = True
    while changed and conflict is None:
        changed = False
        if graph.root is not None:
            changed |= set_value(graph.root, True, "root", (graph.root,))
        for p, c in graph.parent_edges:
            if value.get(c) is True:
                changed |= set_value(p, True, "parent", (p, c))
            if value.get(p) is False:
                changed |= set_value(c, False, "parent", (p, c))
        for p, c in graph.mandatory:
            if value.get(p) is True:
                changed |= set_value(c, True, "mandatory", (p, c))
            if value.get(c) is False:
                changed |= set_value(p, False, "mandatory", (p, c))
        for parent, members, lo, hi in graph.groups:
            rule = "alternative" if (lo, hi) == (1, 1) else "orgroup"
            ids = (parent, *members)
            selected = [m for m in members if value.get(m) is True]
            undecided = [m for m in members if value.get(m) is None]
            if len(selected) > hi:
                conflict = conflict or RuleConflict(rule, ids)
                break
            if value.get(parent) is True:
                if len(selected) + len(undecided) < lo:
                    conflict = conflict or RuleConflict(rule, ids)
                    break
                if len(selected) == hi:
                    for m in undecided:
                        changed |= set_value(m, False, rule, ids)
                elif len(selected) + len(undecided) == lo:
                    for m in undecided:
                        changed |= set_value(m, True, rule, ids)
            elif value.get(parent) is False:
                for m in members:
                    if value.get(m) is None:
                        changed |= set_value(m, False, rule, ids)
        for a, b in graph.requires:
            if value.get(a) is True:
                changed |= set_value(b, True, "requires", (a, b))
            if value.get(b) is False:
                changed |= set_value(a, False, "requires", (a, b))
        for a, b in graph.excludes:
            if value.get(a) is True:
                changed |= set_value(b, False, "excludes", (a, b))
            if value.get(b) is True:
                changed |= set_value(a, False, "excludes", (a, b))
    return value, conflict


def variant_combinations(model: Model, blocks: list[str]) -> int:
    """Product over blocks of their attached variant counts (0 counts as 1)."""
    total = 1
    for block_id in blocks:
        element = model.elements.get(block_id)
        if element is None:
            raise UnknownElementError(block_id)
        count = sum(
            1
            for rel in model.relations
            if rel.kind is RelationKind.REFERENCES
            and rel.source == block_id
            and (target := model.elements.get(rel.targets[0])) is not None
            and target.kind is ElementKind.VARIANT
        )
        total *= max(count, 1)
    return total


def format_configuration(model_name: str, config: Configuration) -> str:
    """Line record: model name, then the sorted selected ids."""
    return f"{model_name},{' '.join(config.sorted_ids())}"
