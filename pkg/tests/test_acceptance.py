"""Acceptance suite: one test per criterion, exact tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one verdict line
per criterion.
"""

from __future__ import annotations

import io
import random

import dotcheck
import imog
from conftest import FIXTURES, parse_fixture
from genmodels import feature_model_text, full_model_text
from imog import knowledge, structurally_equal, trace, variability, views
from imog.cli import run as cli_run
from imog.diagnostics import Severity
from imog.knowledge import KnowledgeEntry
from imog.model import (
    AbstractionLevel as L,
    Element,
    ElementKind,
    Model,
    Perspective as P,
    Property,
    Relation,
    RelationKind,
)
from imog.resolve import check_model, resolve
from oracle import BruteForce, canonical_order

FIXTURE_NAMES = (
    "escooter.imog",
    "conflict.imog",
    "conflicts_two.imog",
    "kbref_late.imog",
)


def _verdict(number: int, text: str) -> None:
    print(f"\nACCEPTANCE {number} PASS: {text}")


def _models():
    return {name: parse_fixture(name).model for name in FIXTURE_NAMES}


def test_criterion_1_fixture_fidelity(escooter):
    root = escooter.lookup("F_root")
    assert root.name == "Providing mobility with an e-scooter"

    context_blocks = {
        e.id: e.name
        for e in escooter.elements.values()
        if e.kind is ElementKind.BLOCK and e.level is L.CONTEXT
    }
    assert context_blocks == {
        "B_escooter": "E-scooter",
        "B_driver": "Driver",
        "B_roadway": "Roadway",
    }
    for block in context_blocks:
        variants = [
            r
            for r in escooter.relations
            if r.kind is RelationKind.REFERENCES and r.source == block
        ]
        assert len(variants) == 2, block
    effects = [
        r.label for r in escooter.relations if r.kind is RelationKind.EFFECT
    ]
    assert effects == ["Incoming Forces", "weight"]

    diags = check_model(escooter)
    assert not [d for d in diags if d.severity is Severity.ERROR]
    _verdict(1, "e-scooter fixture reproduces the named content, check has 0 errors")


def test_criterion_2_parser_roundtrip_500_models():
    rng = random.Random(20260810)
    for i in range(500):
        text = full_model_text(rng, max_elements=30)
        result = imog.parse(text, f"rt{i}.imog")
        assert result.ok, (i, [d.message for d in result.diagnostics])
        model = result.model
        printed = imog.print_model(model)
        reparsed = imog.parse(printed, "printed.imog")
        assert reparsed.ok, (i, [d.message for d in reparsed.diagnostics])
        assert structurally_equal(model, reparsed.model), i
        assert imog.print_model(reparsed.model) == printed, i
    _verdict(2, "500 generated models round-trip exactly; print is idempotent")


def test_criterion_3_variability_oracle_equivalence():
    rng = random.Random(20260811)
    propagate_budget = 40  # single-decision sweeps on the first N models
    for i in range(200):
        model = imog.parse(feature_model_text(rng, 15), f"fm{i}.imog").model
        oracle = BruteForce(model)
        assert variability.count_configurations(model) == oracle.count(), i
        enum = variability.enumerate_configurations(model)
        assert [c.sorted_ids() for c in enum] == canonical_order(
            oracle.all_valid()
        ), i
        assert variability.dead_features(model) == oracle.dead(), i
        decisions_sets = [{}]
        if i < propagate_budget:
            ids = sorted(oracle.ids)
            decisions_sets += [{x: True} for x in ids]
            decisions_sets += [{x: False} for x in ids]
        for decisions in decisions_sets:
            state = variability.propagate(model, decisions)
            forced_in, forced_out, satisfiable = oracle.forced(decisions)
            if not satisfiable:
                assert state.conflict is not None, (i, decisions)
            else:
                assert state.conflict is None, (i, decisions, state.conflict)
                assert set(state.forced_in) == forced_in, (i, decisions)
                assert set(state.forced_out) == forced_out, (i, decisions)
    _verdict(
        3,
        "count/enumerate/dead/propagate match the brute-force interpreter "
        "on 200 generated feature models",
    )


def test_criterion_4_analytic_counts():
    cases = {
        'feature R "r" { optional A optional B } feature A "a" feature B "b"': 4,
        'feature R "r" { alternative VP "p" { A B C } } '
        'feature A "a" feature B "b" feature C "c"': 3,
        'feature R "r" { mandatory M } feature M "m"': 1,
        'feature R "r" { orgroup [1..2] { A B } } feature A "a" feature B "b"': 3,
    }
    for body, expected in cases.items():
        model = imog.parse(f'model "M" {{ functional {{ {body} }} }}').model
        assert variability.count_configurations(model) == expected, body
    _verdict(4, "analytic configuration counts are exact (4, 3, 1, 3)")


def test_criterion_5_consistency_obligation(conflict_model):
    groups = trace.find_conflicts(conflict_model)
    assert len(groups) == 1
    assert groups[0].block == "B_mount"
    text = (FIXTURES / "conflict.imog").read_text(encoding="utf-8")
    for owner in ("R_light", "R_sturdy"):
        line = next(
            l for l in text.splitlines() if f"requirement {owner}" in l
        )
        reduced = imog.parse(text.replace(line + "\n", ""), "reduced.imog").model
        assert reduced is not None
        assert trace.find_conflicts(reduced) == []
    _verdict(
        5,
        "allocation carries the feature requirement onto the contradicting "
        "block: exactly one conflict group, zero after removing either side",
    )


_ILLEGAL_EDGES = {
    "refines_goal": 'model "M" { functional { feature F "f" { refines_goal G } feature G "g" } }',
    "constrains": 'model "M" { strategy { goal G "g" } quality { requirement R "r" on G } }',
    "allocate": 'model "M" { functional { feature F2 "a" { optional F3 } feature F3 "b" } structural { allocate F2 -> F3 } }',
    "kbref": 'model "M" { functional { feature F "f" } structural { block B "b" level system { kbref F } } }',
    "effect": 'model "M" { functional { feature F "f" } structural { block B "b" level system effect F -> B "e" } }',
    "channel": 'model "M" { functional { feature F "f" } structural { block B "b" level system channel F <-> B "c" } }',
    "contains": 'model "M" { functional { feature F "f" } structural { block B "b" level system contains B { F } } }',
    "tree": 'model "M" { functional { feature F "f" { mandatory B } } structural { block B "b" level system } }',
}


def test_criterion_6_endpoint_typing(escooter):
    for label, source in _ILLEGAL_EDGES.items():
        model = imog.parse(source, f"{label}.imog").model
        assert model is not None, label
        diags = resolve(model)
        assert [d.code for d in diags] == ["R-102"], label
    references_model = Model(
        name="M",
        elements={
            "F": Element("F", ElementKind.FEATURE, "f"),
            "G": Element("G", ElementKind.GOAL, "g"),
        },
        relations=(Relation(RelationKind.REFERENCES, "F", ("G",)),),
    )
    assert all(d.code == "R-102" for d in resolve(references_model))
    for name, model in _models().items():
        assert not [d for d in resolve(model) if d.code == "R-102"], name
    _verdict(
        6,
        "each illegal edge-kind fixture yields exactly its R-102; "
        "legal fixtures yield none",
    )


def test_criterion_7_filter_laws():
    all_l, all_p = set(L), set(P)
    for name, model in _models().items():
        assert structurally_equal(model, views.filter_view(model, all_l, all_p))
        once = views.filter_view(model, {L.SYSTEM}, {P.STRUCTURAL, P.QUALITY})
        twice = views.filter_view(once, {L.SYSTEM}, {P.STRUCTURAL, P.QUALITY})
        assert structurally_equal(once, twice), name
        a_l, b_l = {L.CONTEXT, L.SYSTEM}, {L.SYSTEM, L.COMPONENT}
        a_p = {P.FUNCTIONAL, P.STRUCTURAL, P.QUALITY}
        b_p = {P.STRUCTURAL, P.QUALITY, P.KNOWLEDGE}
        nested = views.filter_view(views.filter_view(model, a_l, a_p), b_l, b_p)
        direct = views.filter_view(model, a_l & b_l, a_p & b_p)
        assert structurally_equal(nested, direct), name
        leveled = {e.id for e in model.elements.values() if e.level is not None}
        seen: list[str] = []
        for level in L:
            view = views.filter_view(model, {level}, all_p)
            seen.extend(i for i in view.elements if i in leveled)
        assert sorted(seen) == sorted(leveled), name
    _verdict(7, "filter idempotence, intersection law and level partition hold")


def test_criterion_8_knowledge_roundtrip(tmp_path):
    rng = random.Random(20260812)
    entries = []
    for i in range(100):
        props = []
        if rng.random() < 0.5:
            props.append(Property("grade", rng.randint(1, 5)))
        if rng.random() < 0.3:
            props.append(Property("note", f"text {i} with spaces"))
        entries.append(
            KnowledgeEntry(
                f"K{i:03d}",
                f"Entry number {i}",
                rng.choice(("sensor", "technology", "regulation")),
                rng.randint(2000, 2040),
                tuple(props),
                ("generated", "2026-01-01T00:00:00Z"),
            )
        )
    store = tmp_path / "gen.imogkb"
    assert knowledge.save(store, entries) == 100
    loaded = knowledge.load(store)
    assert loaded == sorted(entries, key=lambda e: e.id)
    for type_filter in (None, "sensor", "technology"):
        for max_year in (None, 2010, 2025, 2040):
            got = knowledge.query(store, type=type_filter, max_year=max_year)
            want = [
                e
                for e in sorted(entries, key=lambda e: e.id)
                if (type_filter is None or e.type == type_filter)
                and (max_year is None or e.year_available <= max_year)
            ]
            assert got == want
    _verdict(8, "100 entries round-trip exactly; query matches the linear scan")


def test_criterion_9_exports(escooter):
    for name, model in _models().items():
        dotcheck.check(views.export_graph(model))
    table = views.export_requirements_table(escooter)
    parsed = views.parse_requirements_table(table)
    reexport = views.export_requirements_table(
        Model(
            name=escooter.name,
            elements=escooter.elements,
            relations=escooter.relations,
            requirement_bodies=tuple(parsed),
            spans={},
        )
    )
    assert reexport == table
    scaffold = views.roadmap_scaffold(escooter)
    headings = [l for l in scaffold.splitlines() if l.startswith("## ")]
    assert len(headings) == 7
    assert headings[0].endswith("Innovation Identification")
    assert headings[3].endswith("Solution Space Exploration")
    assert headings[6].endswith("Maintain and Update")
    section4 = scaffold.split("## 4. ")[1].split("## 5.")[0]
    assert "Leader: System Architect" in section4
    _verdict(
        9,
        "graph exports pass the grammar checker, the requirements table "
        "round-trips, the scaffold has 7 ordered sections with the right leader",
    )


def test_criterion_10_cli_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1750000000")
    store = tmp_path / "kb.imogkb"
    escooter = str(FIXTURES / "escooter.imog")
    conflict = str(FIXTURES / "conflict.imog")
    late = str(FIXTURES / "kbref_late.imog")
    commands = [
        ["check", escooter],
        ["check", escooter, "--format", "records"],
        ["check", conflict],
        ["check", str(FIXTURES / "conflicts_two.imog")],
        ["vars", escooter, "--count"],
        ["vars", escooter, "--enumerate", "5"],
        ["vars", escooter, "--dead"],
        ["vars", escooter, "--select", "F_swap=in"],
        ["trace", escooter, "--coverage"],
        ["trace", escooter, "--impact", "G_mobility"],
        ["trace", conflict, "--conflicts"],
        ["view", escooter, "--levels", "context", "--perspectives", "structural"],
        ["export", escooter, "--graph"],
        ["export", escooter, "--reqtable"],
        ["export", escooter, "--roadmap"],
        ["kb", "--store", str(store), "extract", escooter, "B_motor"],
        ["kb", "--store", str(store), "query", "--type", "block"],
        ["kb", "--store", str(store), "check", late],
    ]
    for argv in commands:
        runs = []
        for _ in range(2):
            out, err = io.StringIO(), io.StringIO()
            code = cli_run(argv, out, err)
            runs.append((code, out.getvalue(), err.getvalue()))
        assert runs[0] == runs[1], argv
    _verdict(10, "every CLI command is byte-identical across consecutive runs")
