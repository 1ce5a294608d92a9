from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"
GOLDEN = FIXTURES / "golden"

sys.path.insert(0, str(TESTS_DIR))

import imog  # noqa: E402


def parse_fixture(name: str):
    """Parse a fixture with its bare name, keeping spans path-independent."""
    source = (FIXTURES / name).read_text(encoding="utf-8")
    return imog.parse(source, name)


@pytest.fixture(scope="session")
def escooter():
    result = parse_fixture("escooter.imog")
    assert result.ok, [d.message for d in result.diagnostics]
    return result.model


@pytest.fixture(scope="session")
def conflict_model():
    result = parse_fixture("conflict.imog")
    assert result.ok
    return result.model


@pytest.fixture(scope="session")
def conflicts_two_model():
    result = parse_fixture("conflicts_two.imog")
    assert result.ok
    return result.model


@pytest.fixture()
def kb_store(tmp_path):
    """Writable copy of the seeded store."""
    store = tmp_path / "kb.imogkb"
    store.write_text((FIXTURES / "kb.imogkb").read_text(encoding="utf-8"))
    return store


def golden_text(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")
