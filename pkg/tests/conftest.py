from __future__ import annotations

from pathlib import Path

import pytest

from scenemerge import DepKind, Edge, LevelGraph, Node, PropertyValue

FIXTURES = Path(__file__).parent / "fixtures"

D = DepKind.DIRECT
I = DepKind.INDIRECT


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def g(root: str, nodes, edges=(), assets=None) -> LevelGraph:
    """Terse graph builder: nodes as (id, kind) or (id, kind, props)."""
    built = []
    for spec in nodes:
        if len(spec) == 2:
            built.append(Node(spec[0], spec[1]))
        else:
            built.append(Node(spec[0], spec[1], spec[2]))
    return LevelGraph(root, built, [Edge(p, c, k) for p, c, k in edges], assets)


@pytest.fixture
def chain3() -> LevelGraph:
    """root -> a -> b, all Direct."""
    return g("root", [("root", "Scene"), ("a", "GameObject"), ("b", "Transform")],
             [("root", "a", D), ("a", "b", D)])


def real(x) -> PropertyValue:
    return PropertyValue.real(x)


def text(s) -> PropertyValue:
    return PropertyValue.text(s)
