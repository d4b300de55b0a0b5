"""Level model: a labeled directed graph with typed scalar properties.

A level is a set of uniquely identified nodes carrying single-valued,
typed properties, connected by dependency edges. A *direct* edge mirrors
parent changes onto the child (a container and its components); an
*indirect* edge records a reference without mirroring (a script and the
assets it instantiates). One designated root must reach every node.

Graphs are immutable after construction and safe to share across
threads. The constructor is deliberately permissive: cyclic or
disconnected graphs can be represented so that intermediate merge
states round-trip. `validate` reports every invariant violation as
data rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping


class SceneMergeError(Exception):
    """Base class for all errors raised by this package."""


class UnknownNodeError(SceneMergeError, KeyError):
    """A node id was queried that does not exist in the graph."""

    def __init__(self, node_id: str):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self) -> str:
        return f"unknown node id: {self.node_id!r}"


class DepKind(Enum):
    """Dependency label of an edge."""

    DIRECT = "direct"
    INDIRECT = "indirect"


_VALUE_KINDS = ("bool", "int", "real", "text", "ref", "asset")


@dataclass(frozen=True)
class PropertyValue:
    """A tagged scalar value.

    Kinds: ``bool``, ``int``, ``real`` (finite 64-bit float), ``text``,
    ``ref`` (node reference), ``asset`` (asset reference). Exactly one
    kind is active; ``bool``/``int``/``real`` never compare equal across
    kinds even when Python's numeric coercion would say otherwise.
    """

    kind: str
    value: bool | int | float | str

    def __post_init__(self) -> None:
        kind, value = self.kind, self.value
        if kind == "bool":
            ok = type(value) is bool
        elif kind == "int":
            ok = type(value) is int
        elif kind == "real":
            if type(value) is int:
                object.__setattr__(self, "value", float(value))
                value = self.value
            ok = type(value) is float and math.isfinite(value)
            # normalize -0.0 so graph equality implies byte equality
            if ok and value == 0.0:
                object.__setattr__(self, "value", 0.0)
        elif kind in ("text", "ref", "asset"):
            ok = isinstance(value, str) and (kind == "text" or value != "")
        else:
            raise ValueError(f"unknown property kind {kind!r}")
        if not ok:
            raise ValueError(f"invalid {kind} property value: {value!r}")

    @staticmethod
    def boolean(value: bool) -> "PropertyValue":
        return PropertyValue("bool", value)

    @staticmethod
    def integer(value: int) -> "PropertyValue":
        return PropertyValue("int", value)

    @staticmethod
    def real(value: float) -> "PropertyValue":
        return PropertyValue("real", value)

    @staticmethod
    def text(value: str) -> "PropertyValue":
        return PropertyValue("text", value)

    @staticmethod
    def node_ref(target: str) -> "PropertyValue":
        return PropertyValue("ref", target)

    @staticmethod
    def asset_ref(asset_id: str) -> "PropertyValue":
        return PropertyValue("asset", asset_id)


@dataclass(frozen=True)
class Node:
    """A level entity: unique id, free-form kind label, scalar properties.

    The id is the identity used by diffing; it must stay stable across
    versions of the same logical entity. The kind label is immutable
    across versions (a kind change has no 3-way meaning and is rejected
    when the versions meet).
    """

    id: str
    kind: str
    properties: Mapping[str, PropertyValue] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("node id must be non-empty")
        if not self.kind:
            raise ValueError("node kind must be non-empty")


@dataclass(frozen=True)
class Edge:
    """A dependency edge from parent to child."""

    parent: str
    child: str
    kind: DepKind

    def sort_key(self) -> tuple[str, str]:
        return (self.parent, self.child)


class LevelGraph:
    """An immutable level graph plus its asset manifest.

    ``nodes`` maps id to Node, ``edges`` holds at most one edge per
    ordered (parent, child) pair, and ``assets`` maps asset id to
    content digest. Equality is structural and independent of
    construction order.
    """

    __slots__ = ("root", "_nodes", "_edges", "_out", "_in", "assets", "_heights")

    def __init__(
        self,
        root: str,
        nodes: Iterable[Node],
        edges: Iterable[Edge] = (),
        assets: Mapping[str, str] | None = None,
    ):
        self.root = root
        self._nodes: dict[str, Node] = {}
        for node in sorted(nodes, key=lambda n: n.id):
            if node.id in self._nodes:
                raise ValueError(f"duplicate node id {node.id!r}")
            self._nodes[node.id] = node
        self._edges: dict[tuple[str, str], DepKind] = {}
        self._out: dict[str, list[tuple[str, DepKind]]] = {}
        self._in: dict[str, list[tuple[str, DepKind]]] = {}
        for edge in sorted(edges, key=Edge.sort_key):
            key = (edge.parent, edge.child)
            if key in self._edges:
                raise ValueError(f"duplicate edge {edge.parent!r} -> {edge.child!r}")
            self._edges[key] = edge.kind
            self._out.setdefault(edge.parent, []).append((edge.child, edge.kind))
            self._in.setdefault(edge.child, []).append((edge.parent, edge.kind))
        self.assets: dict[str, str] = dict(sorted(assets.items())) if assets else {}
        self._heights: dict[str, int] | None = None

    # -- queries ---------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def node_ids(self) -> list[str]:
        return list(self._nodes)

    def nodes(self) -> Iterator[Node]:
        return iter(self._nodes.values())

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def edges(self) -> list[Edge]:
        return [Edge(p, c, k) for (p, c), k in self._edges.items()]

    def edge_kind(self, parent: str, child: str) -> DepKind | None:
        return self._edges.get((parent, child))

    def children(self, node_id: str) -> list[tuple[str, DepKind]]:
        return self._out.get(node_id, [])

    def parents(self, node_id: str) -> list[tuple[str, DepKind]]:
        return self._in.get(node_id, [])

    def direct_parent(self, node_id: str) -> str | None:
        """The unique Direct parent, or None. Smallest id wins if the
        graph (illegally) has several; determinism matters more here
        than punishing an invalid input."""
        best = None
        for parent, kind in self._in.get(node_id, []):
            if kind is DepKind.DIRECT and (best is None or parent < best):
                best = parent
        return best

    def replace_assets(self, assets: Mapping[str, str]) -> "LevelGraph":
        return LevelGraph(self.root, self._nodes.values(), self.edges(), assets)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LevelGraph):
            return NotImplemented
        return (
            self.root == other.root
            and self._nodes == other._nodes
            and self._edges == other._edges
            and self.assets == other.assets
        )

    def __hash__(self) -> int:  # structural containers are unhashable
        raise TypeError("LevelGraph is not hashable")

    def __repr__(self) -> str:
        return (
            f"LevelGraph(root={self.root!r}, nodes={self.node_count}, "
            f"edges={self.edge_count})"
        )


# -- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """One violated invariant, naming the offending entities."""

    code: str
    message: str
    subjects: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def validate(graph: LevelGraph) -> ValidationReport:
    """Report every violated graph invariant; an empty report means valid.

    Checked: the root exists and has no incoming edges, edges end on
    existing nodes, the graph is acyclic, every node is reachable from
    the root, no node has two Direct parents, node references resolve,
    and asset references appear in the manifest.
    """
    violations: list[Violation] = []

    if not graph.has_node(graph.root):
        violations.append(
            Violation("missing-root", f"root node {graph.root!r} is not in the graph", (graph.root,))
        )

    for edge in graph.edges():
        missing = [e for e in (edge.parent, edge.child) if not graph.has_node(e)]
        if missing:
            violations.append(
                Violation(
                    "dangling-edge",
                    f"edge {edge.parent!r} -> {edge.child!r} references missing node(s) "
                    + ", ".join(repr(m) for m in missing),
                    (edge.parent, edge.child),
                )
            )

    def successors(node_id: str) -> list[str]:
        return [c for c, _ in graph.children(node_id) if graph.has_node(c)]

    for comp in strongly_connected_components(graph.node_ids(), successors):
        is_cycle = len(comp) > 1 or graph.edge_kind(comp[0], comp[0]) is not None
        if is_cycle:
            members = sorted(comp)
            violations.append(
                Violation(
                    "cycle",
                    "cycle through " + ", ".join(repr(m) for m in members),
                    tuple(members),
                )
            )

    if graph.has_node(graph.root):
        reached = reachable_from(graph, graph.root)
        for node_id in graph.node_ids():
            if node_id not in reached:
                violations.append(
                    Violation(
                        "unreachable",
                        f"node {node_id!r} is not reachable from the root",
                        (node_id,),
                    )
                )

    for parent, _ in graph.parents(graph.root):
        violations.append(
            Violation(
                "root-in-edge",
                f"root has an incoming edge from {parent!r}",
                (parent, graph.root),
            )
        )

    for node_id in graph.node_ids():
        direct_parents = sorted(p for p, k in graph.parents(node_id) if k is DepKind.DIRECT)
        if len(direct_parents) > 1:
            violations.append(
                Violation(
                    "multiple-direct-parents",
                    f"node {node_id!r} has {len(direct_parents)} Direct parents: "
                    + ", ".join(repr(p) for p in direct_parents),
                    (node_id, *direct_parents),
                )
            )

    for node in graph.nodes():
        for key in sorted(node.properties):
            value = node.properties[key]
            if value.kind == "ref" and not graph.has_node(str(value.value)):
                violations.append(
                    Violation(
                        "bad-ref",
                        f"property {key!r} of node {node.id!r} references missing node {value.value!r}",
                        (node.id, key, str(value.value)),
                    )
                )
            elif value.kind == "asset" and str(value.value) not in graph.assets:
                violations.append(
                    Violation(
                        "unmanifested-asset",
                        f"property {key!r} of node {node.id!r} references asset "
                        f"{value.value!r} absent from the manifest",
                        (node.id, key, str(value.value)),
                    )
                )

    return ValidationReport(tuple(violations))


# -- structural queries ------------------------------------------------------


def height(graph: LevelGraph, node_id: str) -> int:
    """Length of the longest directed path from the root to the node.

    Computed on the condensation, so members of a cycle share their
    component's height and the value is defined even mid-repair.
    Nodes unreachable from the root get height 0.
    """
    if not graph.has_node(node_id):
        raise UnknownNodeError(node_id)
    if graph._heights is None:
        def successors(nid: str) -> list[str]:
            return [c for c, _ in graph.children(nid) if graph.has_node(c)]

        graph._heights = component_heights(graph.node_ids(), successors, graph.root)
    return graph._heights[node_id]


def direct_subtree(graph: LevelGraph, node_id: str) -> set[str]:
    """All nodes reachable from ``node_id`` via Direct edges, including itself."""
    if not graph.has_node(node_id):
        raise UnknownNodeError(node_id)
    seen = {node_id}
    frontier = [node_id]
    while frontier:
        current = frontier.pop()
        for child, kind in graph.children(current):
            if kind is DepKind.DIRECT and child not in seen and graph.has_node(child):
                seen.add(child)
                frontier.append(child)
    return seen


def reachable_from(graph: LevelGraph, node_id: str) -> set[str]:
    """All nodes reachable from ``node_id`` over edges of either kind."""
    seen = {node_id}
    frontier = [node_id]
    while frontier:
        current = frontier.pop()
        for child, _ in graph.children(current):
            if child not in seen and graph.has_node(child):
                seen.add(child)
                frontier.append(child)
    return seen


def strongly_connected_components(
    vertices: Iterable[str], successors: Callable[[str], Iterable[str]]
) -> list[list[str]]:
    """Iterative Tarjan SCC; components come out in reverse topological order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[list[str]] = []
    counter = 0

    for start in vertices:
        if start in index:
            continue
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        work: list[tuple[str, Iterator[str]]] = [(start, iter(successors(start)))]
        while work:
            v, it = work[-1]
            descended = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    descended = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                components.append(component)
    return components


def component_heights(
    vertices: Iterable[str],
    successors: Callable[[str], Iterable[str]],
    root: str,
) -> dict[str, int]:
    """Longest-path distance from the root on the condensation.

    Components unreachable from the root's component get height 0; all
    members of a component share its height.
    """
    vertex_list = list(vertices)
    components = strongly_connected_components(vertex_list, successors)
    comp_of: dict[str, int] = {}
    for i, comp in enumerate(components):
        for v in comp:
            comp_of[v] = i

    comp_succ: list[set[int]] = [set() for _ in components]
    for v in vertex_list:
        cv = comp_of[v]
        for w in successors(v):
            if w in comp_of and comp_of[w] != cv:
                comp_succ[cv].add(comp_of[w])

    heights: list[int | None] = [None] * len(components)
    if root in comp_of:
        heights[comp_of[root]] = 0
    # Tarjan emits components in reverse topological order
    for ci in reversed(range(len(components))):
        h = heights[ci]
        if h is None:
            continue
        for cj in comp_succ[ci]:
            if heights[cj] is None or heights[cj] < h + 1:
                heights[cj] = h + 1
    return {v: heights[comp_of[v]] or 0 for v in vertex_list}
