"""Three-way diff building blocks: classify one edited version against its ancestor.

Every node of ancestor-union-version receives exactly one class:
Unchanged, Added, Deleted, or Modified. A node is Modified intrinsically
when its own properties or incoming edges changed, and by propagation
when some Direct ancestor (in the edited graph, transitively) was
intrinsically modified; direct dependencies mirror parent changes onto
children, so the mirrored subtree counts as edited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .graph import (
    DepKind,
    Edge,
    LevelGraph,
    Node,
    PropertyValue,
    SceneMergeError,
    validate,
)


class GraphMismatchError(SceneMergeError):
    """The graphs being compared are not versions of the same level."""


class InvalidGraphError(SceneMergeError):
    """An input graph failed validation."""

    def __init__(self, role: str, report):
        super().__init__(f"{role} graph is invalid:\n{report}")
        self.role = role
        self.report = report


class ChangeClass(Enum):
    UNCHANGED = "unchanged"
    ADDED = "added"
    DELETED = "deleted"
    MODIFIED = "modified"


@dataclass(frozen=True)
class NodeDelta:
    """What changed on one node, anchored at that node.

    Incoming-edge changes are always recorded on the child: a new Direct
    parent as ``reparented``/``new_direct_parent`` (None means the node
    lost its Direct parent), kind flips of surviving in-edges as
    ``dep_kind_changes``, and Indirect in-edge additions or removals via
    the diff-level edge sets. A delta with no recorded change and
    ``intrinsic=False`` marks a propagated-only modification.
    """

    property_sets: Mapping[str, PropertyValue] = field(default_factory=dict)
    property_removals: frozenset[str] = frozenset()
    reparented: bool = False
    new_direct_parent: str | None = None
    dep_kind_changes: frozenset[tuple[str, DepKind]] = frozenset()
    intrinsic: bool = False


@dataclass(frozen=True)
class DiffResult:
    """Per-node classification plus the deltas needed to replay the edit."""

    ancestor: LevelGraph
    version: LevelGraph
    classes: Mapping[str, ChangeClass]
    deltas: Mapping[str, NodeDelta]
    added_edges: frozenset[Edge]
    removed_edges: frozenset[Edge]

    def nodes_in_class(self, cls: ChangeClass) -> list[str]:
        return sorted(n for n, c in self.classes.items() if c is cls)

    @property
    def added(self) -> set[str]:
        return {n for n, c in self.classes.items() if c is ChangeClass.ADDED}

    @property
    def deleted(self) -> set[str]:
        return {n for n, c in self.classes.items() if c is ChangeClass.DELETED}

    @property
    def intrinsic(self) -> set[str]:
        return {
            n
            for n, c in self.classes.items()
            if c is ChangeClass.MODIFIED and self.deltas[n].intrinsic
        }


@dataclass(frozen=True)
class DiffStats:
    added: int
    deleted: int
    modified_intrinsic: int
    modified_propagated: int

    @property
    def total_edited(self) -> int:
        return self.added + self.deleted + self.modified_intrinsic + self.modified_propagated


@dataclass(frozen=True)
class Subgraph:
    """Nodes and edges induced by the edited nodes on a version graph."""

    nodes: Mapping[str, Node]
    edges: tuple[Edge, ...]


def check_same_level(a: LevelGraph, b: LevelGraph, role_a: str, role_b: str) -> None:
    """Reject graph pairs that cannot be versions of the same level."""
    if a.root != b.root:
        raise GraphMismatchError(
            f"root ids differ: {a.root!r} ({role_a}) vs {b.root!r} ({role_b})"
        )
    for node_id in a.node_ids():
        if b.has_node(node_id):
            ka, kb = a.node(node_id).kind, b.node(node_id).kind
            if ka != kb:
                raise GraphMismatchError(
                    f"node {node_id!r} has kind {ka!r} in {role_a} but {kb!r} in {role_b}; "
                    "a kind change must be modeled as delete plus add under a new id"
                )


def _require_valid(graph: LevelGraph, role: str) -> None:
    report = validate(graph)
    if not report.ok:
        raise InvalidGraphError(role, report)


def classify(ancestor: LevelGraph, version: LevelGraph) -> DiffResult:
    """Classify every node of ancestor-union-version against the ancestor."""
    _require_valid(ancestor, "ancestor")
    _require_valid(version, "version")
    check_same_level(ancestor, version, "ancestor", "version")

    classes: dict[str, ChangeClass] = {}
    deltas: dict[str, NodeDelta] = {}
    added_edges: set[Edge] = set()
    removed_edges: set[Edge] = set()

    ancestor_pairs = {(e.parent, e.child): e.kind for e in ancestor.edges()}
    version_pairs = {(e.parent, e.child): e.kind for e in version.edges()}
    for pair, kind in version_pairs.items():
        if pair not in ancestor_pairs:
            added_edges.add(Edge(pair[0], pair[1], kind))
    for pair, kind in ancestor_pairs.items():
        if pair not in version_pairs:
            removed_edges.add(Edge(pair[0], pair[1], kind))

    for node_id in version.node_ids():
        if not ancestor.has_node(node_id):
            classes[node_id] = ChangeClass.ADDED
            node = version.node(node_id)
            deltas[node_id] = NodeDelta(
                property_sets=dict(node.properties),
                reparented=True,
                new_direct_parent=version.direct_parent(node_id),
                intrinsic=True,
            )

    for node_id in ancestor.node_ids():
        if not version.has_node(node_id):
            classes[node_id] = ChangeClass.DELETED
            continue

        old = ancestor.node(node_id)
        new = version.node(node_id)
        sets = {
            key: value
            for key, value in new.properties.items()
            if old.properties.get(key) != value
        }
        removals = frozenset(key for key in old.properties if key not in new.properties)

        old_parent = ancestor.direct_parent(node_id)
        new_parent = version.direct_parent(node_id)
        reparented = old_parent != new_parent

        kind_changes = set()
        in_edge_change = False
        old_in = {p: k for p, k in ancestor.parents(node_id)}
        new_in = {p: k for p, k in version.parents(node_id)}
        for parent, kind in new_in.items():
            if parent not in old_in:
                in_edge_change = True
            elif old_in[parent] is not kind:
                kind_changes.add((parent, kind))
        for parent in old_in:
            # an in-edge that died with its deleted parent is cascade
            # fallout, not an edit of this node
            if parent not in new_in and version.has_node(parent):
                in_edge_change = True

        intrinsic = bool(sets or removals or reparented or kind_changes or in_edge_change)
        if intrinsic:
            classes[node_id] = ChangeClass.MODIFIED
            deltas[node_id] = NodeDelta(
                property_sets=sets,
                property_removals=removals,
                reparented=reparented,
                new_direct_parent=new_parent if reparented else None,
                dep_kind_changes=frozenset(kind_changes),
                intrinsic=True,
            )
        else:
            classes[node_id] = ChangeClass.UNCHANGED

    # Propagate along Direct edges of the edited graph: a direct parent's
    # change is mirrored onto its whole direct subtree.
    frontier = [n for n, c in classes.items() if c is ChangeClass.MODIFIED]
    seen = set(frontier)
    while frontier:
        current = frontier.pop()
        for child, kind in version.children(current):
            if kind is not DepKind.DIRECT or child in seen:
                continue
            seen.add(child)
            frontier.append(child)
            if classes.get(child) is ChangeClass.UNCHANGED:
                classes[child] = ChangeClass.MODIFIED
                deltas[child] = NodeDelta(intrinsic=False)

    return DiffResult(
        ancestor=ancestor,
        version=version,
        classes=classes,
        deltas=deltas,
        added_edges=frozenset(added_edges),
        removed_edges=frozenset(removed_edges),
    )


def induced_diff_graph(version: LevelGraph, diff: DiffResult) -> Subgraph:
    """The subgraph of ``version`` induced by its Added and Modified nodes.

    Deleted nodes are absent from the version by definition and are
    reported separately by the classification.
    """
    if diff.version != version:
        raise GraphMismatchError("diff was not produced against this version graph")
    edited = {
        n
        for n, c in diff.classes.items()
        if c in (ChangeClass.ADDED, ChangeClass.MODIFIED)
    }
    nodes = {n: version.node(n) for n in sorted(edited)}
    edges = tuple(
        e
        for e in sorted(version.edges(), key=Edge.sort_key)
        if e.parent in edited and e.child in edited
    )
    return Subgraph(nodes=nodes, edges=edges)


def diff_stats(diff: DiffResult) -> DiffStats:
    added = deleted = intrinsic = propagated = 0
    for node_id, cls in diff.classes.items():
        if cls is ChangeClass.ADDED:
            added += 1
        elif cls is ChangeClass.DELETED:
            deleted += 1
        elif cls is ChangeClass.MODIFIED:
            if diff.deltas[node_id].intrinsic:
                intrinsic += 1
            else:
                propagated += 1
    return DiffStats(added, deleted, intrinsic, propagated)
