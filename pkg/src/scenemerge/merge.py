"""Three-way merge of level graphs with conflict detection and repair.

`merge3` replays both branches' edits onto the common ancestor in a
fixed phase order: additions, deletions, property/edge modifications,
conflict resolution, then structural repair (cycle breaking and
reconnection of orphans). The phase order is normative: deletions must
see concurrently added children to detect conflicts and relink
correctly, and structural repair must see the final edge set.

Conflicts are data. Under the manual policy they stay unresolved and
every conflicting item is held at its ancestor state, so the merged
graph always loads; under a branch preference the winning edit is
applied and the losing fragment is recorded as a dropped edit.

Edge merging works on two kinds of three-way cells. Each surviving
node's Direct parent is one cell (two branches assigning different
parents is a reparent conflict, because a node has at most one Direct
parent). Each (parent, child) pair's *indirect presence* is an
independent boolean cell; boolean cells cannot conflict three-way, so
indirect references merge silently. Kind flips fall out of the two
cells combined.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Union

from .diff import (
    ChangeClass,
    DiffResult,
    NodeDelta,
    check_same_level,
    classify,
    diff_stats,
)
from .graph import (
    DepKind,
    Edge,
    LevelGraph,
    Node,
    PropertyValue,
    SceneMergeError,
    component_heights,
    direct_subtree,
    strongly_connected_components,
    validate,
)
from .levelfile import format_value


class MergeInternalError(SceneMergeError):
    """The pipeline was about to emit an invalid graph; this is a bug."""


class Branch(Enum):
    A = "a"
    B = "b"

    @property
    def other(self) -> "Branch":
        return Branch.B if self is Branch.A else Branch.A


class PolicyKind(Enum):
    MANUAL = "manual"
    PREFER_A = "prefer-a"
    PREFER_B = "prefer-b"


class Resolution(Enum):
    UNRESOLVED = "unresolved"
    TOOK_A = "took-a"
    TOOK_B = "took-b"


def _took(branch: Branch) -> Resolution:
    return Resolution.TOOK_A if branch is Branch.A else Resolution.TOOK_B


@dataclass(frozen=True)
class MergePolicy:
    """How conflicts resolve, plus the opt-in numeric averaging rule.

    Averaging applies only to real-valued properties on nodes whose kind
    is listed in ``averageable_kinds``; such concurrent edits take the
    arithmetic mean instead of conflicting.
    """

    resolution: PolicyKind = PolicyKind.MANUAL
    numeric_averaging: bool = False
    averageable_kinds: frozenset[str] = frozenset()

    @property
    def winner(self) -> Branch | None:
        if self.resolution is PolicyKind.PREFER_A:
            return Branch.A
        if self.resolution is PolicyKind.PREFER_B:
            return Branch.B
        return None

    def mirrored(self) -> "MergePolicy":
        """The same policy seen with the branch arguments swapped."""
        mapping = {
            PolicyKind.PREFER_A: PolicyKind.PREFER_B,
            PolicyKind.PREFER_B: PolicyKind.PREFER_A,
            PolicyKind.MANUAL: PolicyKind.MANUAL,
        }
        return MergePolicy(mapping[self.resolution], self.numeric_averaging, self.averageable_kinds)


# -- conflicts and outcome ----------------------------------------------------


@dataclass
class PropertyConflict:
    """Both branches changed the same property to different values."""

    node: str
    key: str
    value_a: PropertyValue | None  # None = the branch removed the property
    value_b: PropertyValue | None
    ancestor_value: PropertyValue | None
    resolution: Resolution = Resolution.UNRESOLVED


@dataclass
class AddAddConflict:
    """Both branches added the same node id with different values for a key."""

    node: str
    key: str
    value_a: PropertyValue | None
    value_b: PropertyValue | None
    resolution: Resolution = Resolution.UNRESOLVED


@dataclass
class ReparentConflict:
    """The branches assign different Direct parents to one node."""

    node: str
    parent_a: str | None
    parent_b: str | None
    resolution: Resolution = Resolution.UNRESOLVED


@dataclass
class DeleteModifyConflict:
    """One branch deletes a subtree the other branch touched.

    ``subtree`` is the set of nodes the deletion covers; ``touched``
    lists the other branch's affected nodes: intrinsic modifications
    inside the subtree, added nodes anchored under it, and nodes
    reparented into it.
    """

    deleting_branch: Branch
    deleted_node: str
    subtree: tuple[str, ...]
    touched: tuple[str, ...]
    resolution: Resolution = Resolution.UNRESOLVED
    _touched_mods: tuple[str, ...] = field(default=(), repr=False)
    _anchored: tuple[str, ...] = field(default=(), repr=False)
    _reparent_ins: tuple[str, ...] = field(default=(), repr=False)
    _other_diff: DiffResult | None = field(default=None, repr=False, compare=False)
    _ancestor: LevelGraph | None = field(default=None, repr=False, compare=False)


@dataclass
class AssetConflict:
    """Both branches changed one asset's content in incompatible ways."""

    asset_id: str
    digest_a: str | None
    digest_b: str | None
    ancestor_digest: str | None
    resolution: Resolution = Resolution.UNRESOLVED


Conflict = Union[
    PropertyConflict, AddAddConflict, ReparentConflict, DeleteModifyConflict, AssetConflict
]


@dataclass(frozen=True)
class DroppedEdit:
    """A losing edit fragment discarded by automatic resolution or repair."""

    branch: Branch
    node: str | None
    description: str


@dataclass(frozen=True)
class MergeStats:
    ancestor_nodes: int
    ancestor_edges: int
    diff_a_edited: int
    diff_b_edited: int
    merged_nodes: int
    merged_edges: int
    wall_time_s: float


@dataclass
class MergeOutcome:
    merged: LevelGraph
    conflicts: list[Conflict]
    dropped: list[DroppedEdit]
    removed_cycle_edges: list[Edge]
    stats: MergeStats

    @property
    def unresolved(self) -> list[Conflict]:
        return [c for c in self.conflicts if c.resolution is Resolution.UNRESOLVED]


# -- mutable working graph ----------------------------------------------------


class _State:
    """The merge pipeline's working graph; mutation stays inside this module."""

    __slots__ = ("root", "nodes", "edges", "out_", "in_", "assets", "relinks", "owners")

    def __init__(self) -> None:
        self.root = ""
        self.nodes: dict[str, Node] = {}
        self.edges: dict[tuple[str, str], DepKind] = {}
        self.out_: dict[str, dict[str, DepKind]] = {}
        self.in_: dict[str, dict[str, DepKind]] = {}
        self.assets: dict[str, str] = {}
        self.relinks: set[tuple[str, str]] = set()
        self.owners: dict[tuple[str, str], Branch] = {}

    @classmethod
    def from_graph(cls, graph: LevelGraph) -> "_State":
        state = cls()
        state.root = graph.root
        state.nodes = {n.id: n for n in graph.nodes()}
        for edge in graph.edges():
            state._link(edge.parent, edge.child, edge.kind)
        state.assets = dict(graph.assets)
        return state

    def to_graph(self) -> LevelGraph:
        return LevelGraph(
            self.root,
            self.nodes.values(),
            [Edge(p, c, k) for (p, c), k in self.edges.items()],
            self.assets,
        )

    def _link(self, parent: str, child: str, kind: DepKind) -> None:
        self.edges[(parent, child)] = kind
        self.out_.setdefault(parent, {})[child] = kind
        self.in_.setdefault(child, {})[parent] = kind

    def set_edge(
        self,
        parent: str,
        child: str,
        kind: DepKind,
        owner: Branch | None = None,
        relink: bool = False,
    ) -> None:
        self._link(parent, child, kind)
        if owner is not None:
            self.owners[(parent, child)] = owner
        if relink:
            self.relinks.add((parent, child))

    def remove_edge(self, parent: str, child: str) -> None:
        self.edges.pop((parent, child), None)
        out = self.out_.get(parent)
        if out is not None:
            out.pop(child, None)
        in_ = self.in_.get(child)
        if in_ is not None:
            in_.pop(parent, None)
        self.relinks.discard((parent, child))
        self.owners.pop((parent, child), None)

    def remove_node(self, node_id: str) -> None:
        self.nodes.pop(node_id, None)
        for child in list(self.out_.get(node_id, ())):
            self.remove_edge(node_id, child)
        for parent in list(self.in_.get(node_id, ())):
            self.remove_edge(parent, node_id)
        self.out_.pop(node_id, None)
        self.in_.pop(node_id, None)

    def direct_parent(self, node_id: str) -> str | None:
        best = None
        for parent, kind in self.in_.get(node_id, {}).items():
            if kind is DepKind.DIRECT and (best is None or parent < best):
                best = parent
        return best

    def reachable_set(self) -> set[str]:
        seen = {self.root} if self.root in self.nodes else set()
        frontier = list(seen)
        while frontier:
            current = frontier.pop()
            for child in self.out_.get(current, ()):
                if child not in seen and child in self.nodes:
                    seen.add(child)
                    frontier.append(child)
        return seen

    def reaches_from_root(self, target: str) -> bool:
        if target == self.root:
            return target in self.nodes
        seen = {self.root}
        frontier = [self.root]
        while frontier:
            current = frontier.pop()
            for child in self.out_.get(current, ()):
                if child == target:
                    return True
                if child not in seen and child in self.nodes:
                    seen.add(child)
                    frontier.append(child)
        return False

    def grow_reachable(self, reached: set[str], start: str) -> None:
        if start in reached:
            return
        reached.add(start)
        frontier = [start]
        while frontier:
            current = frontier.pop()
            for child in self.out_.get(current, ()):
                if child not in reached and child in self.nodes:
                    reached.add(child)
                    frontier.append(child)


# -- phase 2: additions -------------------------------------------------------


def _apply_additions(state: _State, diff_a: DiffResult, diff_b: DiffResult) -> list[Conflict]:
    conflicts: list[Conflict] = []
    added_a = diff_a.added
    added_b = diff_b.added

    merged_nodes: dict[str, Node] = {}
    for node_id in sorted(added_a | added_b):
        if node_id in added_a and node_id in added_b:
            node_a = diff_a.version.node(node_id)
            node_b = diff_b.version.node(node_id)
            props: dict[str, PropertyValue] = {}
            for key in sorted(set(node_a.properties) | set(node_b.properties)):
                va = node_a.properties.get(key)
                vb = node_b.properties.get(key)
                if va is not None and vb is not None and va != vb:
                    conflicts.append(AddAddConflict(node_id, key, va, vb))
                else:
                    props[key] = va if va is not None else vb
            merged_nodes[node_id] = Node(node_id, node_a.kind, props)
        else:
            source = diff_a.version if node_id in added_a else diff_b.version
            merged_nodes[node_id] = source.node(node_id)

    for node_id, node in merged_nodes.items():
        state.nodes[node_id] = node

    for node_id in merged_nodes:
        in_a = node_id in added_a
        in_b = node_id in added_b
        parent_a = diff_a.version.direct_parent(node_id) if in_a else None
        parent_b = diff_b.version.direct_parent(node_id) if in_b else None
        if in_a and in_b and parent_a != parent_b:
            # same added id, two different Direct parents: hold at the
            # scene root until the conflict resolves
            conflicts.append(ReparentConflict(node_id, parent_a, parent_b))
            state.set_edge(state.root, node_id, DepKind.DIRECT)
            continue
        recorded = parent_a if in_a else parent_b
        owner = Branch.A if in_a else Branch.B
        if recorded is None:
            continue  # reachable via indirect references, or reconnected later
        if recorded in state.nodes:
            state.set_edge(recorded, node_id, DepKind.DIRECT, owner=owner)
        else:
            state.set_edge(state.root, node_id, DepKind.DIRECT, owner=owner)
    return conflicts


# -- phase 3: deletions -------------------------------------------------------


def _deletion_roots(diff: DiffResult) -> list[str]:
    deleted = diff.deleted
    roots = []
    for node_id in sorted(deleted):
        parent = diff.ancestor.direct_parent(node_id)
        if parent is None or parent not in deleted:
            roots.append(node_id)
    return roots


def _anchored_adds(other: DiffResult, scope: set[str]) -> list[str]:
    """Other-branch additions whose Direct-parent chain lands in the scope."""
    parent_of = {a: other.version.direct_parent(a) for a in other.added}
    anchored: set[str] = set()
    changed = True
    while changed:
        changed = False
        for added, parent in parent_of.items():
            if added in anchored or parent is None:
                continue
            if parent in scope or parent in anchored:
                anchored.add(added)
                changed = True
    return sorted(anchored)


def _reparent_ins(other: DiffResult, target_set: set[str], scope: set[str]) -> list[str]:
    """Surviving nodes the other branch reparented into the doomed subtree."""
    result = []
    for node_id in other.ancestor.node_ids():
        if node_id in scope or not other.version.has_node(node_id):
            continue
        old = other.ancestor.direct_parent(node_id)
        new = other.version.direct_parent(node_id)
        if new is not None and new != old and new in target_set:
            result.append(node_id)
    return sorted(result)


def _alive_chain(ancestor: LevelGraph, root_id: str, state: _State) -> list[str]:
    """Ancestor Direct-parent chain of a deleted node, filtered to the living."""
    chain = []
    current = ancestor.direct_parent(root_id)
    while current is not None:
        if current in state.nodes:
            chain.append(current)
        current = ancestor.direct_parent(current)
    chain.append(state.root)
    return chain


def _cascade_delete(
    state: _State, root_id: str, scope: set[str], branch: Branch, ancestor: LevelGraph
) -> None:
    """Remove the scope and relink survivors that lost their route to the root.

    A severed survivor is re-attached to the deleted node's nearest
    surviving ancestor parent, preserving the severed edge's dependency
    kind; Direct wins when several severed edges disagree.
    """
    severed: dict[str, DepKind] = {}
    for member in sorted(scope):
        if member not in state.nodes:
            continue
        for child, kind in state.out_.get(member, {}).items():
            if child not in scope:
                if severed.get(child) is not DepKind.DIRECT:
                    severed[child] = kind
        state.remove_node(member)
    if not severed:
        return
    reached = state.reachable_set()
    chain = _alive_chain(ancestor, root_id, state)
    for child in sorted(severed):
        if child not in state.nodes or child in reached:
            continue
        target = next((t for t in chain if t != child), state.root)
        if target == child:
            continue
        state.set_edge(target, child, severed[child], owner=branch, relink=True)
        state.grow_reachable(reached, child)


def _apply_deletions(state: _State, diff_a: DiffResult, diff_b: DiffResult) -> list[Conflict]:
    ancestor = diff_a.ancestor
    conflicts: list[Conflict] = []
    clean: dict[str, tuple[set[str], Branch]] = {}

    for branch, diff, other in ((Branch.A, diff_a, diff_b), (Branch.B, diff_b, diff_a)):
        for root_id in _deletion_roots(diff):
            scope = direct_subtree(ancestor, root_id) & diff.deleted
            touched_mods = sorted(
                m
                for m in scope
                if other.classes.get(m) is ChangeClass.MODIFIED and other.deltas[m].intrinsic
            )
            anchored = _anchored_adds(other, scope)
            reparent_ins = _reparent_ins(other, scope | set(anchored), scope)
            if touched_mods or anchored or reparent_ins:
                conflicts.append(
                    DeleteModifyConflict(
                        deleting_branch=branch,
                        deleted_node=root_id,
                        subtree=tuple(sorted(scope)),
                        touched=tuple(sorted({*touched_mods, *anchored, *reparent_ins})),
                        _touched_mods=tuple(touched_mods),
                        _anchored=tuple(anchored),
                        _reparent_ins=tuple(reparent_ins),
                        _other_diff=other,
                        _ancestor=ancestor,
                    )
                )
            elif root_id in clean:
                clean[root_id] = (clean[root_id][0] | scope, clean[root_id][1])
            else:
                clean[root_id] = (scope, branch)

    for root_id in sorted(clean):
        scope, branch = clean[root_id]
        _cascade_delete(state, root_id, scope, branch, ancestor)
    return conflicts


# -- phase 4: modifications ---------------------------------------------------


def _set_direct_parent(state: _State, node_id: str, parent: str | None, owner: Branch | None) -> None:
    current = state.direct_parent(node_id)
    if current is not None:
        state.remove_edge(current, node_id)
    if parent is None:
        return
    if parent not in state.nodes:
        raise MergeInternalError(
            f"direct parent {parent!r} of {node_id!r} vanished before application"
        )
    state.set_edge(parent, node_id, DepKind.DIRECT, owner=owner)


def _apply_modifications(
    state: _State, diff_a: DiffResult, diff_b: DiffResult, policy: MergePolicy
) -> list[Conflict]:
    ancestor = diff_a.ancestor
    version_a = diff_a.version
    version_b = diff_b.version
    conflicts: list[Conflict] = []

    for node_id in ancestor.node_ids():
        if node_id not in state.nodes:
            continue
        anc_node = ancestor.node(node_id)
        in_a = version_a.has_node(node_id)
        in_b = version_b.has_node(node_id)
        props_a = version_a.node(node_id).properties if in_a else anc_node.properties
        props_b = version_b.node(node_id).properties if in_b else anc_node.properties

        current = dict(state.nodes[node_id].properties)
        changed = False
        for key in sorted(set(anc_node.properties) | set(props_a) | set(props_b)):
            base = anc_node.properties.get(key)
            mine = props_a.get(key)
            theirs = props_b.get(key)
            if mine == base and theirs == base:
                continue
            if mine == theirs:
                value = mine
            elif mine == base:
                value = theirs
            elif theirs == base:
                value = mine
            elif (
                policy.numeric_averaging
                and mine is not None
                and theirs is not None
                and mine.kind == "real"
                and theirs.kind == "real"
                and anc_node.kind in policy.averageable_kinds
            ):
                value = PropertyValue.real((float(mine.value) + float(theirs.value)) / 2.0)
            else:
                conflicts.append(PropertyConflict(node_id, key, mine, theirs, base))
                continue
            if value is None:
                current.pop(key, None)
            else:
                current[key] = value
            changed = True
        if changed:
            state.nodes[node_id] = Node(node_id, anc_node.kind, current)

        base_dp = ancestor.direct_parent(node_id)
        dp_a = version_a.direct_parent(node_id) if in_a else base_dp
        dp_b = version_b.direct_parent(node_id) if in_b else base_dp
        if dp_a != base_dp or dp_b != base_dp:
            if dp_a != base_dp and dp_b != base_dp and dp_a != dp_b:
                conflicts.append(ReparentConflict(node_id, dp_a, dp_b))
            else:
                winner, owner = (dp_a, Branch.A) if dp_a != base_dp else (dp_b, Branch.B)
                _set_direct_parent(state, node_id, winner, owner)

    # indirect-presence cells, one per (parent, child) pair seen anywhere
    pairs: set[tuple[str, str]] = set()
    for graph in (ancestor, version_a, version_b):
        for edge in graph.edges():
            if edge.kind is DepKind.INDIRECT:
                pairs.add((edge.parent, edge.child))
    for parent, child in sorted(pairs):
        if parent not in state.nodes or child not in state.nodes:
            continue
        base = ancestor.edge_kind(parent, child) is DepKind.INDIRECT
        mine = (
            version_a.edge_kind(parent, child) is DepKind.INDIRECT
            if version_a.has_node(parent) and version_a.has_node(child)
            else base
        )
        theirs = (
            version_b.edge_kind(parent, child) is DepKind.INDIRECT
            if version_b.has_node(parent) and version_b.has_node(child)
            else base
        )
        merged = mine if mine == theirs else (theirs if mine == base else mine)
        current = state.edges.get((parent, child))
        if merged:
            if current is None:
                owner = Branch.A if mine and not base else Branch.B
                state.set_edge(parent, child, DepKind.INDIRECT, owner=owner)
            # an existing Direct edge on the pair wins over indirect presence
        elif current is DepKind.INDIRECT and (parent, child) not in state.relinks:
            state.remove_edge(parent, child)
    return conflicts


# -- assets (atomic digest level) ----------------------------------------------


def _merge_manifests_atomic(
    base: Mapping[str, str],
    mine: Mapping[str, str],
    theirs: Mapping[str, str],
    policy: MergePolicy,
) -> tuple[list[Conflict], dict[str, str], list[DroppedEdit]]:
    """Digest-level manifest merge; conflicts resolve like property conflicts.

    `merge3` always merges manifests atomically; content-aware
    strategies and validators plug in through its ``manifest_merger``
    hook (see the assets module).
    """
    conflicts: list[Conflict] = []
    manifest: dict[str, str] = {}
    dropped: list[DroppedEdit] = []
    winner = policy.winner
    for asset_id in sorted(set(base) | set(mine) | set(theirs)):
        a = base.get(asset_id)
        m = mine.get(asset_id)
        t = theirs.get(asset_id)
        if m == t:
            take = m
        elif m == a:
            take = t
        elif t == a:
            take = m
        else:
            conflict = AssetConflict(asset_id, m, t, a)
            conflicts.append(conflict)
            if winner is None:
                take = a  # held at ancestor state
            else:
                take = m if winner is Branch.A else t
                lost = t if winner is Branch.A else m
                conflict.resolution = _took(winner)
                dropped.append(
                    DroppedEdit(
                        winner.other,
                        None,
                        f"delete asset {asset_id}"
                        if lost is None
                        else f"asset {asset_id} -> {lost}",
                    )
                )
        if take is not None:
            manifest[asset_id] = take
    return conflicts, manifest, dropped


# -- phase 5: resolution --------------------------------------------------------


def _describe_delta(delta: NodeDelta) -> list[str]:
    fragments = []
    for key in sorted(delta.property_sets):
        fragments.append(f"set {key} = {format_value(delta.property_sets[key])}")
    for key in sorted(delta.property_removals):
        fragments.append(f"remove property {key}")
    if delta.reparented:
        fragments.append(f"reparent under {delta.new_direct_parent or 'nothing'}")
    for parent, kind in sorted(delta.dep_kind_changes):
        fragments.append(f"dependency on {parent} becomes {kind.value}")
    return fragments or ["edited"]


def _restore_child_state(state: _State, node_id: str, ancestor: LevelGraph) -> None:
    """Put a node's properties and incoming edges back to ancestor state."""
    state.nodes[node_id] = ancestor.node(node_id)
    for parent in list(state.in_.get(node_id, ())):
        state.remove_edge(parent, node_id)
    for parent, kind in ancestor.parents(node_id):
        if parent in state.nodes:
            state.set_edge(parent, node_id, kind)


def _restore_direct_parent(state: _State, node_id: str, ancestor: LevelGraph) -> None:
    current = state.direct_parent(node_id)
    if current is not None:
        state.remove_edge(current, node_id)
    anc_parent = ancestor.direct_parent(node_id)
    if anc_parent is not None and anc_parent in state.nodes:
        state.set_edge(anc_parent, node_id, DepKind.DIRECT)


def _hold_delete_modify(state: _State, conflict: DeleteModifyConflict) -> None:
    """Manual policy: hold every conflicting item at ancestor state."""
    ancestor = conflict._ancestor
    scope = set(conflict.subtree)
    anchored = set(conflict._anchored)
    for node_id in conflict._reparent_ins:
        if node_id not in state.nodes:
            continue
        current = state.direct_parent(node_id)
        if current is not None and (current in scope or current in anchored):
            _restore_direct_parent(state, node_id, ancestor)
    for added_id in conflict._anchored:
        if added_id in state.nodes:
            state.remove_node(added_id)
    for node_id in conflict._touched_mods:
        if node_id in state.nodes:
            _restore_child_state(state, node_id, ancestor)


def _win_delete(
    state: _State, conflict: DeleteModifyConflict, winner: Branch, dropped: list[DroppedEdit]
) -> None:
    loser = winner.other
    other_diff = conflict._other_diff
    ancestor = conflict._ancestor
    scope = set(conflict.subtree)
    anchored = set(conflict._anchored)

    for node_id in conflict._reparent_ins:
        if node_id not in state.nodes:
            continue
        current = state.direct_parent(node_id)
        if current is not None and (current in scope or current in anchored):
            _restore_direct_parent(state, node_id, ancestor)
            dropped.append(DroppedEdit(loser, node_id, f"reparent under {current}"))
    for added_id in conflict._anchored:
        added = other_diff.version.node(added_id)
        recorded = other_diff.version.direct_parent(added_id)
        dropped.append(
            DroppedEdit(
                loser,
                added_id,
                f"add {added.kind} node under {recorded or 'nothing'} "
                f"({len(added.properties)} properties)",
            )
        )
        if added_id in state.nodes:
            state.remove_node(added_id)
    for node_id in conflict._touched_mods:
        for fragment in _describe_delta(other_diff.deltas[node_id]):
            dropped.append(DroppedEdit(loser, node_id, fragment))
    _cascade_delete(state, conflict.deleted_node, scope, conflict.deleting_branch, ancestor)


def _resolve(state: _State, conflicts: list[Conflict], policy: MergePolicy) -> list[DroppedEdit]:
    dropped: list[DroppedEdit] = []
    winner = policy.winner
    # deletions cascade last so other resolutions see their targets alive
    ordered = [c for c in conflicts if not isinstance(c, DeleteModifyConflict)]
    ordered += [c for c in conflicts if isinstance(c, DeleteModifyConflict)]

    for conflict in ordered:
        if conflict.resolution is not Resolution.UNRESOLVED:
            continue  # settled earlier (e.g. by the manifest merger)
        if winner is None:
            if isinstance(conflict, DeleteModifyConflict):
                _hold_delete_modify(state, conflict)
            continue

        loser = winner.other
        if isinstance(conflict, (PropertyConflict, AddAddConflict)):
            take = conflict.value_a if winner is Branch.A else conflict.value_b
            lose = conflict.value_b if winner is Branch.A else conflict.value_a
            node = state.nodes.get(conflict.node)
            if node is not None:
                props = dict(node.properties)
                if take is None:
                    props.pop(conflict.key, None)
                else:
                    props[conflict.key] = take
                state.nodes[conflict.node] = Node(node.id, node.kind, props)
            if lose is None:
                description = f"remove property {conflict.key}"
            else:
                description = f"set {conflict.key} = {format_value(lose)}"
            dropped.append(DroppedEdit(loser, conflict.node, description))
            conflict.resolution = _took(winner)
        elif isinstance(conflict, ReparentConflict):
            take = conflict.parent_a if winner is Branch.A else conflict.parent_b
            lose = conflict.parent_b if winner is Branch.A else conflict.parent_a
            if conflict.node in state.nodes:
                _set_direct_parent(state, conflict.node, take, winner)
            dropped.append(
                DroppedEdit(loser, conflict.node, f"reparent under {lose or 'nothing'}")
            )
            conflict.resolution = _took(winner)
        elif isinstance(conflict, AssetConflict):
            take = conflict.digest_a if winner is Branch.A else conflict.digest_b
            lose = conflict.digest_b if winner is Branch.A else conflict.digest_a
            if take is None:
                state.assets.pop(conflict.asset_id, None)
            else:
                state.assets[conflict.asset_id] = take
            dropped.append(
                DroppedEdit(
                    loser,
                    None,
                    f"delete asset {conflict.asset_id}"
                    if lose is None
                    else f"asset {conflict.asset_id} -> {lose}",
                )
            )
            conflict.resolution = _took(winner)
        elif isinstance(conflict, DeleteModifyConflict):
            if winner is conflict.deleting_branch:
                _win_delete(state, conflict, winner, dropped)
            else:
                dropped.append(
                    DroppedEdit(
                        conflict.deleting_branch,
                        conflict.deleted_node,
                        f"delete {conflict.deleted_node} and its direct subtree "
                        f"({len(conflict.subtree)} nodes)",
                    )
                )
            conflict.resolution = _took(winner)
    return dropped


# -- phase 6: structural repair -------------------------------------------------


def _prune_relinks(state: _State) -> None:
    """Drop relink edges whose child is reachable without them.

    Relinking is a repair mechanism, not an edit: once both branches'
    edge changes are applied, a relink edge that duplicates restored
    connectivity must not survive into the merged graph.
    """
    for parent, child in sorted(state.relinks):
        kind = state.edges.get((parent, child))
        if kind is None:
            continue
        owner = state.owners.get((parent, child))
        state.remove_edge(parent, child)
        if not state.reaches_from_root(child):
            state.set_edge(parent, child, kind, owner=owner, relink=True)


def _repair_cycles_state(state: _State) -> tuple[list[Edge], list[DroppedEdit]]:
    removed: list[Edge] = []
    dropped: list[DroppedEdit] = []
    while True:
        node_ids = sorted(state.nodes)

        def successors(v: str) -> list[str]:
            return sorted(state.out_.get(v, ()))

        components = strongly_connected_components(node_ids, successors)
        cyclic = [
            comp
            for comp in components
            if len(comp) > 1 or (comp[0], comp[0]) in state.edges
        ]
        if not cyclic:
            break
        component = min(cyclic, key=min)
        members = set(component)
        internal = [pair for pair in state.edges if pair[0] in members and pair[1] in members]
        indirect = [pair for pair in internal if state.edges[pair] is DepKind.INDIRECT]
        candidates = indirect or internal
        heights = component_heights(node_ids, successors, state.root)
        parent, child = min(candidates, key=lambda pc: (heights[pc[0]], pc[0], pc[1]))
        kind = state.edges[(parent, child)]
        owner = state.owners.get((parent, child))
        state.remove_edge(parent, child)
        removed.append(Edge(parent, child, kind))
        if owner is not None:
            dropped.append(
                DroppedEdit(
                    owner,
                    child,
                    f"edge {parent} -> {child} ({kind.value}) removed to break a cycle",
                )
            )
    return removed, dropped


def _reconnect_orphans(state: _State) -> None:
    reached = state.reachable_set()
    for node_id in sorted(state.nodes):
        if node_id in reached or node_id == state.root:
            continue
        state.set_edge(state.root, node_id, DepKind.INDIRECT)
        state.grow_reachable(reached, node_id)


def _repair_manifest_refs(
    state: _State, ancestor: LevelGraph, mine: LevelGraph, theirs: LevelGraph
) -> None:
    """Keep every surviving asset reference resolvable in the manifest.

    A branch can win an asset deletion while the other branch's property
    referencing that asset survives; the reference wins and the entry is
    restored from whichever side still has the digest.
    """
    for node in state.nodes.values():
        for value in node.properties.values():
            if value.kind != "asset":
                continue
            asset_id = str(value.value)
            if asset_id in state.assets:
                continue
            digest = (
                mine.assets.get(asset_id)
                or theirs.assets.get(asset_id)
                or ancestor.assets.get(asset_id)
            )
            if digest is not None:
                state.assets[asset_id] = digest


# -- public operations -----------------------------------------------------------


def apply_additions(
    working: LevelGraph, diff_a: DiffResult, diff_b: DiffResult
) -> tuple[LevelGraph, list[Conflict]]:
    """Insert both branches' added nodes, each under its Direct parent.

    An added node whose recorded parent is absent from the working graph
    is attached under the scene root instead. Identical same-id
    additions merge to one node; per-key value disagreements become
    add/add conflicts.
    """
    state = _State.from_graph(working)
    conflicts = _apply_additions(state, diff_a, diff_b)
    return state.to_graph(), conflicts


def apply_deletions(
    working: LevelGraph, diff_a: DiffResult, diff_b: DiffResult
) -> tuple[LevelGraph, list[Conflict]]:
    """Apply both branches' deletions, deferring the conflicted ones.

    A deletion conflicts when the other branch intrinsically modified a
    node inside the doomed subtree, anchored an addition under it, or
    reparented a survivor into it. Clean deletions cascade over the
    Direct subtree and relink orphaned indirect subtrees to the deleted
    node's parent, preserving edge kinds.
    """
    state = _State.from_graph(working)
    conflicts = _apply_deletions(state, diff_a, diff_b)
    return state.to_graph(), conflicts


def apply_modifications(
    working: LevelGraph, diff_a: DiffResult, diff_b: DiffResult, policy: MergePolicy
) -> tuple[LevelGraph, list[Conflict]]:
    """Merge property values, Direct parents, and indirect references.

    Disjoint edits union; identical edits apply once; same-key value
    disagreements conflict unless numeric averaging covers them; and
    two branches assigning different Direct parents is a reparent
    conflict. Conflicted items keep their ancestor state here and are
    settled by `resolve_conflicts`.
    """
    state = _State.from_graph(working)
    conflicts = _apply_modifications(state, diff_a, diff_b, policy)
    return state.to_graph(), conflicts


def resolve_conflicts(
    working: LevelGraph, conflicts: list[Conflict], policy: MergePolicy
) -> tuple[LevelGraph, list[Conflict], list[DroppedEdit]]:
    """Settle collected conflicts per policy.

    Manual leaves them unresolved with conflicting items at ancestor
    state. A branch preference applies the winning edit (a winning
    deletion re-runs the cascade; a winning modification cancels the
    deletion) and records every losing fragment as a dropped edit.
    """
    state = _State.from_graph(working)
    dropped = _resolve(state, conflicts, policy)
    return state.to_graph(), conflicts, dropped


def repair_cycles(graph: LevelGraph) -> tuple[LevelGraph, list[Edge]]:
    """Break every cycle deterministically; returns removals in order.

    Per cyclic strongly connected component, the candidates are its
    internal Indirect edges, or all internal edges when no Indirect one
    exists; the candidate with the lowest source height goes first,
    ties broken by (parent, child) lexicographic order.
    """
    state = _State.from_graph(graph)
    removed, _ = _repair_cycles_state(state)
    return state.to_graph(), removed


def merge3(
    ancestor: LevelGraph,
    mine: LevelGraph,
    theirs: LevelGraph,
    policy: MergePolicy = MergePolicy(),
    manifest_merger=None,
) -> MergeOutcome:
    """Three-way merge of two edited versions against their common ancestor.

    The result is always a loadable, valid level: after applying both
    branches' edits and resolving conflicts per policy, cycles created
    by combined edge edits are broken (indirect-first, lowest height)
    and any orphaned node is reconnected under the root. Every
    non-conflicting edit from both branches survives into the merge.

    ``manifest_merger`` overrides the atomic digest-level asset merge;
    it receives the three manifests plus the policy and returns
    (conflicts, merged manifest, dropped edits).
    """
    start = time.perf_counter()
    diff_a = classify(ancestor, mine)
    diff_b = classify(ancestor, theirs)
    check_same_level(mine, theirs, "mine", "theirs")

    state = _State.from_graph(ancestor)
    conflicts: list[Conflict] = []
    conflicts += _apply_additions(state, diff_a, diff_b)
    conflicts += _apply_deletions(state, diff_a, diff_b)
    conflicts += _apply_modifications(state, diff_a, diff_b, policy)

    merge_assets = manifest_merger or _merge_manifests_atomic
    asset_conflicts, manifest, asset_drops = merge_assets(
        ancestor.assets, mine.assets, theirs.assets, policy
    )
    conflicts += asset_conflicts
    state.assets = manifest

    dropped = _resolve(state, conflicts, policy)
    dropped += asset_drops
    _prune_relinks(state)
    removed_edges, cycle_drops = _repair_cycles_state(state)
    dropped += cycle_drops
    _reconnect_orphans(state)
    _repair_manifest_refs(state, ancestor, mine, theirs)

    merged = state.to_graph()
    report = validate(merged)
    if not report.ok:
        raise MergeInternalError(f"merge produced an invalid graph:\n{report}")

    stats = MergeStats(
        ancestor_nodes=ancestor.node_count,
        ancestor_edges=ancestor.edge_count,
        diff_a_edited=diff_stats(diff_a).total_edited,
        diff_b_edited=diff_stats(diff_b).total_edited,
        merged_nodes=merged.node_count,
        merged_edges=merged.edge_count,
        wall_time_s=time.perf_counter() - start,
    )
    return MergeOutcome(merged, conflicts, dropped, removed_edges, stats)
