"""Canonical line-oriented text format for level documents and merge reports.

Level documents (``.lvl``) are plain UTF-8 text, one fact per line::

    lvl 1
    root scene
    node scene Scene
    node lamp Light
    prop lamp intensity real 2.5
    prop lamp name text "desk lamp"
    edge scene lamp direct
    asset textures/wood.png 9f86d081884c7d65...

Directives may appear in any order; parsing reorders them. The
canonical form produced by `serialize` sorts nodes by id, properties by
(node, key), edges by (parent, child) and manifest entries by asset id,
renders reals in shortest round-trip decimal form, and uses LF line
endings. Equal graphs therefore always serialize to identical bytes.

Identifiers (node ids, kinds, property keys, asset ids) are written
bare when they match ``[A-Za-z0-9_.+/:@-]+`` and double-quoted with
backslash escapes otherwise. Text values are always quoted.

Merge reports (``.lvlreport``) use the same tokenizer; see
`render_report` for the line inventory.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .graph import DepKind, Edge, LevelGraph, Node, PropertyValue, SceneMergeError

FORMAT_VERSION = 1

_BARE_TOKEN = re.compile(r"[A-Za-z0-9_.+/:@-]+")
_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


class ParseError(SceneMergeError):
    """A syntax or consistency error in a level document or report."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


@dataclass(frozen=True)
class LevelDocument:
    """A parsed level file: format version plus the graph (and manifest)."""

    format_version: int
    graph: LevelGraph


# -- tokenizer ---------------------------------------------------------------


# characters that some line splitters treat as boundaries; always escaped
_LINEISH = "\x85  "


def _format_token(value: str) -> str:
    if value and _BARE_TOKEN.fullmatch(value):
        return value
    out = ['"']
    for ch in value:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ch in _LINEISH:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


@dataclass(frozen=True)
class _Token:
    text: str
    column: int


def _split_line(line: str, lineno: int) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t":
            i += 1
            continue
        start = i
        if ch == '"':
            i += 1
            parts: list[str] = []
            while True:
                if i >= n:
                    raise ParseError("unterminated quoted string", lineno, start + 1)
                ch = line[i]
                if ch == '"':
                    i += 1
                    break
                if ch == "\\":
                    if i + 1 >= n:
                        raise ParseError("dangling escape", lineno, i + 1)
                    esc = line[i + 1]
                    if esc in _UNESCAPES:
                        parts.append(_UNESCAPES[esc])
                        i += 2
                    elif esc == "u":
                        digits = line[i + 2 : i + 6]
                        if len(digits) != 4 or not all(c in "0123456789abcdefABCDEF" for c in digits):
                            raise ParseError("invalid \\u escape", lineno, i + 1)
                        parts.append(chr(int(digits, 16)))
                        i += 6
                    else:
                        raise ParseError(f"unknown escape \\{esc}", lineno, i + 1)
                else:
                    parts.append(ch)
                    i += 1
            tokens.append(_Token("".join(parts), start + 1))
        else:
            match = _BARE_TOKEN.match(line, i)
            if not match:
                raise ParseError(f"unexpected character {ch!r}", lineno, i + 1)
            i = match.end()
            tokens.append(_Token(match.group(), start + 1))
    return tokens


# -- values ------------------------------------------------------------------


def format_value(value: PropertyValue) -> str:
    """Render a property value as ``<tag> <literal>`` (canonical form)."""
    if value.kind == "bool":
        return f"bool {'true' if value.value else 'false'}"
    if value.kind == "int":
        return f"int {value.value}"
    if value.kind == "real":
        return f"real {value.value!r}"
    if value.kind == "text":
        return f"text {_format_token(str(value.value))}"
    return f"{value.kind} {_format_token(str(value.value))}"


def _parse_value(tokens: list[_Token], start: int, lineno: int) -> PropertyValue:
    if start >= len(tokens):
        raise ParseError("missing property value", lineno)
    tag = tokens[start].text
    if start + 1 >= len(tokens):
        raise ParseError(f"missing literal after {tag!r}", lineno, tokens[start].column)
    literal = tokens[start + 1]
    if len(tokens) > start + 2:
        raise ParseError("trailing tokens after value", lineno, tokens[start + 2].column)
    try:
        if tag == "bool":
            if literal.text not in ("true", "false"):
                raise ValueError
            return PropertyValue.boolean(literal.text == "true")
        if tag == "int":
            if not re.fullmatch(r"-?\d+", literal.text):
                raise ValueError
            return PropertyValue.integer(int(literal.text))
        if tag == "real":
            return PropertyValue.real(float(literal.text))
        if tag == "text":
            return PropertyValue.text(literal.text)
        if tag == "ref":
            return PropertyValue.node_ref(literal.text)
        if tag == "asset":
            return PropertyValue.asset_ref(literal.text)
    except ValueError:
        raise ParseError(
            f"invalid {tag} literal {literal.text!r}", lineno, literal.column
        ) from None
    raise ParseError(f"unknown property type tag {tag!r}", lineno, tokens[start].column)


# -- document parsing --------------------------------------------------------


def parse(text: str) -> LevelDocument:
    """Parse a level document.

    Structural graph invariants that intermediate merge states may break
    (acyclicity, reachability, single Direct parent) are left to
    `graph.validate`; everything a document cannot meaningfully express
    twice (duplicate ids, duplicate edges, duplicate keys) is an error
    here, with line/column positions.
    """
    header_seen = False
    version = None
    root: tuple[str, int] | None = None
    nodes: dict[str, tuple[Node, int]] = {}
    props: dict[tuple[str, str], tuple[PropertyValue, int]] = {}
    edges: dict[tuple[str, str], tuple[DepKind, int]] = {}
    assets: dict[str, tuple[str, int]] = {}

    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        tokens = _split_line(line, lineno)
        if not tokens:
            continue
        directive = tokens[0].text

        if not header_seen:
            if directive != "lvl":
                raise ParseError("document must start with an 'lvl <version>' header", lineno)
            if len(tokens) != 2 or not tokens[1].text.isdigit():
                raise ParseError("malformed header, expected 'lvl <version>'", lineno)
            version = int(tokens[1].text)
            if version != FORMAT_VERSION:
                raise ParseError(f"unsupported format version {version}", lineno, tokens[1].column)
            header_seen = True
            continue

        if directive == "root":
            if len(tokens) != 2:
                raise ParseError("expected 'root <id>'", lineno)
            if root is not None:
                raise ParseError(f"duplicate root directive (first at line {root[1]})", lineno)
            root = (tokens[1].text, lineno)
        elif directive == "node":
            if len(tokens) != 3:
                raise ParseError("expected 'node <id> <kind>'", lineno)
            node_id = tokens[1].text
            if node_id in nodes:
                raise ParseError(
                    f"duplicate node id {node_id!r} (first defined at line {nodes[node_id][1]})",
                    lineno,
                    tokens[1].column,
                )
            if not node_id or not tokens[2].text:
                raise ParseError("node id and kind must be non-empty", lineno)
            nodes[node_id] = (Node(node_id, tokens[2].text), lineno)
        elif directive == "prop":
            if len(tokens) < 4:
                raise ParseError("expected 'prop <node> <key> <type> <value>'", lineno)
            owner, key = tokens[1].text, tokens[2].text
            if not key:
                raise ParseError("property key must be non-empty", lineno, tokens[2].column)
            if (owner, key) in props:
                raise ParseError(
                    f"duplicate property {key!r} on node {owner!r} "
                    f"(first set at line {props[(owner, key)][1]})",
                    lineno,
                    tokens[2].column,
                )
            props[(owner, key)] = (_parse_value(tokens, 3, lineno), lineno)
        elif directive == "edge":
            if len(tokens) != 4:
                raise ParseError("expected 'edge <parent> <child> <direct|indirect>'", lineno)
            parent, child, kind_text = tokens[1].text, tokens[2].text, tokens[3].text
            if kind_text not in ("direct", "indirect"):
                raise ParseError(
                    f"unknown dependency kind {kind_text!r}", lineno, tokens[3].column
                )
            if parent == child:
                raise ParseError(f"self-loop edge on {parent!r}", lineno, tokens[1].column)
            if (parent, child) in edges:
                raise ParseError(
                    f"duplicate edge {parent!r} -> {child!r} "
                    f"(first at line {edges[(parent, child)][1]})",
                    lineno,
                    tokens[1].column,
                )
            edges[(parent, child)] = (DepKind(kind_text), lineno)
        elif directive == "asset":
            if len(tokens) != 3:
                raise ParseError("expected 'asset <id> <digest>'", lineno)
            asset_id = tokens[1].text
            if asset_id in assets:
                raise ParseError(
                    f"duplicate asset {asset_id!r} (first at line {assets[asset_id][1]})",
                    lineno,
                    tokens[1].column,
                )
            assets[asset_id] = (tokens[2].text, lineno)
        elif directive == "lvl":
            raise ParseError("duplicate header", lineno)
        else:
            raise ParseError(f"unknown directive {directive!r}", lineno)

    if not header_seen:
        raise ParseError("empty document, expected 'lvl <version>' header", 1)
    if root is None:
        raise ParseError("document has no root directive", 1)
    if root[0] not in nodes:
        raise ParseError(f"root {root[0]!r} is not a declared node", root[1])

    for (owner, key), (_, lineno) in props.items():
        if owner not in nodes:
            raise ParseError(f"property on unknown node {owner!r}", lineno)
    for (parent, child), (_, lineno) in edges.items():
        for end in (parent, child):
            if end not in nodes:
                raise ParseError(f"edge references unknown node {end!r}", lineno)

    props_by_owner: dict[str, dict[str, PropertyValue]] = {}
    for (owner, key), (value, _) in props.items():
        props_by_owner.setdefault(owner, {})[key] = value
    built_nodes = [
        Node(node_id, node.kind, props_by_owner.get(node_id, {}))
        for node_id, (node, _) in nodes.items()
    ]

    graph = LevelGraph(
        root[0],
        built_nodes,
        [Edge(p, c, kind) for (p, c), (kind, _) in edges.items()],
        {aid: digest for aid, (digest, _) in assets.items()},
    )
    return LevelDocument(version, graph)


def serialize(doc: LevelDocument) -> str:
    """Render the canonical byte form of a document (see module docstring)."""
    graph = doc.graph
    lines = [f"lvl {doc.format_version}", f"root {_format_token(graph.root)}"]
    for node_id in sorted(graph.node_ids()):
        node = graph.node(node_id)
        lines.append(f"node {_format_token(node_id)} {_format_token(node.kind)}")
    for node_id in sorted(graph.node_ids()):
        node = graph.node(node_id)
        for key in sorted(node.properties):
            lines.append(
                f"prop {_format_token(node_id)} {_format_token(key)} "
                f"{format_value(node.properties[key])}"
            )
    for edge in sorted(graph.edges(), key=Edge.sort_key):
        lines.append(
            f"edge {_format_token(edge.parent)} {_format_token(edge.child)} {edge.kind.value}"
        )
    for asset_id in sorted(graph.assets):
        lines.append(f"asset {_format_token(asset_id)} {_format_token(graph.assets[asset_id])}")
    return "\n".join(lines) + "\n"


def read_document(path) -> LevelDocument:
    with open(path, "r", encoding="utf-8") as handle:
        return parse(handle.read())


def write_document(doc: LevelDocument, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(serialize(doc))


def canonical_bytes(graph: LevelGraph) -> bytes:
    """Canonical serialization of a graph at the current format version."""
    return serialize(LevelDocument(FORMAT_VERSION, graph)).encode("utf-8")
