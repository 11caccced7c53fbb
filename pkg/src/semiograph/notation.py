"""Linear notation for conceptual graphs: parser, serializer, canonical form.

The grammar (frozen in ``docs/notation.md``)::

    document  := (statement (';' | NEWLINE))*
    statement := concept | concept '-(' name ')->' concept
    concept   := '[' name ':' referent ']'
    referent  := '*'            anonymous (a fresh node per mention)
               | '*' IDENT      coreference variable (same node per mention)
               | name           individual marker
    name      := IDENT | STRING
    IDENT     := [A-Za-z0-9_À-ÿ-]+
    STRING    := '"' (escaped characters) '"'

``#`` starts a comment running to the end of the line. Within one document,
repeated ``*v`` mentions denote one node, and so do concept terms carrying
the same type and the same marker; plain ``*`` terms never merge.

The parser is ontology-agnostic: unknown type or relation ids only surface
later through graph validation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .graphs import (
    GENERIC,
    VARIABLE,
    ConceptNode,
    ConceptualGraph,
    Referent,
    RelationEdge,
)
from .errors import ScsError

IDENT_RE = re.compile(r"[A-Za-z0-9_À-ÿ-]+")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


class ParseError(ScsError):
    code = "ParseError"
    http_status = 400

    def __init__(self, message: str, span: SourceSpan, expected: list[str] | None = None):
        super().__init__(message)
        self.span = span
        self.expected = expected or []

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.message}"


# --- lexer -------------------------------------------------------------------

_SIMPLE = {"[": "LBRACKET", "]": "RBRACKET", ":": "COLON", ";": "SEP"}


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    span: SourceSpan


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1

    def span(length: int = 1) -> SourceSpan:
        return SourceSpan(line, col, length)

    while i < len(text):
        ch = text[i]
        if ch == "\n":
            tokens.append(_Token("SEP", "\n", span()))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
                col += 1
            continue
        if text.startswith("-(", i):
            tokens.append(_Token("ARROW_OPEN", "-(", span(2)))
            i += 2
            col += 2
            continue
        if text.startswith(")->", i):
            tokens.append(_Token("ARROW_CLOSE", ")->", span(3)))
            i += 3
            col += 3
            continue
        if ch in _SIMPLE:
            tokens.append(_Token(_SIMPLE[ch], ch, span()))
            i += 1
            col += 1
            continue
        if ch == "*":
            m = IDENT_RE.match(text, i + 1)
            if m and m.start() == i + 1:
                name = m.group()
                tokens.append(_Token("VARIABLE", name, span(1 + len(name))))
                i += 1 + len(name)
                col += 1 + len(name)
            else:
                tokens.append(_Token("STAR", "*", span()))
                i += 1
                col += 1
            continue
        if ch == '"':
            start_span = span()
            j = i + 1
            out: list[str] = []
            while j < len(text):
                c = text[j]
                if c == "\\":
                    if j + 1 >= len(text):
                        raise ParseError("unterminated escape", SourceSpan(line, col + (j - i)))
                    out.append(text[j + 1])
                    j += 2
                    continue
                if c == '"':
                    break
                if c == "\n":
                    raise ParseError("unterminated string", start_span)
                out.append(c)
                j += 1
            else:
                raise ParseError("unterminated string", start_span)
            length = j + 1 - i
            tokens.append(_Token("STRING", "".join(out), SourceSpan(line, col, length)))
            i = j + 1
            col += length
            continue
        m = IDENT_RE.match(text, i)
        if m:
            word = m.group()
            tokens.append(_Token("IDENT", word, span(len(word))))
            i += len(word)
            col += len(word)
            continue
        raise ParseError(f"unexpected character {ch!r}", span())
    tokens.append(_Token("EOF", "", SourceSpan(line, col, 0)))
    return tokens


# --- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.pos = 0
        self.nodes: dict[str, ConceptNode] = {}
        self.edges: list[RelationEdge] = []
        self.by_variable: dict[str, str] = {}
        self.by_marker: dict[tuple[str, str], str] = {}
        self.counter = 0
        self.edge_counter = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str, expected: str) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != kind:
            raise ParseError(
                f"expected {expected}, got {tok.value!r}" if tok.kind != "EOF" else f"expected {expected}, got end of input",
                tok.span,
                expected=[kind],
            )
        self.pos += 1
        return tok

    def take_name(self, what: str) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind not in ("IDENT", "STRING"):
            raise ParseError(
                f"expected {what}, got {tok.value!r}" if tok.kind != "EOF" else f"expected {what}, got end of input",
                tok.span,
                expected=["IDENT", "STRING"],
            )
        self.pos += 1
        return tok

    def fresh_node_id(self) -> str:
        while True:
            self.counter += 1
            nid = f"n{self.counter}"
            if nid not in self.nodes:
                return nid

    def parse_concept(self) -> str:
        """Parse one concept term; returns the id of the (possibly merged) node."""
        self.take("LBRACKET", "'['")
        type_tok = self.take_name("a type identifier")
        self.take("COLON", "':' after the type")
        tok = self.peek()
        if tok.kind == "STAR":
            self.pos += 1
            nid = self.fresh_node_id()
            self.nodes[nid] = ConceptNode(nid, type_tok.value, Referent.generic())
        elif tok.kind == "VARIABLE":
            self.pos += 1
            name = tok.value
            if name in self.by_variable:
                nid = self.by_variable[name]
                existing = self.nodes[nid]
                if existing.type_id != type_tok.value:
                    raise ParseError(
                        f"variable *{name} redeclared with type {type_tok.value!r} "
                        f"(was {existing.type_id!r})",
                        tok.span,
                    )
            else:
                nid = name if name not in self.nodes else self.fresh_node_id()
                self.by_variable[name] = nid
                self.nodes[nid] = ConceptNode(nid, type_tok.value, Referent.variable(name))
        elif tok.kind in ("IDENT", "STRING"):
            self.pos += 1
            key = (type_tok.value, tok.value)
            if key in self.by_marker:
                nid = self.by_marker[key]
            else:
                nid = self.fresh_node_id()
                self.by_marker[key] = nid
                self.nodes[nid] = ConceptNode(nid, type_tok.value, Referent.marker(tok.value))
        else:
            raise ParseError(
                "expected a referent ('*', '*name' or a marker)",
                tok.span,
                expected=["STAR", "VARIABLE", "IDENT", "STRING"],
            )
        self.take("RBRACKET", "']' closing the concept")
        return nid

    def parse_statement(self) -> None:
        src = self.parse_concept()
        if self.peek().kind == "ARROW_OPEN":
            self.pos += 1
            rel = self.take_name("a relation identifier")
            self.take("ARROW_CLOSE", "')->'")
            tgt = self.parse_concept()
            self.edge_counter += 1
            self.edges.append(RelationEdge(f"e{self.edge_counter}", rel.value, src, tgt))

    def parse_document(self) -> ConceptualGraph:
        while True:
            tok = self.peek()
            if tok.kind == "EOF":
                break
            if tok.kind == "SEP":
                self.pos += 1
                continue
            self.parse_statement()
            tok = self.peek()
            if tok.kind == "EOF":
                break
            if tok.kind != "SEP":
                raise ParseError(
                    f"expected end of statement, got {tok.value!r}",
                    tok.span,
                    expected=["SEP"],
                )
        return ConceptualGraph.of(self.nodes.values(), self.edges)


def parse_graph(text: str) -> ConceptualGraph:
    """Parse linear notation into a graph (not yet validated against an ontology)."""
    return _Parser(text).parse_document()


# --- serializer ------------------------------------------------------------------


def _render_name(name: str) -> str:
    if name and IDENT_RE.fullmatch(name):
        return name
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def serialize_graph(g: ConceptualGraph) -> str:
    """Deterministic text that reparses to an isomorphic graph.

    Isolated nodes come first in node-id order, then one edge per line in
    edge-id order. Anonymous nodes referenced more than once are emitted with
    generated coreference variables; marker nodes corefer through their marker.
    """
    mentions: dict[str, int] = {n.node_id: 0 for n in g.nodes}
    for e in g.edges:
        mentions[e.source] += 1
        mentions[e.target] += 1

    taken_names = {
        n.referent.value for n in g.nodes if n.referent.kind == VARIABLE and n.referent.value
    }
    display_var: dict[str, str] = {}
    counter = 0
    for n in g.nodes:
        if n.referent.kind == VARIABLE:
            name = n.referent.value or ""
            if not IDENT_RE.fullmatch(name):
                counter += 1
                while f"v{counter}" in taken_names:
                    counter += 1
                name = f"v{counter}"
                taken_names.add(name)
            display_var[n.node_id] = name
        elif n.referent.kind == GENERIC and mentions[n.node_id] >= 2:
            counter += 1
            while f"v{counter}" in taken_names:
                counter += 1
            display_var[n.node_id] = f"v{counter}"
            taken_names.add(f"v{counter}")

    def concept(node_id: str) -> str:
        n = g.node(node_id)
        if n.referent.is_marker:
            ref = _render_name(n.referent.value or "")
        elif node_id in display_var:
            ref = f"*{display_var[node_id]}"
        else:
            ref = "*"
        return f"[{_render_name(n.type_id)}: {ref}]"

    lines = [concept(n.node_id) for n in g.nodes if mentions[n.node_id] == 0]
    lines += [
        f"{concept(e.source)} -({_render_name(e.rel_id)})-> {concept(e.target)}"
        for e in g.edges
    ]
    return "\n".join(lines) + ("\n" if lines else "")


# --- canonical form -----------------------------------------------------------------


def _wl_colors(g: ConceptualGraph) -> dict[str, int]:
    """Iterated neighbourhood refinement; ranks are stable under id renaming."""
    base: dict[str, tuple] = {}
    for n in g.nodes:
        ref = ("m", n.referent.value) if n.referent.is_marker else ("a",)
        base[n.node_id] = (n.type_id, ref)
    ranks = {key: i for i, key in enumerate(sorted(set(base.values())))}
    colors = {nid: ranks[key] for nid, key in base.items()}
    outs: dict[str, list[RelationEdge]] = {n.node_id: [] for n in g.nodes}
    ins: dict[str, list[RelationEdge]] = {n.node_id: [] for n in g.nodes}
    for e in g.edges:
        outs[e.source].append(e)
        ins[e.target].append(e)
    for _ in range(max(1, len(g.nodes))):
        sigs = {
            nid: (
                colors[nid],
                tuple(sorted((e.rel_id, colors[e.target]) for e in outs[nid])),
                tuple(sorted((e.rel_id, colors[e.source]) for e in ins[nid])),
            )
            for nid in colors
        }
        ranks = {key: i for i, key in enumerate(sorted(set(sigs.values())))}
        new_colors = {nid: ranks[sigs[nid]] for nid in colors}
        if _partition(new_colors) == _partition(colors):
            return new_colors
        colors = new_colors
    return colors


def _partition(colors: dict[str, int]) -> frozenset[frozenset[str]]:
    groups: dict[int, set[str]] = {}
    for nid, c in colors.items():
        groups.setdefault(c, set()).add(nid)
    return frozenset(frozenset(v) for v in groups.values())


def _relabeled_serialization(g: ConceptualGraph, order: list[str]) -> str:
    """Serialize with node ids replaced by their position in ``order``."""
    index = {nid: i for i, nid in enumerate(order)}
    nodes = []
    for nid in order:
        n = g.node(nid)
        ref = n.referent if n.referent.is_marker else Referent.generic()
        nodes.append(ConceptNode(f"n{index[nid]:04d}", n.type_id, ref))
    edges = sorted(
        g.edges, key=lambda e: (e.rel_id, index[e.source], index[e.target], e.edge_id)
    )
    relabeled_edges = [
        RelationEdge(f"e{i:04d}", e.rel_id, f"n{index[e.source]:04d}", f"n{index[e.target]:04d}")
        for i, e in enumerate(edges)
    ]
    return serialize_graph(ConceptualGraph.of(nodes, relabeled_edges))


def canonical_form(g: ConceptualGraph) -> str:
    """Serialization invariant under node and edge id renaming.

    Nodes are ordered by refinement colors; remaining ties are resolved by
    searching the orderings that minimize the final text. Coreference labels
    are normalized away, so the result depends only on graph structure,
    types and markers.
    """
    node_ids = [n.node_id for n in g.nodes]
    if not node_ids:
        return ""
    colors = _wl_colors(g)
    incident: dict[str, list[RelationEdge]] = {nid: [] for nid in node_ids}
    for e in g.edges:
        incident[e.source].append(e)
        if e.target != e.source:
            incident[e.target].append(e)

    best: str | None = None

    def placed_signature(nid: str, pos: dict[str, int]) -> tuple:
        sig = []
        for e in incident[nid]:
            if e.source == e.target == nid:
                sig.append((e.rel_id, "self", -1))
            elif e.source == nid and e.target in pos:
                sig.append((e.rel_id, "out", pos[e.target]))
            elif e.target == nid and e.source in pos:
                sig.append((e.rel_id, "in", pos[e.source]))
        return tuple(sorted(sig))

    def open_degree(nid: str, placed: set[str]) -> int:
        return sum(
            1
            for e in incident[nid]
            if not (e.source == e.target)
            and (e.source if e.target == nid else e.target) not in placed
            and (e.source if e.target == nid else e.target) != nid
        )

    def search(order: list[str], remaining: set[str]) -> None:
        nonlocal best
        if not remaining:
            s = _relabeled_serialization(g, order)
            if best is None or s < best:
                best = s
            return
        pos = {nid: i for i, nid in enumerate(order)}
        placed = set(order)
        keyed = [((colors[nid], placed_signature(nid, pos)), nid) for nid in remaining]
        min_key = min(k for k, _ in keyed)
        candidates = sorted(nid for k, nid in keyed if k == min_key)
        chosen = []
        closed_taken = False
        for nid in candidates:
            if open_degree(nid, placed) == 0:
                # fully wired into what is already placed: interchangeable with
                # any other closed candidate of the same key
                if closed_taken:
                    continue
                closed_taken = True
            chosen.append(nid)
        for nid in chosen:
            search(order + [nid], remaining - {nid})

    search([], set(node_ids))
    assert best is not None
    return best
