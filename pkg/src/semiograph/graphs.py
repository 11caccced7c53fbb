"""Conceptual graphs: bipartite structures of typed concept nodes and binary relation edges.

A graph is *generic* when no node carries an individual marker, *individual*
otherwise. Variable referents are coreference labels introduced by the linear
notation; once a graph is built they behave exactly like the anonymous
referent (the engine only ever relies on node identity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import DuplicateIdError, Issue, UnknownMarkerError
from .ontology import Ontology, conforms, relation_applicable, subsumes

GENERIC = "generic"
VARIABLE = "variable"
MARKER = "marker"


@dataclass(frozen=True)
class Referent:
    """What a concept node denotes: anonymous, a named coreference, or an individual."""

    kind: str
    value: str | None = None

    @staticmethod
    def generic() -> "Referent":
        return Referent(GENERIC)

    @staticmethod
    def variable(name: str) -> "Referent":
        if not name:
            raise ValueError("variable name must be non-empty")
        return Referent(VARIABLE, name)

    @staticmethod
    def marker(marker: str) -> "Referent":
        if not marker:
            raise ValueError("marker must be non-empty")
        return Referent(MARKER, marker)

    @property
    def is_marker(self) -> bool:
        return self.kind == MARKER

    @property
    def is_anonymous(self) -> bool:
        """Generic and variable referents are semantically interchangeable."""
        return self.kind != MARKER


@dataclass(frozen=True)
class ConceptNode:
    node_id: str
    type_id: str
    referent: Referent = Referent(GENERIC)


@dataclass(frozen=True)
class RelationEdge:
    edge_id: str
    rel_id: str
    source: str
    target: str


@dataclass(frozen=True)
class ConceptualGraph:
    """Immutable graph value; nodes and edges are kept sorted by id."""

    nodes: tuple[ConceptNode, ...] = ()
    edges: tuple[RelationEdge, ...] = ()
    _node_map: Mapping[str, ConceptNode] = field(compare=False, repr=False, default_factory=dict)
    _edge_map: Mapping[str, RelationEdge] = field(compare=False, repr=False, default_factory=dict)

    @classmethod
    def of(cls, nodes: Iterable[ConceptNode], edges: Iterable[RelationEdge]) -> "ConceptualGraph":
        node_map: dict[str, ConceptNode] = {}
        for n in nodes:
            if n.node_id in node_map:
                raise DuplicateIdError(f"duplicate node id {n.node_id!r}", id=n.node_id)
            node_map[n.node_id] = n
        edge_map: dict[str, RelationEdge] = {}
        for e in edges:
            if e.edge_id in edge_map:
                raise DuplicateIdError(f"duplicate edge id {e.edge_id!r}", id=e.edge_id)
            edge_map[e.edge_id] = e
        seen_vars: dict[str, str] = {}
        for n in node_map.values():
            if n.referent.kind == VARIABLE:
                other = seen_vars.setdefault(n.referent.value or "", n.node_id)
                if other != n.node_id:
                    raise DuplicateIdError(
                        f"variable {n.referent.value!r} bound to two nodes ({other!r}, {n.node_id!r})",
                        id=n.referent.value,
                    )
        return cls(
            nodes=tuple(sorted(node_map.values(), key=lambda n: n.node_id)),
            edges=tuple(sorted(edge_map.values(), key=lambda e: e.edge_id)),
            _node_map=node_map,
            _edge_map=edge_map,
        )

    @classmethod
    def empty(cls) -> "ConceptualGraph":
        return cls.of((), ())

    def node(self, node_id: str) -> ConceptNode:
        return self._node_map[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_map

    def edge(self, edge_id: str) -> RelationEdge:
        return self._edge_map[edge_id]

    def edges_from(self, node_id: str) -> tuple[RelationEdge, ...]:
        return tuple(e for e in self.edges if e.source == node_id)

    def edges_into(self, node_id: str) -> tuple[RelationEdge, ...]:
        return tuple(e for e in self.edges if e.target == node_id)

    def incident_edges(self, node_id: str) -> tuple[RelationEdge, ...]:
        return tuple(e for e in self.edges if node_id in (e.source, e.target))

    @property
    def is_generic(self) -> bool:
        """Generic iff no node carries an individual marker."""
        return all(not n.referent.is_marker for n in self.nodes)

    @property
    def kind(self) -> str:
        return "generic" if self.is_generic else "individual"


@dataclass(frozen=True)
class TypeDefinition:
    """A concept type defined by a generic graph with a distinguished genus node."""

    defined_type: str
    body: ConceptualGraph
    parameter: str


def validate_definition(ont: Ontology, defn: TypeDefinition) -> None:
    from .errors import InvalidGraphError, UnknownIdError

    if defn.defined_type not in ont.concept_types:
        raise UnknownIdError(f"unknown defined type {defn.defined_type!r}", id=defn.defined_type)
    if not defn.body.has_node(defn.parameter):
        raise InvalidGraphError(f"definition parameter {defn.parameter!r} is not a body node")
    if not defn.body.is_generic:
        raise InvalidGraphError("definition body must be a generic graph")
    issues = validate_graph(ont, defn.body)
    if issues:
        raise InvalidGraphError("definition body does not validate", issues=issues)
    genus = defn.body.node(defn.parameter).type_id
    if not subsumes(ont, genus, defn.defined_type):
        raise InvalidGraphError(
            f"genus {genus!r} must be a supertype of the defined type {defn.defined_type!r}"
        )


@dataclass(frozen=True)
class Morphism:
    """Structure-preserving map from a pattern graph into a target graph."""

    node_map: tuple[tuple[str, str], ...]
    edge_map: tuple[tuple[str, str], ...]

    @classmethod
    def of(cls, node_map: Mapping[str, str], edge_map: Mapping[str, str]) -> "Morphism":
        return cls(tuple(sorted(node_map.items())), tuple(sorted(edge_map.items())))

    @property
    def nodes(self) -> dict[str, str]:
        return dict(self.node_map)

    @property
    def edges(self) -> dict[str, str]:
        return dict(self.edge_map)

    def sort_key(self) -> tuple:
        return (tuple(v for _, v in self.node_map), tuple(v for _, v in self.edge_map))


def validate_graph(ont: Ontology, g: ConceptualGraph) -> list[Issue]:
    """Full report of everything wrong with ``g`` against ``ont``; empty when valid."""
    issues: list[Issue] = []
    for n in g.nodes:
        if n.type_id not in ont.concept_types:
            issues.append(
                Issue("UnknownType", f"node type {n.type_id!r} is not declared", where=f"node {n.node_id}")
            )
            continue
        if n.referent.is_marker:
            marker = n.referent.value or ""
            try:
                ok = conforms(ont, marker, n.type_id)
            except UnknownMarkerError:
                issues.append(
                    Issue(
                        "NonConformingMarker",
                        f"marker {marker!r} is not declared in the thesaurus",
                        where=f"node {n.node_id}",
                    )
                )
                continue
            if not ok:
                issues.append(
                    Issue(
                        "NonConformingMarker",
                        f"marker {marker!r} does not conform to type {n.type_id!r}",
                        where=f"node {n.node_id}",
                    )
                )
    for e in g.edges:
        if e.rel_id not in ont.relation_types:
            issues.append(
                Issue("UnknownRelation", f"relation {e.rel_id!r} is not declared", where=f"edge {e.edge_id}")
            )
            continue
        dangling = False
        for endpoint in (e.source, e.target):
            if not g.has_node(endpoint):
                issues.append(
                    Issue(
                        "DanglingEndpoint",
                        f"edge endpoint {endpoint!r} is not a node of the graph",
                        where=f"edge {e.edge_id}",
                    )
                )
                dangling = True
        if dangling:
            continue
        src = g.node(e.source)
        tgt = g.node(e.target)
        if src.type_id not in ont.concept_types or tgt.type_id not in ont.concept_types:
            continue  # already reported as UnknownType
        if not relation_applicable(ont, e.rel_id, src.type_id, tgt.type_id):
            sig = ont.relation_types[e.rel_id].signature
            issues.append(
                Issue(
                    "SignatureViolation",
                    f"relation {e.rel_id!r} requires ({sig.source} -> {sig.target}), "
                    f"got ({src.type_id} -> {tgt.type_id})",
                    where=f"edge {e.edge_id}",
                )
            )
    return issues


# --- wire format -----------------------------------------------------------------


def graph_to_doc(g: ConceptualGraph) -> dict[str, Any]:
    """Structured graph document; arrays sorted by id."""
    nodes = []
    for n in g.nodes:
        ref: dict[str, Any] = {"kind": n.referent.kind}
        if n.referent.value is not None:
            ref["value"] = n.referent.value
        nodes.append({"node_id": n.node_id, "type_id": n.type_id, "referent": ref})
    edges = [
        {"edge_id": e.edge_id, "rel_id": e.rel_id, "source": e.source, "target": e.target}
        for e in g.edges
    ]
    return {"nodes": nodes, "edges": edges}


def graph_from_doc(doc: Mapping[str, Any]) -> ConceptualGraph:
    from .errors import InvalidDocumentError

    if not isinstance(doc, Mapping) or "nodes" not in doc or "edges" not in doc:
        raise InvalidDocumentError("graph document must be an object with 'nodes' and 'edges'")
    nodes = []
    for entry in doc["nodes"]:
        ref = entry.get("referent") or {"kind": GENERIC}
        kind = ref.get("kind")
        if kind not in (GENERIC, VARIABLE, MARKER):
            raise InvalidDocumentError(f"unknown referent kind {kind!r}")
        value = ref.get("value")
        if kind != GENERIC and not value:
            raise InvalidDocumentError(f"referent of kind {kind!r} requires a value")
        nodes.append(
            ConceptNode(
                node_id=str(entry["node_id"]),
                type_id=str(entry["type_id"]),
                referent=Referent(kind, value if kind != GENERIC else None),
            )
        )
    edges = [
        RelationEdge(
            edge_id=str(entry["edge_id"]),
            rel_id=str(entry["rel_id"]),
            source=str(entry["source"]),
            target=str(entry["target"]),
        )
        for entry in doc["edges"]
    ]
    return ConceptualGraph.of(nodes, edges)
