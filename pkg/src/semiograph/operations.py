"""Graph transformations: restriction, join, simplification, projection,
common generalization, and type expansion/condensation.

All operations are pure: inputs are never mutated and identical inputs give
identical outputs, including list order.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable

from .errors import (
    AlreadyIndividualError,
    ConflictingMarkersError,
    IncompatibleTypesError,
    InvalidGraphError,
    JoinFailureError,
    NoDefinitionError,
    NonConformingMarkerError,
    NotASubtypeError,
    UnknownIdError,
)
from .graphs import (
    VARIABLE,
    ConceptNode,
    ConceptualGraph,
    Morphism,
    Referent,
    RelationEdge,
    TypeDefinition,
    validate_definition,
    validate_graph,
)
from .ontology import (
    Ontology,
    conforms,
    minimal_common_superrelations,
    minimal_common_supertypes,
    relation_applicable,
    relation_subsumes,
    subsumes,
)


def _fresh_id(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def _require_valid(ont: Ontology, g: ConceptualGraph, what: str) -> None:
    issues = validate_graph(ont, g)
    if issues:
        raise InvalidGraphError(f"{what} does not validate", issues=issues)


# --- restriction ------------------------------------------------------------------


def restrict(
    ont: Ontology,
    g: ConceptualGraph,
    node_id: str,
    to_type: str | None = None,
    to_marker: str | None = None,
) -> ConceptualGraph:
    """Specialize one node: lower its type and/or bind an individual marker."""
    if not g.has_node(node_id):
        raise UnknownIdError(f"no node {node_id!r} in graph", id=node_id)
    node = g.node(node_id)
    new_type = node.type_id
    if to_type is not None:
        if not subsumes(ont, node.type_id, to_type):
            raise NotASubtypeError(
                f"{to_type!r} is not a subtype of {node.type_id!r}", node=node_id
            )
        new_type = to_type
    new_ref = node.referent
    if to_marker is not None:
        if node.referent.is_marker and node.referent.value != to_marker:
            raise AlreadyIndividualError(
                f"node {node_id!r} already carries marker {node.referent.value!r}", node=node_id
            )
        if not conforms(ont, to_marker, new_type):
            raise NonConformingMarkerError(
                f"marker {to_marker!r} does not conform to {new_type!r}", node=node_id
            )
        new_ref = Referent.marker(to_marker)
    if to_marker is None and node.referent.is_marker and not conforms(ont, node.referent.value or "", new_type):
        raise NonConformingMarkerError(
            f"existing marker {node.referent.value!r} does not conform to {new_type!r}",
            node=node_id,
        )
    replaced = ConceptNode(node_id=node_id, type_id=new_type, referent=new_ref)
    return ConceptualGraph.of(
        [replaced if n.node_id == node_id else n for n in g.nodes], g.edges
    )


# --- join -------------------------------------------------------------------------


def _merge_referents(a: Referent, b: Referent) -> Referent:
    """More specific of the two; markers dominate anonymous referents."""
    if a.is_marker and b.is_marker:
        if a.value != b.value:
            raise ConflictingMarkersError(
                f"cannot merge distinct markers {a.value!r} and {b.value!r}"
            )
        return a
    if a.is_marker:
        return a
    if b.is_marker:
        return b
    # both anonymous; keep the first coreference label if any
    if a.kind == VARIABLE:
        return a
    return b


def join(
    ont: Ontology,
    g1: ConceptualGraph,
    node1: str,
    g2: ConceptualGraph,
    node2: str,
) -> ConceptualGraph:
    """Disjoint union of the two graphs with ``node1``/``node2`` merged."""
    if not g1.has_node(node1):
        raise UnknownIdError(f"no node {node1!r} in first graph", id=node1)
    if not g2.has_node(node2):
        raise UnknownIdError(f"no node {node2!r} in second graph", id=node2)
    n1, n2 = g1.node(node1), g2.node(node2)
    if subsumes(ont, n1.type_id, n2.type_id):
        merged_type = n2.type_id
    elif subsumes(ont, n2.type_id, n1.type_id):
        merged_type = n1.type_id
    else:
        raise IncompatibleTypesError(
            f"neither {n1.type_id!r} nor {n2.type_id!r} subsumes the other"
        )
    merged_ref = _merge_referents(n1.referent, n2.referent)
    if merged_ref.is_marker and not conforms(ont, merged_ref.value or "", merged_type):
        raise NonConformingMarkerError(
            f"marker {merged_ref.value!r} does not conform to merged type {merged_type!r}"
        )

    taken_nodes = {n.node_id for n in g1.nodes}
    taken_vars = {n.referent.value for n in g1.nodes if n.referent.kind == VARIABLE}
    node_rename: dict[str, str] = {}
    new_nodes: list[ConceptNode] = [
        ConceptNode(node1, merged_type, merged_ref) if n.node_id == node1 else n
        for n in g1.nodes
    ]
    merged_var = merged_ref.value if merged_ref.kind == VARIABLE else None
    for n in g2.nodes:
        if n.node_id == node2:
            node_rename[node2] = node1
            continue
        nid = _fresh_id(n.node_id, taken_nodes)
        taken_nodes.add(nid)
        node_rename[n.node_id] = nid
        ref = n.referent
        if ref.kind == VARIABLE and (ref.value in taken_vars or ref.value == merged_var):
            ref = Referent.variable(_fresh_id(ref.value or "v", {v for v in taken_vars if v} | ({merged_var} if merged_var else set())))
        if ref.kind == VARIABLE:
            taken_vars.add(ref.value)
        new_nodes.append(ConceptNode(nid, n.type_id, ref))

    taken_edges = {e.edge_id for e in g1.edges}
    new_edges: list[RelationEdge] = list(g1.edges)
    for e in g2.edges:
        eid = _fresh_id(e.edge_id, taken_edges)
        taken_edges.add(eid)
        new_edges.append(
            RelationEdge(eid, e.rel_id, node_rename[e.source], node_rename[e.target])
        )
    out = ConceptualGraph.of(new_nodes, new_edges)
    _require_valid(ont, out, "join result")
    return out


# --- simplification ------------------------------------------------------------------


def simplify(g: ConceptualGraph) -> ConceptualGraph:
    """Collapse duplicate edges (same relation, source and target); keep lowest edge id."""
    seen: dict[tuple[str, str, str], RelationEdge] = {}
    for e in g.edges:  # edges are sorted by id, so first wins
        seen.setdefault((e.rel_id, e.source, e.target), e)
    if len(seen) == len(g.edges):
        return g
    return ConceptualGraph.of(g.nodes, seen.values())


# --- projection ------------------------------------------------------------------------


def project(ont: Ontology, pattern: ConceptualGraph, target: ConceptualGraph) -> list[Morphism]:
    """All projections of ``pattern`` into ``target``.

    A morphism maps every pattern node to a target node whose type is subsumed
    by the pattern node's type (markers must match exactly), and every pattern
    edge to a target edge of a subsumed relation type connecting the images.
    Node maps may be non-injective. The result is exhaustive, duplicate-free
    and sorted lexicographically by mapped target node ids.
    """
    _require_valid(ont, pattern, "pattern")
    _require_valid(ont, target, "target")

    candidates: dict[str, list[str]] = {}
    for p in pattern.nodes:
        cands = []
        for t in target.nodes:
            if not subsumes(ont, p.type_id, t.type_id):
                continue
            if p.referent.is_marker and (
                not t.referent.is_marker or t.referent.value != p.referent.value
            ):
                continue
            cands.append(t.node_id)
        if not cands:
            return []
        candidates[p.node_id] = sorted(cands)

    # adjacency index of the target for edge image lookup
    by_endpoints: dict[tuple[str, str], list[RelationEdge]] = {}
    for e in target.edges:
        by_endpoints.setdefault((e.source, e.target), []).append(e)

    incident: dict[str, list[RelationEdge]] = {n.node_id: [] for n in pattern.nodes}
    for e in pattern.edges:
        incident[e.source].append(e)
        incident[e.target].append(e)

    order = sorted(
        (n.node_id for n in pattern.nodes),
        key=lambda nid: (-len(incident[nid]), nid),
    )
    assignment: dict[str, str] = {}
    results: list[Morphism] = []

    def edge_images(e: RelationEdge) -> list[str]:
        images = [
            t.edge_id
            for t in by_endpoints.get((assignment[e.source], assignment[e.target]), [])
            if relation_subsumes(ont, e.rel_id, t.rel_id)
        ]
        return sorted(images)

    def backtrack(i: int) -> None:
        if i == len(order):
            per_edge = []
            for e in pattern.edges:
                images = edge_images(e)
                if not images:
                    return
                per_edge.append(images)
            for combo in product(*per_edge):
                edge_map = {e.edge_id: img for e, img in zip(pattern.edges, combo)}
                results.append(Morphism.of(dict(assignment), edge_map))
            return
        nid = order[i]
        for cand in candidates[nid]:
            assignment[nid] = cand
            ok = True
            for e in incident[nid]:
                if e.source in assignment and e.target in assignment:
                    if not edge_images(e):
                        ok = False
                        break
            if ok:
                backtrack(i + 1)
            del assignment[nid]

    backtrack(0)
    results.sort(key=lambda m: m.sort_key())
    return results


# --- common generalization ------------------------------------------------------------


def common_generalization(
    ont: Ontology, g1: ConceptualGraph, g2: ConceptualGraph
) -> ConceptualGraph:
    """A generic graph projecting into both inputs.

    Greedy product construction: node pairs are ranked by how specific their
    least common supertype is, a maximal pairing is taken, and edges survive
    when both counterpart edges exist under a common super-relation that still
    fits the lifted endpoint types. Pairs whose types only meet at the root
    are dropped (unless both endpoints already are the root type), so graphs
    with disjoint vocabularies generalize to the empty graph.
    """
    _require_valid(ont, g1, "first graph")
    _require_valid(ont, g2, "second graph")

    pair_entries = []
    for n1 in g1.nodes:
        for n2 in g2.nodes:
            lubs = minimal_common_supertypes(ont, n1.type_id, n2.type_id)
            lub = lubs[0]
            if lub == ont.root_id and not (n1.type_id == n2.type_id == ont.root_id):
                continue
            depth = ont.concept_depth[lub]
            pair_entries.append(
                (-depth, n1.type_id != n2.type_id, n1.node_id, n2.node_id, lub)
            )
    pair_entries.sort()

    used1: set[str] = set()
    used2: set[str] = set()
    pairing: dict[tuple[str, str], str] = {}  # (n1, n2) -> lifted type
    for _, _, n1, n2, lub in pair_entries:
        if n1 in used1 or n2 in used2:
            continue
        used1.add(n1)
        used2.add(n2)
        pairing[(n1, n2)] = lub

    nodes = [
        ConceptNode(f"{n1}__{n2}", lub, Referent.generic())
        for (n1, n2), lub in sorted(pairing.items())
    ]
    pair_of_1 = {n1: (n1, n2) for (n1, n2) in pairing}
    pair_of_2 = {n2: (n1, n2) for (n1, n2) in pairing}

    edges: list[RelationEdge] = []
    seen_edges: set[tuple[str, str, str]] = set()
    for e1 in g1.edges:
        if e1.source not in pair_of_1 or e1.target not in pair_of_1:
            continue
        src_pair, tgt_pair = pair_of_1[e1.source], pair_of_1[e1.target]
        for e2 in g2.edges:
            if (e2.source, e2.target) != (src_pair[1], tgt_pair[1]):
                continue
            lubs = minimal_common_superrelations(ont, e1.rel_id, e2.rel_id)
            rel = next(
                (
                    r
                    for r in lubs
                    if relation_applicable(ont, r, pairing[src_pair], pairing[tgt_pair])
                ),
                None,
            )
            if rel is None:
                continue
            key = (rel, f"{src_pair[0]}__{src_pair[1]}", f"{tgt_pair[0]}__{tgt_pair[1]}")
            if key in seen_edges:
                continue
            seen_edges.add(key)
            edges.append(RelationEdge(f"{e1.edge_id}__{e2.edge_id}", *key))
    return ConceptualGraph.of(nodes, edges)


# --- type expansion / condensation -------------------------------------------------------


def _defs_by_type(defs: Iterable[TypeDefinition]) -> dict[str, TypeDefinition]:
    out: dict[str, TypeDefinition] = {}
    for d in defs:
        out[d.defined_type] = d
    return out


def expand_type(
    ont: Ontology,
    g: ConceptualGraph,
    node_id: str,
    defs: Iterable[TypeDefinition],
) -> ConceptualGraph:
    """Replace a node by its type's defining graph, joined at the genus node."""
    if not g.has_node(node_id):
        raise UnknownIdError(f"no node {node_id!r} in graph", id=node_id)
    node = g.node(node_id)
    by_type = _defs_by_type(defs)
    defn = by_type.get(node.type_id)
    if defn is None:
        raise NoDefinitionError(f"no definition for type {node.type_id!r}", type=node.type_id)
    validate_definition(ont, defn)

    taken_nodes = {n.node_id for n in g.nodes if n.node_id != node_id}
    taken_vars = {
        n.referent.value
        for n in g.nodes
        if n.referent.kind == VARIABLE and n.node_id != node_id
    }
    rename: dict[str, str] = {}
    new_nodes = [n for n in g.nodes if n.node_id != node_id]
    for bn in defn.body.nodes:
        if bn.node_id == defn.parameter:
            rename[bn.node_id] = node_id
            new_nodes.append(ConceptNode(node_id, bn.type_id, node.referent))
            continue
        nid = _fresh_id(f"{node_id}_{bn.node_id}", taken_nodes)
        taken_nodes.add(nid)
        rename[bn.node_id] = nid
        ref = bn.referent
        if ref.kind == VARIABLE and ref.value in taken_vars:
            ref = Referent.variable(_fresh_id(ref.value or "v", {v for v in taken_vars if v}))
        if ref.kind == VARIABLE:
            taken_vars.add(ref.value)
        new_nodes.append(ConceptNode(nid, bn.type_id, ref))

    taken_edges = {e.edge_id for e in g.edges}
    new_edges = list(g.edges)
    for be in defn.body.edges:
        eid = _fresh_id(f"{node_id}_{be.edge_id}", taken_edges)
        taken_edges.add(eid)
        new_edges.append(RelationEdge(eid, be.rel_id, rename[be.source], rename[be.target]))

    out = ConceptualGraph.of(new_nodes, new_edges)
    issues = validate_graph(ont, out)
    if issues:
        raise JoinFailureError(
            f"expansion of {node_id!r} produces an invalid graph: {issues[0]}",
            node=node_id,
        )
    return out


def _find_contraction_site(
    ont: Ontology, g: ConceptualGraph, defn: TypeDefinition
) -> tuple[dict[str, str], dict[str, str]] | None:
    """Leftmost admissible site where the definition body matches detachably.

    A site is admissible when the body projects injectively, the genus image
    keeps the genus type exactly, swallowed nodes are anonymous, no external
    edge touches a non-parameter matched node, and the contracted node's
    referent (if a marker) conforms to the defined type.
    """
    sites = []
    for m in project(ont, defn.body, g):
        nodes = m.nodes
        images = list(nodes.values())
        if len(set(images)) != len(images):
            continue  # need an actual subgraph, not a folded image
        param_img = nodes[defn.parameter]
        if g.node(param_img).type_id != defn.body.node(defn.parameter).type_id:
            continue
        matched_edges = set(m.edges.values())
        detachable = True
        for img in images:
            if img == param_img:
                continue
            if not g.node(img).referent.is_anonymous:
                detachable = False
                break
            for e in g.incident_edges(img):
                if e.edge_id not in matched_edges:
                    detachable = False
                    break
            if not detachable:
                break
        if not detachable:
            continue
        ref = g.node(param_img).referent
        if ref.is_marker and not conforms(ont, ref.value or "", defn.defined_type):
            continue
        sites.append((tuple(sorted(images)), nodes, m.edges))
    if not sites:
        return None
    sites.sort(key=lambda s: s[0])
    _, nodes, edges = sites[0]
    return nodes, edges


def contract_type(
    ont: Ontology, g: ConceptualGraph, defs: Iterable[TypeDefinition]
) -> ConceptualGraph:
    """Condense every detachable occurrence of a definition body into one node.

    Definitions are tried in defined-type order; sites leftmost-first (by the
    sorted tuple of matched node ids). Idempotent when nothing matches.
    """
    ordered = sorted(_defs_by_type(defs).values(), key=lambda d: d.defined_type)
    current = g
    applied: set[tuple] = set()
    while True:
        progress = False
        for defn in ordered:
            validate_definition(ont, defn)
            site = _find_contraction_site(ont, current, defn)
            if site is None:
                continue
            nodes, edges = site
            param_img = nodes[defn.parameter]
            fingerprint = (defn.defined_type, tuple(sorted(nodes.values())))
            if fingerprint in applied:
                continue
            swallowed = {img for img in nodes.values() if img != param_img}
            matched_edges = set(edges.values())
            new_nodes = [
                ConceptNode(param_img, defn.defined_type, current.node(param_img).referent)
                if n.node_id == param_img
                else n
                for n in current.nodes
                if n.node_id not in swallowed
            ]
            new_edges = [e for e in current.edges if e.edge_id not in matched_edges]
            candidate = ConceptualGraph.of(new_nodes, new_edges)
            if candidate == current:
                applied.add(fingerprint)
                continue
            current = candidate
            applied.add(fingerprint)
            progress = True
            break
        if not progress:
            return current
