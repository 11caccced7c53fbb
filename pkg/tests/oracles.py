"""Independent oracles the engine is checked against.

Everything here is deliberately brute force and shares no code with the
implementation paths it verifies.
"""

from __future__ import annotations

from itertools import product

from semiograph.graphs import ConceptualGraph, Morphism
from semiograph.ontology import Ontology


def ancestors_from_doc(doc: dict, section: str) -> dict[str, set[str]]:
    """Reflexive ancestor sets recomputed naively from a raw ontology document."""
    parents = {entry["id"]: set(entry.get("parent_ids", [])) for entry in doc[section]}
    closure: dict[str, set[str]] = {}

    def up(nid: str) -> set[str]:
        if nid in closure:
            return closure[nid]
        acc = {nid}
        for p in parents[nid]:
            acc |= up(p)
        closure[nid] = acc
        return acc

    for nid in parents:
        up(nid)
    return closure


def enumerate_morphisms(
    ont: Ontology, pattern: ConceptualGraph, target: ConceptualGraph
) -> list[Morphism]:
    """Every projection, found by enumerating all node maps and filtering."""

    def csub(a: str, b: str) -> bool:
        return a in ont.concept_ancestors[b]

    def rsub(a: str, b: str) -> bool:
        return a in ont.relation_ancestors[b]

    p_nodes = [n.node_id for n in pattern.nodes]
    t_nodes = [n.node_id for n in target.nodes]
    results: list[Morphism] = []
    if p_nodes and not t_nodes:
        return []
    for combo in product(t_nodes, repeat=len(p_nodes)):
        node_map = dict(zip(p_nodes, combo))
        ok = True
        for p in pattern.nodes:
            image = target.node(node_map[p.node_id])
            if not csub(p.type_id, image.type_id):
                ok = False
                break
            if p.referent.is_marker and (
                not image.referent.is_marker or image.referent.value != p.referent.value
            ):
                ok = False
                break
        if not ok:
            continue
        per_edge: list[list[str]] = []
        for e in pattern.edges:
            images = [
                t.edge_id
                for t in target.edges
                if t.source == node_map[e.source]
                and t.target == node_map[e.target]
                and rsub(e.rel_id, t.rel_id)
            ]
            if not images:
                ok = False
                break
            per_edge.append(sorted(images))
        if not ok:
            continue
        for edge_combo in product(*per_edge):
            edge_map = dict(zip((e.edge_id for e in pattern.edges), edge_combo))
            results.append(Morphism.of(node_map, edge_map))
    results.sort(key=lambda m: m.sort_key())
    return results


def exact_isomorphic(g1: ConceptualGraph, g2: ConceptualGraph) -> bool:
    """Structural isomorphism; anonymous referents (generic or variable) are equal."""
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False

    def refkey(n):
        return ("m", n.referent.value) if n.referent.is_marker else ("a",)

    n1 = [n.node_id for n in g1.nodes]
    n2 = [n.node_id for n in g2.nodes]

    def compatible(a: str, b: str) -> bool:
        na, nb = g1.node(a), g2.node(b)
        return na.type_id == nb.type_id and refkey(na) == refkey(nb)

    def edge_multiset(g: ConceptualGraph, mapping: dict[str, str], complete: bool) -> bool:
        # check edge correspondence for fully mapped graphs
        used: set[str] = set()
        for e in g1.edges:
            if e.source not in mapping or e.target not in mapping:
                if complete:
                    return False
                continue
            match = None
            for f in g2.edges:
                if (
                    f.edge_id not in used
                    and f.rel_id == e.rel_id
                    and f.source == mapping[e.source]
                    and f.target == mapping[e.target]
                ):
                    match = f.edge_id
                    break
            if match is None:
                return False
            used.add(match)
        return True

    def backtrack(i: int, mapping: dict[str, str], used: set[str]) -> bool:
        if i == len(n1):
            return edge_multiset(g1, mapping, complete=True)
        a = n1[i]
        for b in n2:
            if b in used or not compatible(a, b):
                continue
            mapping[a] = b
            used.add(b)
            if edge_multiset(g1, mapping, complete=False) and backtrack(i + 1, mapping, used):
                return True
            del mapping[a]
            used.discard(b)
        return False

    return backtrack(0, {}, set())


def enumerate_paths_dfs(scenario, max_len: int) -> list[list[str]]:
    """Bounded DFS with visited-set condition filtering; mirrors the documented semantics."""
    out: list[list[str]] = []

    def walk(path: list[str], visited: set[str]) -> None:
        cur = path[-1]
        if cur in scenario.final_ids:
            out.append(list(path))
        if len(path) >= max_len:
            return
        nexts = sorted(
            {
                t.to_id
                for t in scenario.transitions
                if t.from_id == cur and set(t.condition) <= visited
            }
        )
        for nxt in nexts:
            walk(path + [nxt], visited | {nxt})

    walk([scenario.start_id], {scenario.start_id})
    return out


def scan_segments(corpus, ont: Ontology, flt) -> list:
    """Linear scan over all segments applying the documented filter predicate."""

    def csub(a: str, b: str) -> bool:
        return a in ont.concept_ancestors[b]

    def rsub(a: str, b: str) -> bool:
        return a in ont.relation_ancestors[b]

    hits = []
    for seg in corpus.segments.values():
        if flt.concept is not None and not any(
            csub(flt.concept, n.type_id) for n in seg.annotation.nodes
        ):
            continue
        if flt.marker is not None and not any(
            n.referent.is_marker and n.referent.value == flt.marker
            for n in seg.annotation.nodes
        ):
            continue
        if flt.relation is not None and not any(
            rsub(flt.relation, e.rel_id) for e in seg.annotation.edges
        ):
            continue
        if flt.stratum_kind is not None and corpus.strata[seg.stratum_id].kind != flt.stratum_kind:
            continue
        if flt.time_window is not None:
            lo, hi = flt.time_window
            if not (seg.start_ms <= hi and seg.end_ms > lo):
                continue
        if flt.model is not None and seg.model_id != flt.model:
            continue
        hits.append(seg)
    hits.sort(key=lambda s: (corpus.strata[s.stratum_id].media_id, s.start_ms, s.id))
    return hits
