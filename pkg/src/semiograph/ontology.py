"""Domain ontologies: concept hierarchy, relation signatures, thesaurus, alignments.

An :class:`Ontology` bundles four things:

* a rooted DAG of concept types (multiple parents allowed),
* a DAG of binary relation types, each carrying a (source, target) signature,
* a thesaurus of individuals, each conforming to one or more concept types,
* per-individual alignment records into external vocabularies.

Ontology values are immutable once built; subsumption queries are answered
from ancestor closures precomputed at load time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import (
    CycleDetectedError,
    DanglingReferenceError,
    DuplicateIdError,
    EmptyConceptSetError,
    InvalidDocumentError,
    MissingRootError,
    UnknownIdError,
    UnknownMarkerError,
)


@dataclass(frozen=True)
class Alignment:
    """Pointer into an external vocabulary (thesaurus, authority list, ...)."""

    scheme: str
    external_ref: str


@dataclass(frozen=True)
class ConceptType:
    id: str
    label: str
    parent_ids: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Signature:
    """Types the endpoints of a relation must specialize."""

    source: str
    target: str


@dataclass(frozen=True)
class RelationType:
    id: str
    label: str
    signature: Signature
    parent_ids: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Individual:
    marker: str
    label: str
    concept_ids: frozenset[str]
    alignments: tuple[Alignment, ...] = ()


@dataclass(frozen=True)
class Ontology:
    concept_types: Mapping[str, ConceptType]
    relation_types: Mapping[str, RelationType]
    individuals: Mapping[str, Individual]
    root_id: str
    # ancestor closures include the element itself (reflexive)
    concept_ancestors: Mapping[str, frozenset[str]] = field(compare=False, repr=False, default_factory=dict)
    relation_ancestors: Mapping[str, frozenset[str]] = field(compare=False, repr=False, default_factory=dict)
    concept_depth: Mapping[str, int] = field(compare=False, repr=False, default_factory=dict)

    @classmethod
    def build(
        cls,
        concept_types: Iterable[ConceptType],
        relation_types: Iterable[RelationType],
        individuals: Iterable[Individual],
        root_id: str,
    ) -> "Ontology":
        """Assemble and validate an ontology; raises on any invariant violation."""
        concepts: dict[str, ConceptType] = {}
        for ct in concept_types:
            if ct.id in concepts:
                raise DuplicateIdError(f"duplicate concept type id {ct.id!r}", id=ct.id)
            concepts[ct.id] = ct
        relations: dict[str, RelationType] = {}
        for rt in relation_types:
            if rt.id in relations:
                raise DuplicateIdError(f"duplicate relation type id {rt.id!r}", id=rt.id)
            relations[rt.id] = rt
        markers: dict[str, Individual] = {}
        for ind in individuals:
            if ind.marker in markers:
                raise DuplicateIdError(f"duplicate individual marker {ind.marker!r}", id=ind.marker)
            markers[ind.marker] = ind

        for ct in concepts.values():
            for pid in ct.parent_ids:
                if pid not in concepts:
                    raise DanglingReferenceError(
                        f"concept type {ct.id!r} names unknown parent {pid!r}", id=pid
                    )
        concept_up = _closure(concepts, kind="concept type")

        if root_id not in concepts:
            raise MissingRootError(f"root type {root_id!r} is not declared")
        if concepts[root_id].parent_ids:
            raise MissingRootError(f"root type {root_id!r} must not have parents")
        for cid, up in concept_up.items():
            if root_id not in up:
                raise MissingRootError(f"concept type {cid!r} does not reach the root {root_id!r}")

        for rt in relations.values():
            for pid in rt.parent_ids:
                if pid not in relations:
                    raise DanglingReferenceError(
                        f"relation type {rt.id!r} names unknown parent {pid!r}", id=pid
                    )
            for endpoint in (rt.signature.source, rt.signature.target):
                if endpoint not in concepts:
                    raise DanglingReferenceError(
                        f"relation type {rt.id!r} signature names unknown concept {endpoint!r}",
                        id=endpoint,
                    )
        relation_up = _closure(relations, kind="relation type")

        # covariance: a child relation may only tighten its parent's signature
        for rt in relations.values():
            for pid in rt.parent_ids:
                parent = relations[pid]
                if parent.signature.source not in concept_up[rt.signature.source]:
                    raise DanglingReferenceError(
                        f"relation type {rt.id!r} source {rt.signature.source!r} is not "
                        f"subsumed by parent {pid!r} source {parent.signature.source!r}",
                        id=rt.id,
                    )
                if parent.signature.target not in concept_up[rt.signature.target]:
                    raise DanglingReferenceError(
                        f"relation type {rt.id!r} target {rt.signature.target!r} is not "
                        f"subsumed by parent {pid!r} target {parent.signature.target!r}",
                        id=rt.id,
                    )

        for ind in markers.values():
            if not ind.concept_ids:
                raise EmptyConceptSetError(
                    f"individual {ind.marker!r} declares no concept types", individual=ind.marker
                )
            for cid in ind.concept_ids:
                if cid not in concepts:
                    raise DanglingReferenceError(
                        f"individual {ind.marker!r} names unknown concept {cid!r}", id=cid
                    )

        depth: dict[str, int] = {}

        def depth_of(cid: str) -> int:
            if cid in depth:
                return depth[cid]
            ct = concepts[cid]
            d = 0 if not ct.parent_ids else 1 + max(depth_of(p) for p in ct.parent_ids)
            depth[cid] = d
            return d

        for cid in concepts:
            depth_of(cid)

        return cls(
            concept_types=concepts,
            relation_types=relations,
            individuals=markers,
            root_id=root_id,
            concept_ancestors=concept_up,
            relation_ancestors=relation_up,
            concept_depth=depth,
        )


def _closure(nodes: Mapping[str, Any], kind: str) -> dict[str, frozenset[str]]:
    """Reflexive-transitive ancestor closure over ``parent_ids``; rejects cycles."""
    done: dict[str, frozenset[str]] = {}
    state: dict[str, int] = {}  # 1 = on stack, 2 = finished
    stack_path: list[str] = []

    def visit(nid: str) -> frozenset[str]:
        if state.get(nid) == 2:
            return done[nid]
        if state.get(nid) == 1:
            cycle = stack_path[stack_path.index(nid):] + [nid]
            raise CycleDetectedError(
                f"{kind} hierarchy contains a cycle: {' -> '.join(cycle)}", path=cycle
            )
        state[nid] = 1
        stack_path.append(nid)
        acc = {nid}
        for pid in sorted(nodes[nid].parent_ids):
            acc |= visit(pid)
        stack_path.pop()
        state[nid] = 2
        done[nid] = frozenset(acc)
        return done[nid]

    for nid in nodes:
        visit(nid)
    return done


# --- document I/O -------------------------------------------------------------


def load_ontology(doc: Mapping[str, Any]) -> Ontology:
    """Build an ontology from a parsed ontology document (see file format docs)."""
    if not isinstance(doc, Mapping):
        raise InvalidDocumentError("ontology document must be a JSON object")
    for key in ("concept_types", "relation_types", "individuals", "root_id"):
        if key not in doc:
            raise InvalidDocumentError(f"ontology document is missing key {key!r}")

    def _str(value: Any, what: str) -> str:
        if not isinstance(value, str) or not value:
            raise InvalidDocumentError(f"{what} must be a non-empty string")
        return value

    concepts = []
    for entry in doc["concept_types"]:
        concepts.append(
            ConceptType(
                id=_str(entry.get("id"), "concept type id"),
                label=_str(entry.get("label"), "concept type label"),
                parent_ids=frozenset(entry.get("parent_ids", [])),
            )
        )
    relations = []
    for entry in doc["relation_types"]:
        sig = entry.get("signature") or {}
        relations.append(
            RelationType(
                id=_str(entry.get("id"), "relation type id"),
                label=_str(entry.get("label"), "relation type label"),
                parent_ids=frozenset(entry.get("parent_ids", [])),
                signature=Signature(
                    source=_str(sig.get("source"), "signature source"),
                    target=_str(sig.get("target"), "signature target"),
                ),
            )
        )
    individuals = []
    for entry in doc["individuals"]:
        alignments = tuple(
            Alignment(
                scheme=_str(a.get("scheme"), "alignment scheme"),
                external_ref=_str(a.get("external_ref"), "alignment external_ref"),
            )
            for a in entry.get("alignments", [])
        )
        individuals.append(
            Individual(
                marker=_str(entry.get("marker"), "individual marker"),
                label=_str(entry.get("label"), "individual label"),
                concept_ids=frozenset(entry.get("concept_ids", [])),
                alignments=alignments,
            )
        )
    return Ontology.build(concepts, relations, individuals, _str(doc["root_id"], "root_id"))


def ontology_to_doc(ont: Ontology) -> dict[str, Any]:
    """Serializable document; arrays sorted by id for deterministic output."""
    return {
        "concept_types": [
            {"id": ct.id, "label": ct.label, "parent_ids": sorted(ct.parent_ids)}
            for ct in sorted(ont.concept_types.values(), key=lambda c: c.id)
        ],
        "relation_types": [
            {
                "id": rt.id,
                "label": rt.label,
                "parent_ids": sorted(rt.parent_ids),
                "signature": {"source": rt.signature.source, "target": rt.signature.target},
            }
            for rt in sorted(ont.relation_types.values(), key=lambda r: r.id)
        ],
        "individuals": [
            {
                "marker": ind.marker,
                "label": ind.label,
                "concept_ids": sorted(ind.concept_ids),
                "alignments": [
                    {"scheme": a.scheme, "external_ref": a.external_ref} for a in ind.alignments
                ],
            }
            for ind in sorted(ont.individuals.values(), key=lambda i: i.marker)
        ],
        "root_id": ont.root_id,
    }


# --- subsumption algebra --------------------------------------------------------


def _require_concept(ont: Ontology, cid: str) -> None:
    if cid not in ont.concept_types:
        raise UnknownIdError(f"unknown concept type {cid!r}", id=cid)


def subsumes(ont: Ontology, a: str, b: str) -> bool:
    """True iff concept ``a`` is an ancestor of ``b`` (reflexive-transitive)."""
    _require_concept(ont, a)
    _require_concept(ont, b)
    return a in ont.concept_ancestors[b]


def minimal_common_supertypes(ont: Ontology, a: str, b: str) -> list[str]:
    """The antichain of most specific common ancestors of ``a`` and ``b``, sorted by id.

    Never empty: the root is always a common ancestor.
    """
    _require_concept(ont, a)
    _require_concept(ont, b)
    common = ont.concept_ancestors[a] & ont.concept_ancestors[b]
    minimal = [
        c
        for c in common
        if not any(d != c and c in ont.concept_ancestors[d] for d in common)
    ]
    return sorted(minimal)


def relation_subsumes(ont: Ontology, a: str, b: str) -> bool:
    """True iff relation ``a`` is an ancestor of relation ``b`` (reflexive-transitive)."""
    if a not in ont.relation_types:
        raise UnknownIdError(f"unknown relation type {a!r}", id=a)
    if b not in ont.relation_types:
        raise UnknownIdError(f"unknown relation type {b!r}", id=b)
    return a in ont.relation_ancestors[b]


def minimal_common_superrelations(ont: Ontology, a: str, b: str) -> list[str]:
    """Most specific common ancestors in the relation hierarchy; may be empty."""
    if a not in ont.relation_types or b not in ont.relation_types:
        raise UnknownIdError("unknown relation type", ids=[a, b])
    common = ont.relation_ancestors[a] & ont.relation_ancestors[b]
    minimal = [
        r
        for r in common
        if not any(s != r and r in ont.relation_ancestors[s] for s in common)
    ]
    return sorted(minimal)


def relation_applicable(ont: Ontology, rel: str, src: str, tgt: str) -> bool:
    """True iff the relation's signature admits the given endpoint types."""
    if rel not in ont.relation_types:
        raise UnknownIdError(f"unknown relation type {rel!r}", id=rel)
    sig = ont.relation_types[rel].signature
    return subsumes(ont, sig.source, src) and subsumes(ont, sig.target, tgt)


def conforms(ont: Ontology, marker: str, concept: str) -> bool:
    """True iff some declared type of the individual is subsumed by ``concept``."""
    if marker not in ont.individuals:
        raise UnknownMarkerError(f"unknown individual marker {marker!r}", marker=marker)
    _require_concept(ont, concept)
    return any(concept in ont.concept_ancestors[cid] for cid in ont.individuals[marker].concept_ids)


def individuals_for(ont: Ontology, concept: str) -> list[Individual]:
    """All individuals conforming to ``concept``, sorted by marker."""
    _require_concept(ont, concept)
    hits = [ind for ind in ont.individuals.values() if conforms(ont, ind.marker, concept)]
    return sorted(hits, key=lambda i: i.marker)
