"""Stratified corpora: media resources, strata, time-coded annotated segments,
plus the model library and dynamic form-schema derivation.

Time intervals are half-open ``[start_ms, end_ms)``. A segment's annotation
must be a specialization of its model's graph: the model projects into the
annotation. Corpus values are immutable; mutations return new values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .errors import (
    AnnotationInvalidError,
    InvalidDocumentError,
    InvalidModelError,
    Issue,
    TimecodeOutOfRangeError,
    UnknownIdError,
    UnknownMediaError,
    UnknownStratumError,
)
from .graphs import ConceptualGraph, graph_from_doc, graph_to_doc, validate_graph
from .notation import parse_graph
from .ontology import Ontology, individuals_for, relation_subsumes, subsumes
from .operations import project

STRATUM_KINDS = ("thematic", "rhetoric", "visual", "acoustic", "other")


@dataclass(frozen=True)
class MediaResource:
    id: str
    title: str
    uri: str
    duration_ms: int


@dataclass(frozen=True)
class Stratum:
    id: str
    media_id: str
    kind: str


@dataclass(frozen=True)
class Segment:
    id: str
    stratum_id: str
    start_ms: int
    end_ms: int
    model_id: str
    annotation: ConceptualGraph
    version: int = 1


@dataclass(frozen=True)
class ModelTemplate:
    """A named generic graph with a head concept (a "subject" guiding analysis)."""

    id: str
    label: str
    head_node: str
    graph: ConceptualGraph


@dataclass(frozen=True)
class FormField:
    relation_id: str
    relation_label: str
    target_type_id: str
    value_domain: tuple[str, ...] | str  # markers, or "free"
    required: bool


@dataclass(frozen=True)
class FormSchema:
    model_id: str
    fields: tuple[FormField, ...]


@dataclass(frozen=True)
class Corpus:
    media: Mapping[str, MediaResource] = field(default_factory=dict)
    strata: Mapping[str, Stratum] = field(default_factory=dict)
    segments: Mapping[str, Segment] = field(default_factory=dict)
    model_library: Mapping[str, ModelTemplate] = field(default_factory=dict)

    @classmethod
    def of(
        cls,
        media: Iterable[MediaResource] = (),
        strata: Iterable[Stratum] = (),
        segments: Iterable[Segment] = (),
        models: Iterable[ModelTemplate] = (),
    ) -> "Corpus":
        return cls(
            media={m.id: m for m in media},
            strata={s.id: s for s in strata},
            segments={s.id: s for s in segments},
            model_library={m.id: m for m in models},
        )

    def media_of_segment(self, seg: Segment) -> MediaResource:
        return self.media[self.strata[seg.stratum_id].media_id]


# --- validation ------------------------------------------------------------------


def validate_model(ont: Ontology, model: ModelTemplate) -> list[Issue]:
    issues = validate_graph(ont, model.graph)
    if not model.graph.is_generic:
        issues.append(
            Issue("InvalidModel", "model graph must be generic (no markers)", where=f"model {model.id}")
        )
    if not model.graph.has_node(model.head_node):
        issues.append(
            Issue(
                "InvalidModel",
                f"head node {model.head_node!r} is not a node of the model graph",
                where=f"model {model.id}",
            )
        )
    return issues


def validate_annotation(
    ont: Ontology, model: ModelTemplate, annotation: ConceptualGraph
) -> list[Issue]:
    """Graph-level issues plus NoProjection when the model does not instantiate."""
    issues = validate_graph(ont, annotation)
    if issues:
        return issues
    if not project(ont, model.graph, annotation):
        issues.append(
            Issue(
                "NoProjection",
                f"annotation does not instantiate model {model.id!r}",
                where=f"model {model.id}",
            )
        )
    return issues


def validate_corpus(ont: Ontology, corpus: Corpus) -> list[Issue]:
    """Full audit: referential integrity, timecodes, model and annotation validity."""
    issues: list[Issue] = []
    for m in corpus.media.values():
        if m.duration_ms <= 0:
            issues.append(
                Issue("TimecodeOutOfRange", "media duration must be positive", where=f"media {m.id}")
            )
    for s in corpus.strata.values():
        if s.media_id not in corpus.media:
            issues.append(
                Issue("DanglingReference", f"stratum names unknown media {s.media_id!r}", where=f"stratum {s.id}")
            )
        if s.kind not in STRATUM_KINDS:
            issues.append(
                Issue("InvalidDocument", f"unknown stratum kind {s.kind!r}", where=f"stratum {s.id}")
            )
    for model in corpus.model_library.values():
        for issue in validate_model(ont, model):
            where = f"model {model.id}" + (f" / {issue.where}" if issue.where else "")
            issues.append(replace(issue, where=where))
    for seg in corpus.segments.values():
        where = f"segment {seg.id}"
        stratum = corpus.strata.get(seg.stratum_id)
        if stratum is None:
            issues.append(
                Issue("UnknownStratum", f"unknown stratum {seg.stratum_id!r}", where=where)
            )
            continue
        media = corpus.media.get(stratum.media_id)
        if media is not None and not (0 <= seg.start_ms < seg.end_ms <= media.duration_ms):
            issues.append(
                Issue(
                    "TimecodeOutOfRange",
                    f"[{seg.start_ms}, {seg.end_ms}) outside media duration {media.duration_ms}",
                    where=where,
                )
            )
        model = corpus.model_library.get(seg.model_id)
        if model is None:
            issues.append(Issue("UnknownId", f"unknown model {seg.model_id!r}", where=where))
            continue
        for issue in validate_annotation(ont, model, seg.annotation):
            inner = f"{where} / {issue.where}" if issue.where else where
            issues.append(replace(issue, where=inner))
    return issues


# --- form schemas ----------------------------------------------------------------


def derive_form_schema(ont: Ontology, model: ModelTemplate) -> FormSchema:
    """One field per edge incident to the model's head node, in edge-id order.

    The field's target type is the far endpoint's type; its value domain is
    the thesaurus slice for that type, or "free" when no individual conforms.
    """
    issues = validate_model(ont, model)
    if issues:
        raise InvalidModelError(f"model {model.id!r} does not validate: {issues[0]}")
    fields: list[FormField] = []
    for e in model.graph.edges:
        if model.head_node not in (e.source, e.target):
            continue
        far_id = e.target if e.source == model.head_node else e.source
        far = model.graph.node(far_id)
        markers = tuple(ind.marker for ind in individuals_for(ont, far.type_id))
        fields.append(
            FormField(
                relation_id=e.rel_id,
                relation_label=ont.relation_types[e.rel_id].label,
                target_type_id=far.type_id,
                value_domain=markers if markers else "free",
                required=far.referent.is_marker,
            )
        )
    return FormSchema(model_id=model.id, fields=tuple(fields))


# --- segment store ------------------------------------------------------------------


def upsert_segment(corpus: Corpus, ont: Ontology, segment: Segment) -> Corpus:
    """Insert or replace a segment; raises unless the result is fully valid."""
    stratum = corpus.strata.get(segment.stratum_id)
    if stratum is None:
        raise UnknownStratumError(f"unknown stratum {segment.stratum_id!r}", id=segment.stratum_id)
    media = corpus.media[stratum.media_id]
    if not (0 <= segment.start_ms < segment.end_ms <= media.duration_ms):
        raise TimecodeOutOfRangeError(
            f"[{segment.start_ms}, {segment.end_ms}) outside media duration {media.duration_ms}",
            segment=segment.id,
        )
    model = corpus.model_library.get(segment.model_id)
    if model is None:
        raise UnknownIdError(f"unknown model {segment.model_id!r}", id=segment.model_id)
    report = validate_annotation(ont, model, segment.annotation)
    if report:
        raise AnnotationInvalidError(
            f"annotation of segment {segment.id!r} is invalid", issues=report
        )
    segments = dict(corpus.segments)
    segments[segment.id] = segment
    return Corpus(
        media=corpus.media,
        strata=corpus.strata,
        segments=segments,
        model_library=corpus.model_library,
    )


@dataclass(frozen=True)
class QueryFilter:
    concept: str | None = None
    marker: str | None = None
    relation: str | None = None
    stratum_kind: str | None = None
    time_window: tuple[int, int] | None = None
    model: str | None = None


def _segment_sort_key(corpus: Corpus, seg: Segment) -> tuple:
    return (corpus.strata[seg.stratum_id].media_id, seg.start_ms, seg.id)


def segment_matches(corpus: Corpus, ont: Ontology, seg: Segment, flt: QueryFilter) -> bool:
    """Conjunctive filter predicate, subsumption-aware on concept and relation."""
    if flt.concept is not None:
        if flt.concept not in ont.concept_types:
            raise UnknownIdError(f"unknown concept type {flt.concept!r}", id=flt.concept)
        if not any(subsumes(ont, flt.concept, n.type_id) for n in seg.annotation.nodes):
            return False
    if flt.marker is not None:
        if not any(
            n.referent.is_marker and n.referent.value == flt.marker
            for n in seg.annotation.nodes
        ):
            return False
    if flt.relation is not None:
        if flt.relation not in ont.relation_types:
            raise UnknownIdError(f"unknown relation type {flt.relation!r}", id=flt.relation)
        if not any(relation_subsumes(ont, flt.relation, e.rel_id) for e in seg.annotation.edges):
            return False
    if flt.stratum_kind is not None:
        if corpus.strata[seg.stratum_id].kind != flt.stratum_kind:
            return False
    if flt.time_window is not None:
        lo, hi = flt.time_window
        if not (seg.start_ms <= hi and seg.end_ms > lo):
            return False
    if flt.model is not None and seg.model_id != flt.model:
        return False
    return True


def query_segments(corpus: Corpus, ont: Ontology, flt: QueryFilter) -> list[Segment]:
    """Segments satisfying every given criterion, sorted by (media, start, id)."""
    hits = [s for s in corpus.segments.values() if segment_matches(corpus, ont, s, flt)]
    return sorted(hits, key=lambda s: _segment_sort_key(corpus, s))


def segments_at_instant(corpus: Corpus, media_id: str, t_ms: int) -> dict[str, list[Segment]]:
    """Segments covering the instant, grouped by stratum kind (cross-strata view)."""
    media = corpus.media.get(media_id)
    if media is None:
        raise UnknownMediaError(f"unknown media {media_id!r}", id=media_id)
    if not (0 <= t_ms <= media.duration_ms):
        raise TimecodeOutOfRangeError(f"instant {t_ms} outside [0, {media.duration_ms}]")
    groups: dict[str, list[Segment]] = {}
    for seg in corpus.segments.values():
        stratum = corpus.strata[seg.stratum_id]
        if stratum.media_id != media_id:
            continue
        if seg.start_ms <= t_ms < seg.end_ms:
            groups.setdefault(stratum.kind, []).append(seg)
    for kind in groups:
        groups[kind].sort(key=lambda s: (s.start_ms, s.id))
    return dict(sorted(groups.items()))


# --- documents -----------------------------------------------------------------------


def _graph_from_entry(entry: Mapping[str, Any], graph_key: str, text_key: str) -> ConceptualGraph:
    if text_key in entry and entry[text_key] is not None:
        return parse_graph(entry[text_key])
    if graph_key in entry and entry[graph_key] is not None:
        return graph_from_doc(entry[graph_key])
    raise InvalidDocumentError(f"expected {graph_key!r} or {text_key!r}")


def model_from_doc(doc: Mapping[str, Any]) -> ModelTemplate:
    try:
        return ModelTemplate(
            id=str(doc["id"]),
            label=str(doc["label"]),
            head_node=str(doc["head_node"]),
            graph=_graph_from_entry(doc, "graph", "graph_text"),
        )
    except KeyError as exc:
        raise InvalidDocumentError(f"model document is missing key {exc}") from exc


def model_to_doc(model: ModelTemplate) -> dict[str, Any]:
    return {
        "id": model.id,
        "label": model.label,
        "head_node": model.head_node,
        "graph": graph_to_doc(model.graph),
    }


def form_schema_to_doc(schema: FormSchema) -> dict[str, Any]:
    return {
        "model_id": schema.model_id,
        "fields": [
            {
                "relation_id": f.relation_id,
                "relation_label": f.relation_label,
                "target_type_id": f.target_type_id,
                "value_domain": list(f.value_domain) if isinstance(f.value_domain, tuple) else f.value_domain,
                "required": f.required,
            }
            for f in schema.fields
        ],
    }


def segment_from_doc(doc: Mapping[str, Any]) -> Segment:
    try:
        return Segment(
            id=str(doc["id"]),
            stratum_id=str(doc["stratum_id"]),
            start_ms=int(doc["start_ms"]),
            end_ms=int(doc["end_ms"]),
            model_id=str(doc["model_id"]),
            annotation=_graph_from_entry(doc, "annotation", "annotation_text"),
            version=int(doc.get("version", 1)),
        )
    except KeyError as exc:
        raise InvalidDocumentError(f"segment document is missing key {exc}") from exc


def segment_to_doc(seg: Segment) -> dict[str, Any]:
    return {
        "id": seg.id,
        "stratum_id": seg.stratum_id,
        "start_ms": seg.start_ms,
        "end_ms": seg.end_ms,
        "model_id": seg.model_id,
        "annotation": graph_to_doc(seg.annotation),
        "version": seg.version,
    }


def corpus_from_doc(doc: Mapping[str, Any]) -> Corpus:
    if not isinstance(doc, Mapping):
        raise InvalidDocumentError("corpus document must be a JSON object")
    for key in ("media", "strata", "segments", "models"):
        if key not in doc:
            raise InvalidDocumentError(f"corpus document is missing key {key!r}")
    media = [
        MediaResource(
            id=str(m["id"]),
            title=str(m["title"]),
            uri=str(m["uri"]),
            duration_ms=int(m["duration_ms"]),
        )
        for m in doc["media"]
    ]
    strata = [
        Stratum(id=str(s["id"]), media_id=str(s["media_id"]), kind=str(s["kind"]))
        for s in doc["strata"]
    ]
    segments = [segment_from_doc(s) for s in doc["segments"]]
    models = [model_from_doc(m) for m in doc["models"]]
    seen: set[str] = set()
    for coll, what in ((media, "media"), (strata, "stratum"), (segments, "segment"), (models, "model")):
        ids = [getattr(x, "id") for x in coll]
        for i in ids:
            key = f"{what}:{i}"
            if key in seen:
                raise InvalidDocumentError(f"duplicate {what} id {i!r}")
            seen.add(key)
    return Corpus.of(media, strata, segments, models)


def corpus_to_doc(corpus: Corpus, model_ids: Iterable[str] | None = None) -> dict[str, Any]:
    """Corpus document with structured annotations; arrays sorted by id.

    ``model_ids`` selects which library entries belong in the file (the rest
    may be stored as standalone model files).
    """
    selected = set(model_ids) if model_ids is not None else set(corpus.model_library)
    return {
        "media": [
            {"id": m.id, "title": m.title, "uri": m.uri, "duration_ms": m.duration_ms}
            for m in sorted(corpus.media.values(), key=lambda m: m.id)
        ],
        "strata": [
            {"id": s.id, "media_id": s.media_id, "kind": s.kind}
            for s in sorted(corpus.strata.values(), key=lambda s: s.id)
        ],
        "segments": [
            segment_to_doc(s) for s in sorted(corpus.segments.values(), key=lambda s: s.id)
        ],
        "models": [
            model_to_doc(m)
            for m in sorted(corpus.model_library.values(), key=lambda m: m.id)
            if m.id in selected
        ],
    }
