"""HTTP service over a workspace.

Readers always see a consistent in-memory snapshot. Segment writes are
validated, applied serially per corpus, persisted atomically and only then
swapped into the snapshot, so a killed process never corrupts the workspace.
Ontology, models and scenarios change on disk; POST /api/reload picks them up.
"""

from __future__ import annotations

import threading
from dataclasses import replace
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import workspace as ws_mod
from .corpus import (
    QueryFilter,
    derive_form_schema,
    form_schema_to_doc,
    corpus_to_doc,
    model_to_doc,
    query_segments,
    segment_from_doc,
    segment_to_doc,
    segments_at_instant,
    upsert_segment,
    validate_annotation,
)
from .errors import (
    ScsError,
    UnknownIdError,
    VersionConflictError,
    WorkspaceIOError,
)
from .notation import ParseError
from .ontology import ontology_to_doc
from .storyteller import (
    compile_publication,
    enumerate_paths,
    manifest_to_doc,
    scenario_to_doc,
)

MAIN_CORPUS_ID = "main"


class WorkspaceState:
    """Current snapshot plus the single serialized writer path."""

    def __init__(self, root: Path):
        self.root = root
        self.lock = threading.Lock()
        self.ws = ws_mod.load_workspace(root)

    def reload(self) -> None:
        with self.lock:
            self.ws = ws_mod.load_workspace(self.root)

    def write_segment(self, doc: dict[str, Any], *, expect_new: bool, sid: str | None = None) -> dict[str, Any]:
        with self.lock:
            ws = self.ws
            segment = segment_from_doc(doc)
            if sid is not None and segment.id != sid:
                raise UnknownIdError(
                    f"segment id {segment.id!r} does not match URL id {sid!r}", id=sid
                )
            existing = ws.corpus.segments.get(segment.id)
            if expect_new:
                if existing is not None:
                    raise VersionConflictError(
                        f"segment {segment.id!r} already exists", id=segment.id
                    )
                segment = replace(segment, version=1)
            else:
                if existing is None:
                    raise UnknownIdError(f"unknown segment {segment.id!r}", id=segment.id)
                if segment.version != existing.version:
                    raise VersionConflictError(
                        f"segment {segment.id!r} changed (stored version {existing.version}, "
                        f"got {segment.version})",
                        id=segment.id,
                        stored_version=existing.version,
                    )
                segment = replace(segment, version=existing.version + 1)
            corpus = upsert_segment(ws.corpus, ws.ontology, segment)
            new_ws = replace(ws, corpus=corpus)
            ws_mod.save_corpus(new_ws)
            self.ws = new_ws
            return segment_to_doc(segment)


def create_app(workspace_root: str | Path) -> FastAPI:
    state = WorkspaceState(Path(workspace_root))
    app = FastAPI(title="scs workspace service")
    app.state.workspace = state

    @app.exception_handler(ScsError)
    async def scs_error_handler(_: Request, exc: ScsError) -> JSONResponse:
        return JSONResponse(status_code=exc.http_status, content=exc.as_dict())

    @app.exception_handler(ParseError)
    async def parse_error_handler(_: Request, exc: ParseError) -> JSONResponse:
        return JSONResponse(status_code=400, content=exc.as_dict())

    def corpus_or_404(corpus_id: str):
        if corpus_id != MAIN_CORPUS_ID:
            raise UnknownIdError(f"unknown corpus {corpus_id!r}", id=corpus_id)
        return state.ws.corpus

    @app.get("/api/ontology")
    def get_ontology() -> dict:
        return ontology_to_doc(state.ws.ontology)

    @app.post("/api/reload")
    def reload() -> dict:
        state.reload()
        return {"status": "reloaded"}

    @app.get("/api/models")
    def list_models() -> list[dict]:
        return [
            model_to_doc(m)
            for m in sorted(state.ws.corpus.model_library.values(), key=lambda m: m.id)
        ]

    @app.get("/api/models/{model_id}")
    def get_model(model_id: str) -> dict:
        model = state.ws.corpus.model_library.get(model_id)
        if model is None:
            raise UnknownIdError(f"unknown model {model_id!r}", id=model_id)
        return model_to_doc(model)

    @app.get("/api/models/{model_id}/form")
    def get_form(model_id: str) -> dict:
        model = state.ws.corpus.model_library.get(model_id)
        if model is None:
            raise UnknownIdError(f"unknown model {model_id!r}", id=model_id)
        return form_schema_to_doc(derive_form_schema(state.ws.ontology, model))

    @app.get("/api/corpora/{corpus_id}")
    def get_corpus(corpus_id: str) -> dict:
        return corpus_to_doc(corpus_or_404(corpus_id))

    @app.get("/api/corpora/{corpus_id}/segments")
    def list_segments(corpus_id: str) -> list[dict]:
        corpus = corpus_or_404(corpus_id)
        return [segment_to_doc(s) for s in sorted(corpus.segments.values(), key=lambda s: s.id)]

    @app.get("/api/corpora/{corpus_id}/segments/{sid}")
    def get_segment(corpus_id: str, sid: str) -> dict:
        corpus = corpus_or_404(corpus_id)
        seg = corpus.segments.get(sid)
        if seg is None:
            raise UnknownIdError(f"unknown segment {sid!r}", id=sid)
        return segment_to_doc(seg)

    @app.post("/api/corpora/{corpus_id}/segments", status_code=201)
    def post_segment(corpus_id: str, body: dict) -> dict:
        corpus_or_404(corpus_id)
        return state.write_segment(body, expect_new=True)

    @app.put("/api/corpora/{corpus_id}/segments/{sid}")
    def put_segment(corpus_id: str, sid: str, body: dict) -> dict:
        corpus_or_404(corpus_id)
        return state.write_segment(body, expect_new=False, sid=sid)

    @app.get("/api/segments")
    def search_segments(
        concept: str | None = None,
        marker: str | None = None,
        relation: str | None = None,
        stratum: str | None = None,
        from_ms: int | None = None,
        to_ms: int | None = None,
        model: str | None = None,
    ) -> list[dict]:
        ws = state.ws
        window = None
        if from_ms is not None or to_ms is not None:
            lo = from_ms if from_ms is not None else 0
            hi = to_ms if to_ms is not None else max(
                (m.duration_ms for m in ws.corpus.media.values()), default=0
            )
            window = (lo, hi)
        flt = QueryFilter(
            concept=concept,
            marker=marker,
            relation=relation,
            stratum_kind=stratum,
            time_window=window,
            model=model,
        )
        return [segment_to_doc(s) for s in query_segments(ws.corpus, ws.ontology, flt)]

    @app.get("/api/media/{media_id}/at/{t_ms}")
    def media_at(media_id: str, t_ms: int) -> dict:
        groups = segments_at_instant(state.ws.corpus, media_id, t_ms)
        return {kind: [segment_to_doc(s) for s in segs] for kind, segs in groups.items()}

    @app.post("/api/validate")
    def validate(body: dict) -> dict:
        ws = state.ws
        model_id = body.get("model_id")
        model = ws.corpus.model_library.get(model_id or "")
        if model is None:
            raise UnknownIdError(f"unknown model {model_id!r}", id=model_id)
        from .graphs import graph_from_doc
        from .notation import parse_graph

        if "annotation_text" in body and body["annotation_text"] is not None:
            annotation = parse_graph(body["annotation_text"])
        else:
            annotation = graph_from_doc(body.get("annotation") or {})
        issues = validate_annotation(ws.ontology, model, annotation)
        return {"issues": [vars(i) for i in issues], "valid": not issues}

    @app.get("/api/scenarios")
    def list_scenarios() -> list[dict]:
        return [scenario_to_doc(s) for sid, s in sorted(state.ws.scenarios.items())]

    @app.get("/api/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str) -> dict:
        return scenario_to_doc(state.ws.scenario(scenario_id))

    @app.get("/api/scenarios/{scenario_id}/paths")
    def get_paths(scenario_id: str, max_len: int = 32) -> dict:
        scenario = state.ws.scenario(scenario_id)
        return {"paths": enumerate_paths(scenario, max_len)}

    @app.post("/api/scenarios/{scenario_id}/publish")
    def publish(scenario_id: str, body: dict | None = None) -> dict:
        mode = (body or {}).get("mode", "fixed")
        with state.lock:
            ws = state.ws
            scenario = ws.scenario(scenario_id)
            manifest, warnings = compile_publication(ws.ontology, scenario, ws.corpus, mode)
            ws_mod.write_publication(ws, manifest)
        return {"manifest": manifest_to_doc(manifest), "warnings": [vars(w) for w in warnings]}

    @app.get("/api/publications/{publication_id}")
    def get_publication(publication_id: str) -> dict:
        try:
            manifest = ws_mod.read_publication(state.root, publication_id)
        except WorkspaceIOError:
            raise UnknownIdError(f"unknown publication {publication_id!r}", id=publication_id)
        return manifest_to_doc(manifest)

    return app
