"""Narrative scenarios and publication compilation.

A scenario is a step graph with conditional transitions (a transition is
traversable once every step named in its condition has been visited).
Publication binds each step to the corpus segments whose annotations the
step's requirement graph projects into, plus the intertextual links carried
by the individuals appearing in those annotations.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any, Mapping

from .corpus import Corpus, Segment
from .errors import (
    InvalidDocumentError,
    InvalidGraphError,
    InvalidRequirementError,
    InvalidScenarioError,
    Issue,
)
from .graphs import ConceptualGraph, graph_from_doc, graph_to_doc, validate_graph
from .notation import parse_graph, serialize_graph
from .ontology import Alignment, Ontology
from .operations import project


@dataclass(frozen=True)
class Step:
    id: str
    label: str
    requirement: ConceptualGraph


@dataclass(frozen=True)
class Transition:
    from_id: str
    to_id: str
    condition: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Scenario:
    id: str
    steps: tuple[Step, ...]
    transitions: tuple[Transition, ...]
    start_id: str
    final_ids: frozenset[str]

    def step(self, step_id: str) -> Step:
        for s in self.steps:
            if s.id == step_id:
                return s
        raise KeyError(step_id)

    @property
    def step_ids(self) -> set[str]:
        return {s.id for s in self.steps}


@dataclass(frozen=True)
class MatchEntry:
    segment_id: str
    media_id: str
    start_ms: int
    end_ms: int
    match_score: int


@dataclass(frozen=True)
class StepBinding:
    step_id: str
    label: str
    matches: tuple[MatchEntry, ...]
    links: tuple[Alignment, ...]
    requirement_text: str | None = None  # recorded in open mode only


@dataclass(frozen=True)
class PublicationManifest:
    scenario_id: str
    mode: str  # "fixed" | "open"
    steps: tuple[StepBinding, ...]
    digest: str | None = None  # fixed manifests carry a content digest


# --- scenario validation -----------------------------------------------------


def validate_scenario(scenario: Scenario, ont: Ontology | None = None) -> list[Issue]:
    """Structural report: unknown steps, unreachable steps, unsatisfiable paths."""
    issues: list[Issue] = []
    ids = scenario.step_ids
    if len(ids) != len(scenario.steps):
        issues.append(Issue("DuplicateId", "duplicate step ids", where=f"scenario {scenario.id}"))
    if scenario.start_id not in ids:
        issues.append(
            Issue("UnknownStep", f"start step {scenario.start_id!r} is not declared", where="start_id")
        )
    if not scenario.final_ids:
        issues.append(Issue("UnknownStep", "final_ids must not be empty", where="final_ids"))
    for fid in sorted(scenario.final_ids):
        if fid not in ids:
            issues.append(Issue("UnknownStep", f"final step {fid!r} is not declared", where="final_ids"))
    for t in scenario.transitions:
        where = f"transition {t.from_id} -> {t.to_id}"
        for endpoint in (t.from_id, t.to_id):
            if endpoint not in ids:
                issues.append(Issue("UnknownStep", f"unknown step {endpoint!r}", where=where))
        for cond in sorted(t.condition):
            if cond not in ids:
                issues.append(
                    Issue("DanglingCondition", f"condition names unknown step {cond!r}", where=where)
                )
    if ont is not None:
        for s in scenario.steps:
            for issue in validate_graph(ont, s.requirement):
                issues.append(
                    Issue(issue.code, issue.message, where=f"step {s.id} / {issue.where}")
                )
            if not s.requirement.is_generic:
                issues.append(
                    Issue("InvalidRequirement", "step requirement must be generic", where=f"step {s.id}")
                )
    if issues:
        return issues

    # reachability ignoring conditions
    succ: dict[str, set[str]] = {sid: set() for sid in ids}
    for t in scenario.transitions:
        succ[t.from_id].add(t.to_id)
    seen = {scenario.start_id}
    frontier = [scenario.start_id]
    while frontier:
        cur = frontier.pop()
        for nxt in succ[cur]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    for sid in sorted(ids - seen):
        issues.append(Issue("UnreachableStep", f"step {sid!r} is unreachable from the start", where=f"step {sid}"))
    if issues:
        return issues

    if not _satisfiable(scenario):
        issues.append(
            Issue(
                "NoSatisfiablePath",
                "no condition-respecting path reaches a final step",
                where=f"scenario {scenario.id}",
            )
        )
    return issues


def _satisfiable(scenario: Scenario) -> bool:
    """BFS over (current step, visited set) states; visited sets only grow."""
    by_from: dict[str, list[Transition]] = {}
    for t in scenario.transitions:
        by_from.setdefault(t.from_id, []).append(t)
    start_state = (scenario.start_id, frozenset({scenario.start_id}))
    seen = {start_state}
    frontier = [start_state]
    while frontier:
        cur, visited = frontier.pop()
        if cur in scenario.final_ids:
            return True
        for t in by_from.get(cur, []):
            if not t.condition <= visited:
                continue
            state = (t.to_id, visited | {t.to_id})
            if state not in seen:
                seen.add(state)
                frontier.append(state)
    return False


# --- matching -------------------------------------------------------------------


def match_step(ont: Ontology, step: Step, corpus: Corpus) -> list[tuple[Segment, int]]:
    """Segments whose annotation the requirement projects into, ranked by score.

    Score is the number of distinct morphisms; ties break by temporal order.
    Ad-hoc marker-bearing requirements are accepted here (they pin the match
    to one individual); scenarios stored on disk keep requirements generic.
    """
    issues = validate_graph(ont, step.requirement)
    if issues:
        raise InvalidRequirementError(
            f"step {step.id!r} requirement does not validate",
            issues=[vars(i) for i in issues],
        )
    scored = []
    for seg in corpus.segments.values():
        try:
            morphisms = project(ont, step.requirement, seg.annotation)
        except InvalidGraphError:
            continue  # an invalid stored annotation cannot match
        if morphisms:
            scored.append((seg, len(morphisms)))
    scored.sort(
        key=lambda pair: (
            -pair[1],
            corpus.strata[pair[0].stratum_id].media_id,
            pair[0].start_ms,
            pair[0].id,
        )
    )
    return scored


# --- path enumeration ----------------------------------------------------------------


def enumerate_paths(scenario: Scenario, max_len: int) -> list[list[str]]:
    """All condition-respecting start-to-final step sequences of length <= max_len.

    Lexicographic order; cycles are allowed within the length bound.
    """
    if max_len < 1:
        raise InvalidScenarioError("max_len must be >= 1")
    issues = validate_scenario(scenario)
    if issues:
        raise InvalidScenarioError(f"scenario {scenario.id!r} is invalid", issues=issues)
    by_from: dict[str, list[Transition]] = {}
    for t in scenario.transitions:
        by_from.setdefault(t.from_id, []).append(t)
    paths: list[list[str]] = []

    def walk(path: list[str], visited: frozenset[str]) -> None:
        cur = path[-1]
        if cur in scenario.final_ids:
            paths.append(list(path))
        if len(path) >= max_len:
            return
        nexts = sorted(
            {t.to_id for t in by_from.get(cur, []) if t.condition <= visited}
        )
        for nxt in nexts:
            path.append(nxt)
            walk(path, visited | {nxt})
            path.pop()

    walk([scenario.start_id], frozenset({scenario.start_id}))
    return paths


# --- intertextual links ---------------------------------------------------------------


def intertextual_links(ont: Ontology, annotation: ConceptualGraph) -> list[Alignment]:
    """Alignments of every marker individual in the annotation, deduplicated."""
    issues = validate_graph(ont, annotation)
    if issues:
        raise InvalidGraphError("annotation does not validate", issues=issues)
    links: set[Alignment] = set()
    for n in annotation.nodes:
        if n.referent.is_marker:
            ind = ont.individuals.get(n.referent.value or "")
            if ind is not None:
                links.update(ind.alignments)
    return sorted(links, key=lambda a: (a.scheme, a.external_ref))


# --- publication -------------------------------------------------------------------------


def compile_publication(
    ont: Ontology, scenario: Scenario, corpus: Corpus, mode: str = "fixed"
) -> tuple[PublicationManifest, list[Issue]]:
    """Bind match results and links to every step; returns (manifest, warnings).

    Fixed mode stamps a digest over the manifest body so re-compilation on an
    unchanged workspace is byte-identical; open mode additionally records each
    step's requirement so the binding can be re-derived as the corpus grows.
    """
    if mode not in ("fixed", "open"):
        raise InvalidDocumentError(f"unknown publication mode {mode!r}")
    issues = validate_scenario(scenario, ont)
    if issues:
        raise InvalidScenarioError(f"scenario {scenario.id!r} is invalid", issues=issues)
    warnings: list[Issue] = []
    bindings: list[StepBinding] = []
    for step in scenario.steps:
        matches = match_step(ont, step, corpus)
        entries = tuple(
            MatchEntry(
                segment_id=seg.id,
                media_id=corpus.strata[seg.stratum_id].media_id,
                start_ms=seg.start_ms,
                end_ms=seg.end_ms,
                match_score=score,
            )
            for seg, score in matches
        )
        links: set[Alignment] = set()
        for seg, _ in matches:
            links.update(intertextual_links(ont, seg.annotation))
        if not entries:
            warnings.append(
                Issue("EmptyStep", f"step {step.id!r} matched no segment", where=f"step {step.id}")
            )
        bindings.append(
            StepBinding(
                step_id=step.id,
                label=step.label,
                matches=entries,
                links=tuple(sorted(links, key=lambda a: (a.scheme, a.external_ref))),
                requirement_text=serialize_graph(step.requirement) if mode == "open" else None,
            )
        )
    manifest = PublicationManifest(
        scenario_id=scenario.id, mode=mode, steps=tuple(bindings), digest=None
    )
    if mode == "fixed":
        manifest = PublicationManifest(
            scenario_id=scenario.id,
            mode=mode,
            steps=tuple(bindings),
            digest=manifest_digest(manifest),
        )
    return manifest, warnings


def manifest_digest(manifest: PublicationManifest) -> str:
    """Hex SHA-256 of the canonical manifest body (digest field excluded)."""
    body = manifest_to_doc(manifest)
    body.pop("digest", None)
    payload = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# --- documents ------------------------------------------------------------------------------


def scenario_from_doc(doc: Mapping[str, Any]) -> Scenario:
    try:
        steps = []
        for entry in doc["steps"]:
            if "requirement_text" in entry and entry["requirement_text"] is not None:
                requirement = parse_graph(entry["requirement_text"])
            else:
                requirement = graph_from_doc(entry["requirement"])
            steps.append(
                Step(id=str(entry["id"]), label=str(entry["label"]), requirement=requirement)
            )
        transitions = tuple(
            Transition(
                from_id=str(t["from"]),
                to_id=str(t["to"]),
                condition=frozenset(t.get("condition", [])),
            )
            for t in doc["transitions"]
        )
        return Scenario(
            id=str(doc["id"]),
            steps=tuple(steps),
            transitions=transitions,
            start_id=str(doc["start_id"]),
            final_ids=frozenset(doc["final_ids"]),
        )
    except KeyError as exc:
        raise InvalidDocumentError(f"scenario document is missing key {exc}") from exc


def scenario_to_doc(scenario: Scenario) -> dict[str, Any]:
    return {
        "id": scenario.id,
        "steps": [
            {"id": s.id, "label": s.label, "requirement": graph_to_doc(s.requirement)}
            for s in scenario.steps
        ],
        "transitions": [
            {"from": t.from_id, "to": t.to_id, "condition": sorted(t.condition)}
            for t in scenario.transitions
        ],
        "start_id": scenario.start_id,
        "final_ids": sorted(scenario.final_ids),
    }


def manifest_to_doc(manifest: PublicationManifest) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "scenario_id": manifest.scenario_id,
        "mode": manifest.mode,
        "steps": [
            {
                "step_id": b.step_id,
                "label": b.label,
                "matches": [
                    {
                        "segment_id": m.segment_id,
                        "media_id": m.media_id,
                        "start_ms": m.start_ms,
                        "end_ms": m.end_ms,
                        "match_score": m.match_score,
                    }
                    for m in b.matches
                ],
                "links": [
                    {"scheme": a.scheme, "external_ref": a.external_ref} for a in b.links
                ],
                **({"requirement_text": b.requirement_text} if b.requirement_text is not None else {}),
            }
            for b in manifest.steps
        ],
    }
    if manifest.digest is not None:
        doc["digest"] = manifest.digest
    return doc


def manifest_from_doc(doc: Mapping[str, Any]) -> PublicationManifest:
    try:
        steps = tuple(
            StepBinding(
                step_id=str(b["step_id"]),
                label=str(b.get("label", "")),
                matches=tuple(
                    MatchEntry(
                        segment_id=str(m["segment_id"]),
                        media_id=str(m["media_id"]),
                        start_ms=int(m["start_ms"]),
                        end_ms=int(m["end_ms"]),
                        match_score=int(m["match_score"]),
                    )
                    for m in b["matches"]
                ),
                links=tuple(
                    Alignment(scheme=str(a["scheme"]), external_ref=str(a["external_ref"]))
                    for a in b["links"]
                ),
                requirement_text=b.get("requirement_text"),
            )
            for b in doc["steps"]
        )
        return PublicationManifest(
            scenario_id=str(doc["scenario_id"]),
            mode=str(doc["mode"]),
            steps=steps,
            digest=doc.get("digest"),
        )
    except KeyError as exc:
        raise InvalidDocumentError(f"manifest document is missing key {exc}") from exc
