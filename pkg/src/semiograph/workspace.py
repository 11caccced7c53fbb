"""File-backed workspaces.

A workspace is a directory of reviewable JSON files::

    ontology.json      the domain ontology
    models/*.json      model templates (also accepted inside corpus.json)
    corpus.json        media, strata, segments, embedded models
    scenarios/*.json   narrative scenarios
    publications/      compiled manifests (written by publish)

All writes go through a temp-file-plus-rename so a crash mid-write can never
leave a corrupt workspace behind.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import corpus as corpus_mod
from . import ontology as ontology_mod
from . import storyteller as story_mod
from .errors import (
    DuplicateIdError,
    InvalidDocumentError,
    Issue,
    ScsError,
    UnknownScenarioError,
    WorkspaceIOError,
)
from .notation import ParseError

ONTOLOGY_FILE = "ontology.json"
CORPUS_FILE = "corpus.json"
MODELS_DIR = "models"
SCENARIOS_DIR = "scenarios"
PUBLICATIONS_DIR = "publications"


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename; readers never see partial data."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.parent / f".{path.name}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def dump_json(doc: Any) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def atomic_write_json(path: Path, doc: Any) -> None:
    atomic_write_text(path, dump_json(doc))


def _read_json(path: Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise WorkspaceIOError(f"missing file: {path}", path=str(path)) from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise WorkspaceIOError(f"cannot read {path}: {exc}", path=str(path)) from exc


@dataclass(frozen=True)
class Workspace:
    root: Path
    ontology: ontology_mod.Ontology
    corpus: corpus_mod.Corpus
    scenarios: dict[str, story_mod.Scenario]
    corpus_file_model_ids: frozenset[str]  # models stored inside corpus.json

    def scenario(self, scenario_id: str) -> story_mod.Scenario:
        if scenario_id not in self.scenarios:
            raise UnknownScenarioError(f"unknown scenario {scenario_id!r}", id=scenario_id)
        return self.scenarios[scenario_id]


def load_workspace(root: str | Path) -> Workspace:
    """Load and fully validate a workspace; raises on the first problem."""
    root = Path(root)
    if not root.is_dir():
        raise WorkspaceIOError(f"workspace directory not found: {root}", path=str(root))
    ont = ontology_mod.load_ontology(_read_json(root / ONTOLOGY_FILE))
    corpus = corpus_mod.corpus_from_doc(_read_json(root / CORPUS_FILE))
    corpus_file_ids = frozenset(corpus.model_library)

    models = dict(corpus.model_library)
    models_dir = root / MODELS_DIR
    if models_dir.is_dir():
        for path in sorted(models_dir.glob("*.json")):
            model = corpus_mod.model_from_doc(_read_json(path))
            if model.id in models:
                raise DuplicateIdError(f"model {model.id!r} defined twice", id=model.id)
            models[model.id] = model
    corpus = corpus_mod.Corpus(
        media=corpus.media,
        strata=corpus.strata,
        segments=corpus.segments,
        model_library=models,
    )

    issues = corpus_mod.validate_corpus(ont, corpus)
    if issues:
        raise InvalidDocumentError(
            f"corpus does not validate: {issues[0]}", issues=[vars(i) for i in issues]
        )

    scenarios: dict[str, story_mod.Scenario] = {}
    scenarios_dir = root / SCENARIOS_DIR
    if scenarios_dir.is_dir():
        for path in sorted(scenarios_dir.glob("*.json")):
            scenario = story_mod.scenario_from_doc(_read_json(path))
            if scenario.id in scenarios:
                raise DuplicateIdError(f"scenario {scenario.id!r} defined twice", id=scenario.id)
            report = story_mod.validate_scenario(scenario, ont)
            if report:
                raise InvalidDocumentError(
                    f"scenario {scenario.id!r} does not validate: {report[0]}",
                    issues=[vars(i) for i in report],
                )
            scenarios[scenario.id] = scenario

    return Workspace(
        root=root,
        ontology=ont,
        corpus=corpus,
        scenarios=scenarios,
        corpus_file_model_ids=corpus_file_ids,
    )


def save_corpus(ws: Workspace) -> None:
    doc = corpus_mod.corpus_to_doc(ws.corpus, model_ids=ws.corpus_file_model_ids)
    atomic_write_json(ws.root / CORPUS_FILE, doc)


def publication_path(root: Path, scenario_id: str) -> Path:
    return root / PUBLICATIONS_DIR / f"{scenario_id}.json"


def write_publication(ws: Workspace, manifest: story_mod.PublicationManifest) -> Path:
    path = publication_path(ws.root, manifest.scenario_id)
    atomic_write_json(path, story_mod.manifest_to_doc(manifest))
    return path


def list_publications(root: Path) -> list[str]:
    pub_dir = root / PUBLICATIONS_DIR
    if not pub_dir.is_dir():
        return []
    return sorted(p.stem for p in pub_dir.glob("*.json"))


def read_publication(root: Path, publication_id: str) -> story_mod.PublicationManifest:
    return story_mod.manifest_from_doc(_read_json(publication_path(Path(root), publication_id)))


# --- full workspace audit ---------------------------------------------------------------


@dataclass
class CheckResult:
    exit_code: int  # 0 clean, 1 violations, 2 unreadable/unparseable
    issues: list[tuple[str, Issue]]  # (file, issue)

    def lines(self) -> list[str]:
        return [
            f"{file}: {issue.where or '-'}: {issue.code}: {issue.message}"
            for file, issue in self.issues
        ]


def check_workspace(root: str | Path) -> CheckResult:
    """Collect every violation instead of stopping at the first one."""
    root = Path(root)
    io_issues: list[tuple[str, Issue]] = []
    issues: list[tuple[str, Issue]] = []

    def read(path: Path) -> Any | None:
        try:
            return _read_json(path)
        except WorkspaceIOError as exc:
            io_issues.append((str(path.relative_to(root)), Issue("IoError", exc.message)))
            return None

    if not root.is_dir():
        return CheckResult(2, [(str(root), Issue("IoError", "workspace directory not found"))])

    ont = None
    ont_doc = read(root / ONTOLOGY_FILE)
    if ont_doc is not None:
        try:
            ont = ontology_mod.load_ontology(ont_doc)
        except ScsError as exc:
            issues.append((ONTOLOGY_FILE, Issue(exc.code, exc.message)))

    corpus = None
    corpus_doc = read(root / CORPUS_FILE)
    if corpus_doc is not None:
        try:
            corpus = corpus_mod.corpus_from_doc(corpus_doc)
        except (ScsError, ParseError) as exc:
            issues.append((CORPUS_FILE, Issue(getattr(exc, "code", "InvalidDocument"), str(exc))))

    models_dir = root / MODELS_DIR
    extra_models: list[corpus_mod.ModelTemplate] = []
    if models_dir.is_dir():
        for path in sorted(models_dir.glob("*.json")):
            doc = read(path)
            if doc is None:
                continue
            rel = str(path.relative_to(root))
            try:
                extra_models.append(corpus_mod.model_from_doc(doc))
            except (ScsError, ParseError) as exc:
                issues.append((rel, Issue(getattr(exc, "code", "InvalidDocument"), str(exc))))

    if corpus is not None:
        models = dict(corpus.model_library)
        for model in extra_models:
            if model.id in models:
                issues.append(
                    (MODELS_DIR, Issue("DuplicateId", f"model {model.id!r} defined twice"))
                )
                continue
            models[model.id] = model
        corpus = corpus_mod.Corpus(
            media=corpus.media,
            strata=corpus.strata,
            segments=corpus.segments,
            model_library=models,
        )
        if ont is not None:
            for issue in corpus_mod.validate_corpus(ont, corpus):
                issues.append((CORPUS_FILE, issue))

    scenarios_dir = root / SCENARIOS_DIR
    scenario_ids: set[str] = set()
    if scenarios_dir.is_dir():
        for path in sorted(scenarios_dir.glob("*.json")):
            doc = read(path)
            if doc is None:
                continue
            rel = str(path.relative_to(root))
            try:
                scenario = story_mod.scenario_from_doc(doc)
            except (ScsError, ParseError) as exc:
                issues.append((rel, Issue(getattr(exc, "code", "InvalidDocument"), str(exc))))
                continue
            if scenario.id in scenario_ids:
                issues.append((rel, Issue("DuplicateId", f"scenario {scenario.id!r} defined twice")))
            scenario_ids.add(scenario.id)
            for issue in story_mod.validate_scenario(scenario, ont):
                issues.append((rel, issue))

    pub_dir = root / PUBLICATIONS_DIR
    if pub_dir.is_dir():
        for path in sorted(pub_dir.glob("*.json")):
            doc = read(path)
            if doc is None:
                continue
            rel = str(path.relative_to(root))
            try:
                manifest = story_mod.manifest_from_doc(doc)
            except ScsError as exc:
                issues.append((rel, Issue(getattr(exc, "code", "InvalidDocument"), str(exc))))
                continue
            if manifest.scenario_id not in scenario_ids:
                issues.append(
                    (rel, Issue("UnknownScenario", f"unknown scenario {manifest.scenario_id!r}"))
                )
            if corpus is not None:
                for binding in manifest.steps:
                    for m in binding.matches:
                        if m.segment_id not in corpus.segments:
                            issues.append(
                                (
                                    rel,
                                    Issue(
                                        "DanglingReference",
                                        f"manifest names unknown segment {m.segment_id!r}",
                                        where=f"step {binding.step_id}",
                                    ),
                                )
                            )

    if io_issues:
        return CheckResult(2, io_issues + issues)
    if issues:
        return CheckResult(1, issues)
    return CheckResult(0, [])
