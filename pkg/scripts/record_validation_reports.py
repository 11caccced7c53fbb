#!/usr/bin/env python3
"""Record validation reports for the browser workbench's replay tests.

Builds form submissions the same way the client does (instantiate the model
graph, bind form values as markers on head-incident far nodes), runs them
through the live /api/validate endpoint on temp copies of the sample
workspaces, and freezes request + response pairs into
frontend/fixtures/validation_reports.json.
"""

import json
import random
import shutil
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

import semiograph
from semiograph.corpus import derive_form_schema, form_schema_to_doc
from semiograph.graphs import ConceptNode, ConceptualGraph, Referent, graph_to_doc
from semiograph.service import create_app
from semiograph.workspace import load_workspace

OUT = Path(__file__).resolve().parent.parent / "frontend" / "fixtures" / "validation_reports.json"


def build_annotation(model, schema, values: dict[str, str | None]) -> ConceptualGraph:
    """Clone the model graph; bind each filled field's marker on the far node.

    Mirrors the TypeScript builder; the fixture pins both to the same bytes.
    """
    far_by_field = {}
    index = 0
    for e in model.graph.edges:
        if model.head_node not in (e.source, e.target):
            continue
        far_by_field[index] = e.target if e.source == model.head_node else e.source
        index += 1
    nodes = []
    for n in model.graph.nodes:
        ref = n.referent
        for idx, far in far_by_field.items():
            value = values.get(str(idx))
            if far == n.node_id and value:
                ref = Referent.marker(value)
        nodes.append(ConceptNode(n.node_id, n.type_id, ref))
    return ConceptualGraph.of(nodes, model.graph.edges)


def cases_for(ws_name: str, model_id: str, rng: random.Random, count: int):
    root = Path(tempfile.mkdtemp(prefix=f"record-{ws_name}-")) / ws_name
    shutil.copytree(semiograph.sample_workspace(ws_name), root)
    ws = load_workspace(root)
    model = ws.corpus.model_library[model_id]
    schema = derive_form_schema(ws.ontology, model)
    client = TestClient(create_app(root))

    out = []
    for case_idx in range(count):
        values: dict[str, str | None] = {}
        flavor = case_idx % 4
        for i, field in enumerate(schema.fields):
            domain = list(field.value_domain) if isinstance(field.value_domain, tuple) else []
            pick: str | None = rng.choice(domain) if domain else None
            if flavor == 1 and i == case_idx % max(1, len(schema.fields)):
                pick = None  # hole: incomplete form
            if flavor == 2 and i == 0:
                pick = "hors_vocabulaire"  # out of the controlled vocabulary
            if flavor == 3 and domain:
                other_markers = sorted(set(ws.ontology.individuals) - set(domain))
                if other_markers:
                    pick = rng.choice(other_markers)  # declared, but wrong type
            values[str(i)] = pick
        annotation = build_annotation(model, schema, values)
        response = client.post(
            "/api/validate",
            json={"model_id": model_id, "annotation": graph_to_doc(annotation)},
        )
        body = response.json()
        out.append(
            {
                "workspace": ws_name,
                "model_id": model_id,
                "form_values": values,
                "annotation": graph_to_doc(annotation),
                "server": {"valid": body["valid"], "issues": body["issues"]},
            }
        )
    return form_schema_to_doc(schema), model.head_node, graph_to_doc(model.graph), out


def main() -> None:
    rng = random.Random(20180621)
    plans = [
        ("memomines", "mine_nord_france", 16),
        ("memomines", "travail_mine", 12),
        ("memomines", "monde_vie", 8),
        ("memomines", "decouvrir_mine", 8),
        ("language", "sujet_langue", 8),
        ("language", "portrait_auteur", 8),
    ]
    schemas = {}
    models = {}
    cases = []
    for ws_name, model_id, count in plans:
        schema_doc, head_node, graph_doc, model_cases = cases_for(ws_name, model_id, rng, count)
        schemas[model_id] = schema_doc
        models[model_id] = {"head_node": head_node, "graph": graph_doc}
        cases.extend(model_cases)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(
        json.dumps({"schemas": schemas, "models": models, "cases": cases},
                   ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    rejected = sum(1 for c in cases if not c["server"]["valid"])
    print(f"recorded {len(cases)} cases ({rejected} rejected) -> {OUT}")


if __name__ == "__main__":
    main()
