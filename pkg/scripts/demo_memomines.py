#!/usr/bin/env python3
"""End-to-end tour of the mining workspace on a throwaway copy.

Loads the sample, prints the tabular model's form, queries segments, walks
the scenario paths and publishes the visit in both modes.
"""

import shutil
import tempfile
from pathlib import Path

import semiograph
from semiograph import workspace as w
from semiograph.corpus import QueryFilter, derive_form_schema, query_segments
from semiograph.storyteller import compile_publication, enumerate_paths


def main() -> None:
    tmp = Path(tempfile.mkdtemp(prefix="memomines-"))
    root = tmp / "memomines"
    shutil.copytree(semiograph.sample_workspace("memomines"), root)
    ws = w.load_workspace(root)
    print(f"workspace: {root}")
    print(f"  {len(ws.corpus.media)} media, {len(ws.corpus.segments)} segments, "
          f"{len(ws.corpus.model_library)} models")

    model = ws.corpus.model_library["mine_nord_france"]
    print(f"\nform for « {model.label} »:")
    for field in derive_form_schema(ws.ontology, model).fields:
        domain = ", ".join(field.value_domain) if isinstance(field.value_domain, tuple) else "libre"
        print(f"  - {field.relation_label}  ->  {field.target_type_id}  [{domain}]")

    print("\nsegments about mining trades:")
    for seg in query_segments(ws.corpus, ws.ontology, QueryFilter(concept="Metier_mine")):
        print(f"  - {seg.id}  [{seg.start_ms} ms, {seg.end_ms} ms)")

    scenario = ws.scenarios["visite_de_la_mine"]
    print("\nnarrative paths (max 8 steps):")
    for path in enumerate_paths(scenario, 8):
        print("  " + " -> ".join(path))

    for mode in ("fixed", "open"):
        manifest, warnings = compile_publication(ws.ontology, scenario, ws.corpus, mode)
        out = w.write_publication(ws, manifest)
        bound = sum(len(b.matches) for b in manifest.steps)
        print(f"\npublished {mode}: {out} ({bound} segment bindings, "
              f"{len(warnings)} warnings)")
        for binding in manifest.steps:
            segs = ", ".join(m.segment_id for m in binding.matches) or "(vide)"
            print(f"  {binding.label}: {segs}")


if __name__ == "__main__":
    main()
