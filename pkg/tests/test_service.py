import json

import pytest
from fastapi.testclient import TestClient

from semiograph.service import create_app


@pytest.fixture()
def client(tmp_memomines):
    app = create_app(tmp_memomines)
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def language_client(tmp_language):
    app = create_app(tmp_language)
    with TestClient(app) as c:
        yield c


def new_segment_doc(seg_id="seg_http", version=None):
    doc = {
        "id": seg_id,
        "stratum_id": "st_fosse_thematique",
        "start_ms": 200000,
        "end_ms": 240000,
        "model_id": "decouvrir_mine",
        "annotation_text": (
            "[Mine_lieu: fosse_1_courrieres] -(preciser_construction)-> [Mine_construction: mine_de_fer]\n"
            "[Element_construction: chassis_molettes] -(partie_de)-> [Mine_construction: mine_de_fer]"
        ),
    }
    if version is not None:
        doc["version"] = version
    return doc


class TestReads:
    def test_ontology(self, client):
        doc = client.get("/api/ontology").json()
        assert doc["root_id"] == "Entite"
        assert any(c["id"] == "Gisement" for c in doc["concept_types"])

    def test_models_listing_and_detail(self, client):
        models = client.get("/api/models").json()
        assert "mine_nord_france" in [m["id"] for m in models]
        detail = client.get("/api/models/mine_nord_france").json()
        assert detail["label"] == "La mine dans le Nord de la France"
        assert client.get("/api/models/absent").status_code == 404

    def test_mine_model_form_has_five_fields(self, client):
        doc = client.get("/api/models/mine_nord_france/form").json()
        assert len(doc["fields"]) == 5
        gisement = next(f for f in doc["fields"] if f["relation_id"] == "preciser_gisement")
        assert "charbon" in gisement["value_domain"]

    def test_corpus_and_segments(self, client):
        assert client.get("/api/corpora/main").status_code == 200
        assert client.get("/api/corpora/autre").status_code == 404
        segs = client.get("/api/corpora/main/segments").json()
        assert "seg_travail_havage" in [s["id"] for s in segs]
        one = client.get("/api/corpora/main/segments/seg_travail_havage").json()
        assert one["version"] == 1

    def test_query_segments(self, client):
        hits = client.get("/api/segments", params={"concept": "Metier_mine"}).json()
        assert "seg_travail_havage" in [s["id"] for s in hits]
        assert client.get("/api/segments", params={"concept": "Absent"}).status_code == 404

    def test_media_at_instant(self, client):
        groups = client.get("/api/media/video_fosse/at/15000").json()
        assert sorted(groups) == ["thematic", "visual"]
        assert client.get("/api/media/absente/at/0").status_code == 404

    def test_scenario_paths(self, client):
        doc = client.get("/api/scenarios/visite_de_la_mine/paths", params={"max_len": 8}).json()
        assert ["etape_mine", "etape_decouvrir", "etape_vie", "etape_memoire"] in doc["paths"]


class TestValidateEndpoint:
    def test_valid_annotation(self, client):
        body = {
            "model_id": "monde_vie",
            "annotation_text": "[Vie_quotidienne: vie_aux_corons] -(se_derouler_dans)-> [Habitat: coron]",
        }
        doc = client.post("/api/validate", json=body).json()
        assert doc == {"issues": [], "valid": True}

    def test_no_projection_reported(self, client):
        body = {"model_id": "monde_vie", "annotation_text": "[Metier_mine: haveur]"}
        doc = client.post("/api/validate", json=body).json()
        assert doc["valid"] is False
        assert [i["code"] for i in doc["issues"]] == ["NoProjection"]

    def test_unknown_model_404(self, client):
        body = {"model_id": "absent", "annotation_text": "[Metier_mine: haveur]"}
        assert client.post("/api/validate", json=body).status_code == 404


class TestWrites:
    def test_post_then_get(self, client, tmp_memomines):
        resp = client.post("/api/corpora/main/segments", json=new_segment_doc())
        assert resp.status_code == 201
        assert resp.json()["version"] == 1
        assert client.get("/api/corpora/main/segments/seg_http").status_code == 200
        # persisted on disk
        on_disk = json.loads((tmp_memomines / "corpus.json").read_text(encoding="utf-8"))
        assert "seg_http" in [s["id"] for s in on_disk["segments"]]

    def test_post_existing_id_conflicts(self, client):
        assert client.post("/api/corpora/main/segments", json=new_segment_doc()).status_code == 201
        assert client.post("/api/corpora/main/segments", json=new_segment_doc()).status_code == 409

    def test_post_invalid_annotation_400_with_report(self, client):
        doc = new_segment_doc()
        doc["annotation_text"] = "[Metier_mine: haveur]"
        doc["model_id"] = "mine_nord_france"
        resp = client.post("/api/corpora/main/segments", json=doc)
        assert resp.status_code == 400
        body = resp.json()
        assert body["code"] == "AnnotationInvalid"
        assert [i["code"] for i in body["details"]["issues"]] == ["NoProjection"]

    def test_put_requires_matching_version(self, client):
        client.post("/api/corpora/main/segments", json=new_segment_doc())
        update = new_segment_doc(version=1)
        update["start_ms"] = 205000
        resp = client.put("/api/corpora/main/segments/seg_http", json=update)
        assert resp.status_code == 200
        assert resp.json()["version"] == 2
        # stale version now conflicts
        resp = client.put("/api/corpora/main/segments/seg_http", json=update)
        assert resp.status_code == 409

    def test_put_unknown_segment_404(self, client):
        assert (
            client.put("/api/corpora/main/segments/absent", json=new_segment_doc("absent", 1)).status_code
            == 404
        )

    def test_write_visible_to_subsequent_reads(self, client):
        client.post("/api/corpora/main/segments", json=new_segment_doc())
        hits = client.get("/api/segments", params={"marker": "mine_de_fer"}).json()
        assert "seg_http" in [s["id"] for s in hits]


class TestPublish:
    def test_publish_writes_manifest(self, client, tmp_memomines):
        resp = client.post("/api/scenarios/visite_de_la_mine/publish", json={"mode": "fixed"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["manifest"]["digest"]
        assert (tmp_memomines / "publications" / "visite_de_la_mine.json").exists()
        served = client.get("/api/publications/visite_de_la_mine").json()
        assert served == body["manifest"]

    def test_publish_unknown_scenario(self, client):
        assert client.post("/api/scenarios/absent/publish", json={}).status_code == 404

    def test_unknown_publication_404(self, client):
        assert client.get("/api/publications/absent").status_code == 404


class TestReload:
    def test_reload_picks_up_new_model(self, client, tmp_memomines):
        model = {
            "id": "nouveau_modele",
            "label": "Nouveau",
            "head_node": "n1",
            "graph_text": "[Gisement: *]",
        }
        (tmp_memomines / "models" / "nouveau_modele.json").write_text(
            json.dumps(model, ensure_ascii=False), encoding="utf-8"
        )
        assert client.get("/api/models/nouveau_modele").status_code == 404
        assert client.post("/api/reload").status_code == 200
        assert client.get("/api/models/nouveau_modele").status_code == 200


def test_endpoints_mirror_core_operations(client, memomines_ws):
    # the service adds no semantics over the core operations
    from semiograph.corpus import QueryFilter, derive_form_schema, form_schema_to_doc, query_segments
    from semiograph.corpus import segments_at_instant
    from semiograph.storyteller import enumerate_paths

    served = client.get("/api/segments", params={"relation": "loc_tmp"}).json()
    core = query_segments(
        memomines_ws.corpus, memomines_ws.ontology, QueryFilter(relation="loc_tmp")
    )
    assert [s["id"] for s in served] == [s.id for s in core]

    served_form = client.get("/api/models/travail_mine/form").json()
    core_form = form_schema_to_doc(
        derive_form_schema(memomines_ws.ontology, memomines_ws.corpus.model_library["travail_mine"])
    )
    assert served_form == core_form

    served_paths = client.get(
        "/api/scenarios/visite_de_la_mine/paths", params={"max_len": 7}
    ).json()["paths"]
    core_paths = enumerate_paths(memomines_ws.scenarios["visite_de_la_mine"], 7)
    assert served_paths == core_paths

    served_at = client.get("/api/media/video_mineurs/at/115000").json()
    core_at = segments_at_instant(memomines_ws.corpus, "video_mineurs", 115000)
    assert {k: [s["id"] for s in v] for k, v in served_at.items()} == {
        k: [s.id for s in v] for k, v in core_at.items()
    }


def test_victor_hugo_over_http(language_client):
    form = language_client.get("/api/models/portrait_auteur/form").json()
    assert len(form["fields"]) == 6
    hits = language_client.get("/api/segments", params={"marker": "victor_hugo"}).json()
    assert [s["id"] for s in hits] == ["seg_hugo"]
