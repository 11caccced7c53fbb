import json
import signal
import subprocess
import sys
import time
from pathlib import Path

import pytest

from semiograph import workspace as ws_mod
from semiograph.cli import main as cli_main


def run_cli(*argv):
    return cli_main(list(argv))


class TestCheck:
    def test_sample_workspaces_clean(self, tmp_memomines, tmp_language, capsys):
        for root in (tmp_memomines, tmp_language):
            assert run_cli("--workspace", str(root), "check") == 0
        assert "workspace clean" in capsys.readouterr().out

    def test_broken_projection_reported(self, tmp_memomines, capsys):
        doc = json.loads((tmp_memomines / "corpus.json").read_text(encoding="utf-8"))
        doc["segments"][0]["annotation_text"] = "[Metier_mine: haveur]"
        (tmp_memomines / "corpus.json").write_text(
            json.dumps(doc, ensure_ascii=False), encoding="utf-8"
        )
        assert run_cli("--workspace", str(tmp_memomines), "check") == 1
        assert "NoProjection" in capsys.readouterr().out

    def test_missing_ontology_exit_2(self, tmp_memomines):
        (tmp_memomines / "ontology.json").unlink()
        assert run_cli("--workspace", str(tmp_memomines), "check") == 2

    def test_unparseable_corpus_exit_2(self, tmp_memomines):
        (tmp_memomines / "corpus.json").write_text("{ pas du json", encoding="utf-8")
        assert run_cli("--workspace", str(tmp_memomines), "check") == 2

    def test_bad_timecode_reported(self, tmp_memomines, capsys):
        doc = json.loads((tmp_memomines / "corpus.json").read_text(encoding="utf-8"))
        doc["segments"][0]["end_ms"] = doc["segments"][0]["start_ms"]
        (tmp_memomines / "corpus.json").write_text(
            json.dumps(doc, ensure_ascii=False), encoding="utf-8"
        )
        assert run_cli("--workspace", str(tmp_memomines), "check") == 1
        assert "TimecodeOutOfRange" in capsys.readouterr().out

    def test_workspace_env_var(self, tmp_memomines, monkeypatch):
        monkeypatch.setenv("SCS_WORKSPACE", str(tmp_memomines))
        assert run_cli("check") == 0

    def test_duplicate_model_reported(self, tmp_memomines, capsys):
        src = (tmp_memomines / "models" / "travail_mine.json").read_text(encoding="utf-8")
        (tmp_memomines / "models" / "travail_mine_bis.json").write_text(src, encoding="utf-8")
        assert run_cli("--workspace", str(tmp_memomines), "check") == 1
        assert "DuplicateId" in capsys.readouterr().out


class TestFmt:
    def test_rewrites_to_canonical_and_stays_stable(self, tmp_language):
        target = tmp_language / "graphs" / "victor_hugo.cg"
        assert run_cli("fmt", str(target)) == 0
        first = target.read_bytes()
        assert run_cli("fmt", str(target)) == 0
        assert target.read_bytes() == first

    def test_parse_error_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.cg"
        bad.write_text("[Langue guarani]", encoding="utf-8")
        assert run_cli("fmt", str(bad)) == 1
        assert "expected" in capsys.readouterr().err

    def test_missing_file_exit_2(self, tmp_path):
        assert run_cli("fmt", str(tmp_path / "absent.cg")) == 2


class TestFormAndQuery:
    def test_form_prints_five_fields(self, tmp_memomines, capsys):
        assert run_cli("--workspace", str(tmp_memomines), "form", "mine_nord_france") == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["fields"]) == 5

    def test_form_unknown_model(self, tmp_memomines, capsys):
        assert run_cli("--workspace", str(tmp_memomines), "form", "absent") == 1
        assert "UnknownId" in capsys.readouterr().err

    def test_query_by_concept(self, tmp_memomines, capsys):
        assert (
            run_cli("--workspace", str(tmp_memomines), "query", "--concept", "Metier_mine") == 0
        )
        docs = json.loads(capsys.readouterr().out)
        assert "seg_travail_havage" in [d["id"] for d in docs]

    def test_query_with_window_and_stratum(self, tmp_memomines, capsys):
        assert (
            run_cli(
                "--workspace",
                str(tmp_memomines),
                "query",
                "--stratum",
                "visual",
                "--from-ms",
                "0",
                "--to-ms",
                "20000",
            )
            == 0
        )
        docs = json.loads(capsys.readouterr().out)
        assert [d["id"] for d in docs] == ["seg_fosse_plan_ensemble"]

    def test_match_step(self, tmp_memomines, capsys):
        assert (
            run_cli(
                "--workspace", str(tmp_memomines), "match", "visite_de_la_mine", "etape_travail"
            )
            == 0
        )
        out = capsys.readouterr().out
        assert "seg_travail_havage" in out

    def test_paths(self, tmp_memomines, capsys):
        assert run_cli("--workspace", str(tmp_memomines), "paths", "visite_de_la_mine") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert "etape_mine -> etape_decouvrir -> etape_travail -> etape_risques -> etape_memoire" in lines
        # the conditional transition is satisfied on that path (travail visited)


class TestPublish:
    def test_fixed_publish_byte_identical(self, tmp_memomines):
        assert run_cli("--workspace", str(tmp_memomines), "publish", "visite_de_la_mine") == 0
        path = tmp_memomines / "publications" / "visite_de_la_mine.json"
        first = path.read_bytes()
        assert run_cli("--workspace", str(tmp_memomines), "publish", "visite_de_la_mine") == 0
        assert path.read_bytes() == first
        doc = json.loads(first.decode("utf-8"))
        assert doc["mode"] == "fixed"
        assert len(doc["digest"]) == 64

    def test_unknown_scenario_exit_1(self, tmp_memomines, capsys):
        assert run_cli("--workspace", str(tmp_memomines), "publish", "absent") == 1
        assert "UnknownScenario" in capsys.readouterr().err

    def test_workspace_checks_clean_after_publish(self, tmp_memomines):
        run_cli("--workspace", str(tmp_memomines), "publish", "visite_de_la_mine")
        assert run_cli("--workspace", str(tmp_memomines), "check") == 0

    def test_open_mode_gains_new_segment(self, tmp_memomines, capsys):
        run_cli("--workspace", str(tmp_memomines), "publish", "visite_de_la_mine", "--mode", "open")
        path = tmp_memomines / "publications" / "visite_de_la_mine.json"
        before = json.loads(path.read_text(encoding="utf-8"))
        doc = json.loads((tmp_memomines / "corpus.json").read_text(encoding="utf-8"))
        doc["segments"].append(
            {
                "id": "seg_travail_bis",
                "stratum_id": "st_mineurs_thematique",
                "start_ms": 112000,
                "end_ms": 145000,
                "model_id": "travail_mine",
                "annotation_text": "[Activite_miniere: abattage_charbon] -(mobiliser_metier)-> [Metier_mine: haveur]\n[Activite_miniere: abattage_charbon] -(utiliser_instrument)-> [Instrument_minier: balle]\n[Activite_miniere: abattage_charbon] -(loc_tmp)-> [Periode_temporelle: annees_1930]",
            }
        )
        (tmp_memomines / "corpus.json").write_text(
            json.dumps(doc, ensure_ascii=False), encoding="utf-8"
        )
        run_cli("--workspace", str(tmp_memomines), "publish", "visite_de_la_mine", "--mode", "open")
        after = json.loads(path.read_text(encoding="utf-8"))

        def matches_of(manifest, step_id):
            step = next(s for s in manifest["steps"] if s["step_id"] == step_id)
            return [m["segment_id"] for m in step["matches"]]

        assert "seg_travail_bis" not in matches_of(before, "etape_travail")
        assert "seg_travail_bis" in matches_of(after, "etape_travail")


class TestAtomicWrites:
    def test_fault_before_rename_preserves_file(self, tmp_path, monkeypatch):
        target = tmp_path / "data.json"
        ws_mod.atomic_write_json(target, {"ok": 1})

        def boom(src, dst):
            raise OSError("injected crash before rename")

        monkeypatch.setattr(ws_mod.os, "replace", boom)
        with pytest.raises(OSError):
            ws_mod.atomic_write_json(target, {"ok": 2})
        monkeypatch.undo()
        assert json.loads(target.read_text(encoding="utf-8")) == {"ok": 1}

    def test_fault_during_write_preserves_file(self, tmp_path, monkeypatch):
        target = tmp_path / "data.json"
        ws_mod.atomic_write_json(target, {"ok": 1})

        real_open = open

        def failing_open(path, *args, **kwargs):
            fh = real_open(path, *args, **kwargs)
            if str(path).endswith(".tmp"):
                class Dying:
                    def __getattr__(self, name):
                        return getattr(fh, name)

                    def write(self, _):
                        raise OSError("injected crash mid-write")

                    def __enter__(self):
                        return self

                    def __exit__(self, *exc):
                        fh.close()
                        return False

                return Dying()
            return fh

        monkeypatch.setattr("builtins.open", failing_open)
        with pytest.raises(OSError):
            ws_mod.atomic_write_json(target, {"ok": 2})
        monkeypatch.undo()
        assert json.loads(target.read_text(encoding="utf-8")) == {"ok": 1}

    def test_kill_during_write_loop_leaves_valid_workspace(self, tmp_memomines):
        # hammer segment writes in a child process, kill it hard, then audit
        script = f"""
import sys, time
sys.path.insert(0, {json.dumps(str(Path(__file__).resolve().parent.parent / 'src'))})
from semiograph import workspace as w
from semiograph.corpus import Segment, upsert_segment
from semiograph.notation import parse_graph
root = {json.dumps(str(tmp_memomines))}
i = 0
while True:
    ws = w.load_workspace(root)
    seg = Segment(
        id="seg_loop",
        stratum_id="st_fosse_thematique",
        start_ms=100000 + (i % 50) * 100,
        end_ms=200000,
        model_id="cadrage_visuel",
        annotation=parse_graph("[Plan_visuel: plan_ensemble_fosse] -(montrer)-> [Mine_construction: houillere]"),
    )
    corpus = upsert_segment(ws.corpus, ws.ontology, seg)
    import dataclasses
    w.save_corpus(dataclasses.replace(ws, corpus=corpus))
    i += 1
"""
        proc = subprocess.Popen([sys.executable, "-c", script])
        try:
            time.sleep(1.0)
            assert proc.poll() is None, "writer died before the kill"
        finally:
            proc.send_signal(signal.SIGKILL)
            proc.wait()
        result = ws_mod.check_workspace(tmp_memomines)
        assert result.exit_code == 0, result.lines()


def test_load_workspace_rejects_invalid(tmp_memomines):
    doc = json.loads((tmp_memomines / "corpus.json").read_text(encoding="utf-8"))
    doc["segments"][0]["annotation_text"] = "[Metier_mine: haveur]"
    (tmp_memomines / "corpus.json").write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")
    from semiograph.errors import InvalidDocumentError

    with pytest.raises(InvalidDocumentError):
        ws_mod.load_workspace(tmp_memomines)
