"""Command-line interface: subcommand behavior and output determinism."""

import importlib.resources as ir
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from sceneforge.cli import harness_rows, main, read_descriptions
from sceneforge.priors import save_kb

CATALOG_PATH = str(ir.files("sceneforge") / "data" / "catalog.json")


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def kb_file(kb, tmp_path_factory):
    path = tmp_path_factory.mktemp("kb") / "kb.json"
    save_kb(kb, path)
    return str(path)


@pytest.fixture(scope="module")
def suite_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("suite") / "two.txt"
    path.write_text(
        "# tiny suite\n"
        "There is a sandwich on a plate.\n"
        "There is a bed in a bedroom.\n",
        encoding="utf-8",
    )
    return str(path)


class TestSynthLearn:
    def test_pipeline_and_rerun_identical(self, runner, tmp_path):
        corpus = tmp_path / "corpus"
        r = runner.invoke(
            main,
            ["synth", "--catalog", CATALOG_PATH, "--scenes", "8",
             "--seed", "3", "--out", str(corpus)],
        )
        assert r.exit_code == 0, r.output
        assert (corpus / "manifest.json").exists()

        out1, out2 = tmp_path / "kb1.json", tmp_path / "kb2.json"
        for out in (out1, out2):
            r = runner.invoke(
                main,
                ["learn", "--corpus", str(corpus), "--catalog", CATALOG_PATH,
                 "--out", str(out)],
            )
            assert r.exit_code == 0, r.output
            assert "occurrence rows" in r.output
        assert out1.read_bytes() == out2.read_bytes()

    def test_empty_corpus_dir_fails_cleanly(self, runner, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        r = runner.invoke(
            main,
            ["learn", "--corpus", str(empty), "--catalog", CATALOG_PATH,
             "--out", str(tmp_path / "kb.json")],
        )
        assert r.exit_code != 0
        assert "manifest" in r.stderr
        assert len(r.stderr.strip().splitlines()) == 1


class TestGenerate:
    def gen(self, runner, kb_file, out, seed="3"):
        return runner.invoke(
            main,
            ["generate", "--kb", kb_file, "--catalog", CATALOG_PATH,
             "--text", "There is a sandwich on a plate.",
             "--seed", seed, "--out", str(out)],
        )

    def test_writes_scene_and_report(self, runner, kb_file, tmp_path):
        out = tmp_path / "scene.json"
        r = self.gen(runner, kb_file, out)
        assert r.exit_code == 0, r.output
        scene = json.loads(out.read_text())
        assert len(scene["instances"]) >= 4  # sandwich, plate, carrier, room
        report = json.loads((tmp_path / "scene.report.json").read_text())
        assert set(report) == {"L", "L_obj", "L_rel", "collisions", "overhangMax", "degraded"}
        assert report["collisions"] == 0
        assert report["overhangMax"] <= 0.05
        assert report["L"] == pytest.approx(
            0.25 * report["L_obj"] + 0.75 * report["L_rel"], abs=1e-12
        )

    def test_same_seed_gives_identical_files(self, runner, kb_file, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert self.gen(runner, kb_file, a).exit_code == 0
        assert self.gen(runner, kb_file, b).exit_code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_text_and_file_are_exclusive(self, runner, kb_file, tmp_path):
        r = runner.invoke(
            main,
            ["generate", "--kb", kb_file, "--catalog", CATALOG_PATH,
             "--out", str(tmp_path / "x.json")],
        )
        assert r.exit_code != 0
        assert "exactly one" in r.stderr

    def test_description_from_file(self, runner, kb_file, tmp_path):
        src = tmp_path / "desc.txt"
        src.write_text("There is a bed in a bedroom.\n", encoding="utf-8")
        r = runner.invoke(
            main,
            ["generate", "--kb", kb_file, "--catalog", CATALOG_PATH,
             "--file", str(src), "--out", str(tmp_path / "x.json")],
        )
        assert r.exit_code == 0, r.output


class TestEval:
    def test_row_grid_and_determinism(self, runner, kb_file, suite_file, tmp_path):
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        for out in (out1, out2):
            r = runner.invoke(
                main,
                ["eval", suite_file, "--kb", kb_file, "--catalog", CATALOG_PATH,
                 "--conditions", "basic,full", "--seeds", "2", "--out", str(out)],
            )
            assert r.exit_code == 0, r.output
        lines = out1.read_text().splitlines()
        assert lines[0] == (
            "condition,description_index,seed,constraint_satisfaction,"
            "collisions,support_validity,L,L_obj,L_rel,degraded"
        )
        assert len(lines) == 1 + 2 * 2 * 2
        assert out1.read_bytes() == out2.read_bytes()

    def test_json_format(self, runner, kb_file, suite_file, tmp_path):
        out = tmp_path / "rows.json"
        r = runner.invoke(
            main,
            ["eval", suite_file, "--kb", kb_file, "--catalog", CATALOG_PATH,
             "--conditions", "full", "--seeds", "1", "--format", "json",
             "--out", str(out)],
        )
        assert r.exit_code == 0, r.output
        rows = json.loads(out.read_text())
        assert len(rows) == 2
        assert rows[0]["condition"] == "full"

    def test_unknown_condition_fails(self, runner, kb_file, suite_file, tmp_path):
        r = runner.invoke(
            main,
            ["eval", suite_file, "--kb", kb_file, "--catalog", CATALOG_PATH,
             "--conditions", "fancy", "--seeds", "1"],
        )
        assert r.exit_code != 0
        assert "unknown condition" in r.stderr

    def test_shipped_suite_loads(self):
        shipped = ir.files("sceneforge") / "data" / "descriptions.txt"
        descs = read_descriptions(str(shipped))
        assert len(descs) == 20
        assert all(d and not d.startswith("#") for d in descs)

    def test_harness_scores_decompose(self, kb, catalog, suite_file):
        rows = harness_rows(kb, catalog, read_descriptions(suite_file), ["full"], 1)
        for row in rows:
            assert row["L"] == pytest.approx(
                0.25 * row["L_obj"] + 0.75 * row["L_rel"], abs=1e-12
            )


class TestRepl:
    SCRIPT = (
        "There is a bed in a bedroom.\n"
        "look at the bed\n"
        "frobnicate it\n"
        ":save {path}\n"
        ":quit\n"
    )

    def test_session_flow(self, runner, kb_file, tmp_path):
        saved = tmp_path / "sess.json"
        r = runner.invoke(
            main,
            ["repl", "--kb", kb_file, "--catalog", CATALOG_PATH, "--seed", "4"],
            input=self.SCRIPT.format(path=saved),
        )
        assert r.exit_code == 0, r.output
        assert "bed" in r.output  # rendered support tree
        assert "unknown verb" in r.stderr
        doc = json.loads(saved.read_text())
        assert doc["utterances"] == [
            "There is a bed in a bedroom.",
            "look at the bed",
        ]

    def test_eof_exits_zero(self, runner, kb_file):
        r = runner.invoke(
            main,
            ["repl", "--kb", kb_file, "--catalog", CATALOG_PATH],
            input="",
        )
        assert r.exit_code == 0
