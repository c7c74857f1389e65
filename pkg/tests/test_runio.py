"""Run-directory persistence: write a full run, then read every artifact back."""

from __future__ import annotations

import json
from datetime import datetime

import pytest

from mmdecon import runio
from mmdecon.cascade import run_cascade
from mmdecon.config import config_hash, load_config
from mmdecon.corpus import load_corpus
from mmdecon.errors import EngineError
from mmdecon.report import build_report
from mmdecon.synthetic import build_instance


@pytest.fixture(scope="module")
def written_run(tmp_path_factory):
    inst = build_instance(seed=7, n_train=60, n_eval=12, n_benchmarks=2)
    result = run_cascade(
        inst.training, inst.evals, inst.train_store, inst.eval_store, inst.config
    )
    report = build_report(result.matches, len(inst.training.documents))
    out = tmp_path_factory.mktemp("runio") / "run"
    manifest = runio.write_run(
        out,
        inst.training,
        inst.evals,
        result,
        report,
        inst.config,
        inputs={"train": "train.jsonl", "eval": "eval.jsonl"},
        started_at=runio.utc_now(),
        threads=1,
    )
    return {"inst": inst, "result": result, "out": out, "manifest": manifest}


class TestWriteRun:
    def test_all_artifacts_present(self, written_run):
        out = written_run["out"]
        for name in (
            runio.MANIFEST_FILE,
            runio.CONFIG_FILE,
            runio.REMOVED_IDS_FILE,
            runio.REMOVALS_FILE,
            runio.MATCHES_FILE,
            runio.DECONTAMINATED_FILE,
            runio.REPORT_JSON_FILE,
            runio.REPORT_TSV_FILE,
            runio.REPORT_TXT_FILE,
            runio.AUDIT_FILE,
            runio.BENCHMARKS_FILE,
        ):
            assert (out / name).is_file(), name
        assert (out / runio.SWEEPS_DIR).is_dir()

    def test_manifest_counts_match_result(self, written_run):
        manifest = written_run["manifest"]
        result = written_run["result"]
        inst = written_run["inst"]
        assert manifest.counts["training_docs"] == len(inst.training.documents)
        assert manifest.counts["eval_docs"] == len(inst.evals.documents)
        assert manifest.counts["removed"] == len(result.removed)
        assert manifest.counts["matches_logged"] == len(result.matches)
        assert manifest.config_hash == config_hash(inst.config)
        assert manifest.run_id.startswith("run-")
        # timestamps are real ISO-8601 instants
        for stamp in (manifest.started_at, manifest.finished_at):
            assert datetime.fromisoformat(stamp).tzinfo is not None

    def test_removed_ids_sorted_and_consistent(self, written_run):
        out = written_run["out"]
        lines = (out / runio.REMOVED_IDS_FILE).read_text().splitlines()
        assert lines == sorted(lines)
        assert set(lines) == written_run["result"].removed
        removal_ids = [
            json.loads(line)["id"]
            for line in (out / runio.REMOVALS_FILE).read_text().splitlines()
        ]
        assert removal_ids == lines

    def test_decontaminated_excludes_exactly_removed(self, written_run):
        inst = written_run["inst"]
        kept = load_corpus(
            written_run["out"] / runio.DECONTAMINATED_FILE, split="training"
        )
        kept_ids = {d.id for d in kept.documents}
        assert kept_ids == {
            d.id for d in inst.training.documents
        } - written_run["result"].removed

    def test_resolved_config_reloads_to_same_hash(self, written_run):
        cfg = load_config(written_run["out"] / runio.CONFIG_FILE)
        assert config_hash(cfg) == written_run["manifest"].config_hash


class TestReaders:
    def test_manifest_round_trip(self, written_run):
        back = runio.read_manifest(written_run["out"])
        assert back == written_run["manifest"]

    def test_read_manifest_rejects_non_run_dir(self, tmp_path):
        with pytest.raises(EngineError, match=runio.MANIFEST_FILE):
            runio.read_manifest(tmp_path)

    def test_manifest_from_json_malformed(self):
        with pytest.raises(EngineError, match="malformed"):
            runio.manifest_from_json({"run_id": "x"})

    def test_iter_matches_round_trip(self, written_run):
        wires = list(runio.iter_matches(written_run["out"]))
        result = written_run["result"]
        assert len(wires) == len(result.matches)
        for wire, match in zip(wires, result.matches):
            assert wire["training_doc_id"] == match.training_doc_id
            assert wire["eval_doc_id"] == match.eval_doc_id
            assert wire["sim_img"] == match.sim_img
            assert wire["c_text"] == match.c_text
            assert wire["decision"] == match.decision
            assert isinstance(wire["train_excerpt"], str)
            assert isinstance(wire["eval_image_ids"], list)

    def test_load_matches_wire_rebuilds_scores(self, written_run):
        rebuilt = runio.load_matches_wire(written_run["out"] / runio.MATCHES_FILE)
        assert [
            (m.training_doc_id, m.eval_doc_id, m.benchmark, m.sim_img, m.c_text,
             m.decision, m.stage_reached)
            for m in rebuilt
        ] == [
            (m.training_doc_id, m.eval_doc_id, m.benchmark, m.sim_img, m.c_text,
             m.decision, m.stage_reached)
            for m in written_run["result"].matches
        ]

    def test_load_matches_wire_bad_line(self, tmp_path):
        path = tmp_path / "matches.jsonl"
        path.write_text('{"training_doc_id": "t"}\n')
        with pytest.raises(EngineError, match=":1"):
            runio.load_matches_wire(path)

    def test_read_report_and_benchmarks_type_checked(self, written_run, tmp_path):
        report = runio.read_report(written_run["out"])
        assert "rows" in report and "union" in report and "total_training_docs" in report
        rows = runio.read_benchmarks(written_run["out"])
        assert [r["benchmark"] for r in rows] == sorted(r["benchmark"] for r in rows)
        (tmp_path / runio.REPORT_JSON_FILE).write_text("[]")
        with pytest.raises(EngineError, match="object"):
            runio.read_report(tmp_path)
        (tmp_path / runio.BENCHMARKS_FILE).write_text("{}")
        with pytest.raises(EngineError, match="list"):
            runio.read_benchmarks(tmp_path)

    def test_sweep_round_trip_and_missing(self, written_run, tmp_path):
        assert runio.read_sweep(tmp_path, "alpha") is None
        profile = {"benchmark": "alpha", "grid": [0.4, 0.8], "flagged": [3, 1]}
        runio.write_sweep(tmp_path, "alpha", profile)
        assert runio.read_sweep(tmp_path, "alpha") == profile


class TestBenchmarkSummaries:
    def test_counts_and_share(self, written_run):
        inst = written_run["inst"]
        result = written_run["result"]
        rows = runio.benchmark_summaries(
            inst.evals, inst.config, result, len(inst.training.documents)
        )
        by_name = {row["benchmark"]: row for row in rows}
        for name, row in by_name.items():
            expected_flagged = sum(1 for m in result.matches if m.benchmark == name)
            expected_removed = len(
                {
                    m.training_doc_id
                    for m in result.matches
                    if m.benchmark == name and m.decision == "remove"
                }
            )
            assert row["flagged_matches"] == expected_flagged
            assert row["removed_docs"] == expected_removed
            assert row["removed_share"] == pytest.approx(
                expected_removed / len(inst.training.documents)
            )
            assert row["policy"]["tau_i"] == inst.config.policy_for(name).tau_i
        assert sum(r["eval_docs"] for r in rows) == len(inst.evals.documents)
