"""CLI behaviour through in-process main(): exit codes, stdout/stderr contracts."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from mmdecon import runio
from mmdecon.cli import _manifest_path, _parse_grid, main
from mmdecon.synthetic import build_instance, write_instance

SPECS = Path(__file__).parent / "data" / "model_specs.json"


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    inst = build_instance(seed=31, n_train=50, n_eval=10, n_benchmarks=2)
    paths = write_instance(inst, tmp_path_factory.mktemp("cli_inputs"))
    return inst, paths


def corpus_flags(paths):
    return [
        "--train", paths["train"],
        "--eval", paths["eval"],
        "--train-emb", paths["train_emb"],
        "--eval-emb", paths["eval_emb"],
        "--config", paths["config"],
    ]


def stderr_error(capsys):
    err_lines = [l for l in capsys.readouterr().err.splitlines() if l.strip()]
    return json.loads(err_lines[-1])


class TestArgHandling:
    def test_manifest_path_derivation(self):
        assert _manifest_path("v.demb", None) == Path("v.manifest.jsonl")
        assert _manifest_path("v.bin", None) == Path("v.bin.manifest.jsonl")
        assert _manifest_path("v.demb", "m.jsonl") == Path("m.jsonl")

    def test_grid_parsing(self):
        assert len(_parse_grid("0.4:1.0:0.05")) == 13
        assert _parse_grid("0.5,0.75") == (0.5, 0.75)

    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit):
            main(["flops", "--specs", str(SPECS), "--bogus"])


class TestRun:
    def test_summary_json_and_artifacts(self, inputs, tmp_path, capsys):
        inst, paths = inputs
        out = tmp_path / "run"
        rc = main(["run", *corpus_flags(paths), "--out", str(out)])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["training_docs"] == len(inst.training.documents)
        assert summary["removed"] == len(
            (out / runio.REMOVED_IDS_FILE).read_text().split()
        )
        assert summary["run_id"] == runio.read_manifest(out).run_id
        for leak in inst.leak_ids:
            assert leak in (out / runio.REMOVED_IDS_FILE).read_text().split()

    def test_progress_events_on_stderr(self, inputs, tmp_path, capsys):
        _, paths = inputs
        rc = main(["run", *corpus_flags(paths), "--out", str(tmp_path / "r")])
        assert rc == 0
        events = [json.loads(l) for l in capsys.readouterr().err.splitlines()]
        assert events and all(e["event"] == "cascade_progress" for e in events)
        done = [e["docs_done"] for e in events]
        assert done == sorted(done)
        assert done[-1] == events[-1]["docs_total"]

    def test_thread_env_fallback(self, inputs, tmp_path, monkeypatch):
        _, paths = inputs
        monkeypatch.setenv("DECON_THREADS", "3")
        rc = main(["run", *corpus_flags(paths), "--out", str(tmp_path / "r")])
        assert rc == 0
        assert runio.read_manifest(tmp_path / "r").threads == 3

    def test_bad_thread_env(self, inputs, tmp_path, monkeypatch, capsys):
        _, paths = inputs
        monkeypatch.setenv("DECON_THREADS", "many")
        rc = main(["run", *corpus_flags(paths), "--out", str(tmp_path / "r")])
        assert rc == 2
        assert "DECON_THREADS" in stderr_error(capsys)["message"]

    def test_missing_input_reports_json_error(self, inputs, tmp_path, capsys):
        _, paths = inputs
        args = corpus_flags(paths)
        args[1] = str(tmp_path / "nope.jsonl")
        rc = main(["run", *args, "--out", str(tmp_path / "r")])
        assert rc == 2
        err = stderr_error(capsys)
        assert err["type"] and "nope.jsonl" in err["message"]


class TestValidate:
    def test_all_inputs_ok(self, inputs, capsys):
        _, paths = inputs
        rc = main(
            [
                "validate", *corpus_flags(paths),
                "--train-emb-manifest", paths["train_manifest"],
            ]
        )
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["ok"] is True
        assert any("image references" in c for c in out["checked"])

    def test_duplicate_id_rc2_names_id(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        row = {"id": "d000", "split": "training", "question": "q", "answer": ""}
        bad.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n")
        rc = main(["validate", "--train", str(bad)])
        assert rc == 2
        err = stderr_error(capsys)
        assert "d000" in json.dumps(err)

    def test_dangling_image_reference(self, inputs, tmp_path, capsys):
        _, paths = inputs
        bad = tmp_path / "train.jsonl"
        bad.write_text(
            json.dumps(
                {"id": "t0", "split": "training", "question": "q", "answer": "",
                 "image_ids": ["ghost-image"]}
            )
            + "\n"
        )
        rc = main(
            ["validate", "--train", str(bad), "--train-emb", paths["train_emb"]]
        )
        assert rc == 2
        assert "ghost-image" in stderr_error(capsys)["message"]

    def test_no_flags_is_config_error(self, capsys):
        rc = main(["validate"])
        assert rc == 2
        assert stderr_error(capsys)["type"] == "ConfigError"


class TestSweep:
    def test_writes_profiles_for_all_benchmarks(self, completed_run):
        run_dir = completed_run["run_dir"]
        benches = sorted(
            {d.benchmark for d in completed_run["instance"].evals.documents}
        )
        for name in benches:
            profile = runio.read_sweep(run_dir, name)
            assert profile is not None
            assert len(profile["grid"]) == 13
            assert len(profile["flagged_counts"]) == 13

    def test_custom_comma_grid(self, inputs, tmp_path, capsys):
        _, paths = inputs
        rc = main(
            [
                "sweep", *corpus_flags(paths), "--out", str(tmp_path),
                "--benchmark", "alpha", "--grid", "0.5,0.9",
            ]
        )
        assert rc == 0
        profile = runio.read_sweep(tmp_path, "alpha")
        assert profile["grid"] == [0.5, 0.9]
        assert json.loads(capsys.readouterr().out)["benchmarks"] == ["alpha"]

    @pytest.mark.parametrize("grid", ["0.9,abc", "1.0:0.4:0.05", "0.9,0.5", "0.4:1.0:0"])
    def test_bad_grid_rc2(self, inputs, tmp_path, capsys, grid):
        _, paths = inputs
        rc = main(
            ["sweep", *corpus_flags(paths), "--out", str(tmp_path), "--grid", grid]
        )
        assert rc == 2
        assert stderr_error(capsys)["type"] == "ConfigError"


class TestReport:
    def test_formats_match_run_renders(self, completed_run, tmp_path, capsys):
        run_dir = completed_run["run_dir"]
        matches = str(run_dir / runio.MATCHES_FILE)
        total = str(len(completed_run["instance"].training.documents))
        rc = main(["report", "--matches", matches, "--total", total, "--format", "tsv"])
        assert rc == 0
        assert capsys.readouterr().out == (run_dir / runio.REPORT_TSV_FILE).read_text()

        out_path = tmp_path / "r.json"
        rc = main(
            ["report", "--matches", matches, "--total", total,
             "--format", "json", "--out", str(out_path)]
        )
        assert rc == 0
        assert json.loads(out_path.read_text()) == runio.read_report(run_dir)

        rc = main(["report", "--matches", matches, "--total", total])
        assert rc == 0
        assert capsys.readouterr().out == (run_dir / runio.REPORT_TXT_FILE).read_text()


class TestFlopsCommands:
    def test_flops_json(self, capsys):
        rc = main(["flops", "--specs", str(SPECS)])
        assert rc == 0
        records = json.loads(capsys.readouterr().out)
        assert len(records) == 13
        for row in records:
            assert row["train_flops"] == 6 * row["active_params"] * row["vl_tokens"]

    def test_flops_tsv_header(self, capsys):
        rc = main(["flops", "--specs", str(SPECS), "--format", "tsv"])
        assert rc == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert header.split("\t")[0] == "name"

    def test_pareto_frozen_names(self, capsys):
        rc = main(["pareto", "--specs", str(SPECS)])
        assert rc == 0
        rows = json.loads(capsys.readouterr().out)
        assert [r["name"] for r in rows] == [
            "curated-1b", "curated-2b", "curated-4b", "qwen3.5-2b", "qwen3-vl-4b",
        ]
        assert all(a["response_flops"] < b["response_flops"]
                   for a, b in zip(rows, rows[1:]))

    def test_pareto_tsv(self, capsys):
        rc = main(["pareto", "--specs", str(SPECS), "--format", "tsv"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "name\tresponse_flops\taccuracy"
        assert len(lines) == 6


class TestServe:
    def test_bad_bind_rc2(self, completed_run, capsys):
        rc = main(
            ["serve", "--run", str(completed_run["run_dir"]), "--bind", "nonsense"]
        )
        assert rc == 2
        assert "host:port" in stderr_error(capsys)["message"]

    def test_non_run_dir_rc2(self, tmp_path, capsys):
        rc = main(["serve", "--run", str(tmp_path)])
        assert rc == 2
        assert runio.MANIFEST_FILE in stderr_error(capsys)["message"]
