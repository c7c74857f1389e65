"""Shared fixtures and the acceptance-criteria terminal summary."""

from __future__ import annotations

import json

import pytest

from mmdecon.cli import main as cli_main
from mmdecon.synthetic import build_instance, write_instance

_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome == "skipped"):
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{label.get(outcome, outcome.upper())}  {name}")


@pytest.fixture(scope="session")
def completed_run(tmp_path_factory):
    """One synthetic corpus run end-to-end through the CLI, shared read-only."""
    root = tmp_path_factory.mktemp("shared_run")
    inst = build_instance(seed=101, n_train=140, n_eval=18, n_benchmarks=3)
    paths = write_instance(inst, root / "data")
    out = root / "run"
    rc = cli_main(
        [
            "run",
            "--train", str(paths["train"]),
            "--eval", str(paths["eval"]),
            "--train-emb", str(paths["train_emb"]),
            "--eval-emb", str(paths["eval_emb"]),
            "--config", str(paths["config"]),
            "--out", str(out),
        ]
    )
    assert rc == 0
    rc = cli_main(
        [
            "sweep",
            "--train", str(paths["train"]),
            "--eval", str(paths["eval"]),
            "--train-emb", str(paths["train_emb"]),
            "--eval-emb", str(paths["eval_emb"]),
            "--config", str(paths["config"]),
            "--out", str(out),
            "--sample-k", "2",
        ]
    )
    assert rc == 0
    return {"instance": inst, "paths": paths, "run_dir": out}


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
