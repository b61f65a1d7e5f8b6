import json
import os
import shutil

import pytest
from pydantic import ValidationError

from app.core.exceptions import EmptyCache
from app.schemas.identity import VerificationStatus
from app.schemas.run import RunConfig, SweepRequest
from app.services.run_service import (
    EXIT_FAIL,
    EXIT_INCONCLUSIVE,
    EXIT_PASS,
    build_report,
    exit_code,
    format_summary,
    format_table,
    run_sweep,
    run_verify,
    trial_seeds,
    write_cache,
)

BARNES1 = {"a": [0.5, 0.7], "b": [0.6, 0.9]}


def test_run_config_needs_exactly_one_source():
    with pytest.raises(ValidationError):
        RunConfig(identity="barnes1", params=BARNES1, seed=3)
    with pytest.raises(ValidationError):
        RunConfig(identity="barnes1")
    RunConfig(identity="barnes1", seed=3)


def test_run_id_is_a_content_hash():
    first = RunConfig(identity="barnes1", params=BARNES1)
    second = RunConfig(identity="barnes1", params=dict(BARNES1))
    assert first.run_id() == second.run_id()
    assert first.run_id() != RunConfig(identity="barnes1", params=BARNES1, rel_tol=1e-6).run_id()
    assert len(first.run_id()) == 64


def test_trial_seeds_are_reproducible():
    assert trial_seeds(5, 4) == trial_seeds(5, 4)
    assert trial_seeds(5, 4)[:2] == trial_seeds(5, 2)
    assert len(set(trial_seeds(5, 10))) == 10


def test_exit_codes():
    assert exit_code(VerificationStatus.PASS) == EXIT_PASS == 0
    assert exit_code(VerificationStatus.FAIL) == EXIT_FAIL == 1
    assert exit_code(VerificationStatus.INCONCLUSIVE) == EXIT_INCONCLUSIVE == 2


def test_run_verify_with_offsets():
    report = run_verify(RunConfig(identity="barnes1", params=BARNES1, offsets=[0.2]))
    assert report.status == VerificationStatus.PASS
    assert report.contour.offsets == [0.2]
    assert "PASS" in format_summary(report)


def test_run_verify_seeded_is_deterministic():
    config = RunConfig(identity="g1", n=1, seed=11)
    first = run_verify(config).model_dump(exclude={"runtime_s"})
    second = run_verify(config).model_dump(exclude={"runtime_s"})
    assert first == second


def test_sweep_counts():
    sweep = run_sweep(SweepRequest(identity="barnes1", trials=3, seed=2))
    assert sweep.status == VerificationStatus.PASS
    assert sweep.counts == {"pass": 3, "fail": 0, "inconclusive": 0}
    assert len(sweep.entries) == 3
    assert sweep.worst_rel_deviation < 1e-8


def test_sweep_is_independent_of_workers():
    request = SweepRequest(identity="barnes1", trials=2, seed=4)
    serial = run_sweep(request, jobs=1)
    parallel = run_sweep(request, jobs=2)
    assert [e.params for e in serial.entries] == [e.params for e in parallel.entries]
    assert [e.rel_deviation for e in serial.entries] == [e.rel_deviation for e in parallel.entries]


def test_sweep_rejects_zero_trials():
    with pytest.raises(ValidationError):
        SweepRequest(identity="barnes1", trials=0)


def test_empty_cache(tmp_path):
    with pytest.raises(EmptyCache):
        build_report(str(tmp_path))
    with pytest.raises(EmptyCache):
        build_report(str(tmp_path / "missing"))


def test_report_merges_cached_runs(tmp_path):
    cache = str(tmp_path)
    for params in (BARNES1, {"a": [1.1, 0.3], "b": [0.2, 0.8]}):
        config = RunConfig(identity="barnes1", params=params)
        write_cache(cache, config.run_id(), "verify", config.model_dump(mode="json"), run_verify(config))
    sweep_request = SweepRequest(identity="barnes1", trials=1, seed=0)
    write_cache(cache, sweep_request.run_id(), "sweep", sweep_request.model_dump(mode="json"), run_sweep(sweep_request))

    summary = build_report(cache)
    assert len(summary.rows) == 3
    assert {row.kind for row in summary.rows} == {"verify", "sweep"}
    assert all(row.status == VerificationStatus.PASS for row in summary.rows)
    assert summary.notes == []
    assert "barnes1" in format_table(summary)


def test_report_duplicate_run_keeps_latest(tmp_path):
    cache = tmp_path
    config = RunConfig(identity="barnes1", params=BARNES1)
    path = write_cache(str(cache), config.run_id(), "verify", config.model_dump(mode="json"), run_verify(config))
    copy = cache / "copy.json"
    shutil.copy(path, copy)
    stat = os.stat(path)
    os.utime(copy, (stat.st_atime + 10, stat.st_mtime + 10))

    summary = build_report(str(cache))
    assert len(summary.rows) == 1
    assert summary.rows[0].source == "copy.json"
    assert summary.notes and summary.notes[0].startswith("duplicate run")


def test_report_skips_unreadable_files(tmp_path):
    config = RunConfig(identity="barnes1", params=BARNES1)
    write_cache(str(tmp_path), config.run_id(), "verify", config.model_dump(mode="json"), run_verify(config))
    (tmp_path / "broken.json").write_text("{not json")
    summary = build_report(str(tmp_path))
    assert len(summary.rows) == 1
    assert any("broken.json" in note for note in summary.notes)


def test_cache_document_layout(tmp_path):
    config = RunConfig(identity="barnes1", params=BARNES1)
    path = write_cache(str(tmp_path), config.run_id(), "verify", config.model_dump(mode="json"), run_verify(config))
    with open(path, encoding="utf-8") as f:
        document = json.load(f)
    assert document["run_id"] == config.run_id()
    assert document["kind"] == "verify"
    assert document["report"]["status"] == "pass"
    assert document["config"]["identity"] == "barnes1"
