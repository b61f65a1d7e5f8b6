import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from joblib import Parallel, delayed

from app.core.exceptions import EmptyCache, UsageError
from app.schemas.contour import ContourSpec
from app.schemas.identity import VerificationReport, VerificationStatus
from app.schemas.quadrature import QuadratureConfig
from app.schemas.run import CacheSummary, ReportRow, RunConfig, SweepReport, SweepRequest
from app.services.catalog_service import build_identity, sample_params, verify

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

EXIT_CODES = {
    VerificationStatus.PASS: EXIT_PASS,
    VerificationStatus.FAIL: EXIT_FAIL,
    VerificationStatus.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


def exit_code(status: VerificationStatus) -> int:
    return EXIT_CODES[status]


def quadrature_config(method, rel_tol: float, qmc_points: int, seed: int, max_nodes: int, jobs: int) -> QuadratureConfig:
    return QuadratureConfig(
        method=method,
        rel_tol=rel_tol,
        qmc_points=qmc_points,
        seed=seed,
        max_nodes=max_nodes,
        jobs=jobs,
    )


def run_verify(config: RunConfig, max_nodes: int = 4_000_000, jobs: int = 1) -> VerificationReport:
    """build_identity -> contour (default or override) -> verify."""
    params = config.params if config.params is not None else sample_params(config.identity, config.n, config.seed)
    case = build_identity(config.identity, config.n, params)
    contour = ContourSpec(offsets=config.offsets, margin=config.margin) if config.offsets is not None else None
    quad = quadrature_config(config.method, config.rel_tol, config.qmc_points, config.seed or 0, max_nodes, jobs)
    return verify(case, quad, contour=contour, margin=config.margin, explain=config.explain)


def _sweep_trial(request: SweepRequest, trial_seed: int, max_nodes: int) -> VerificationReport:
    params = sample_params(request.identity, request.n, trial_seed)
    case = build_identity(request.identity, request.n, params)
    quad = quadrature_config(request.method, request.rel_tol, request.qmc_points, trial_seed, max_nodes, 1)
    return verify(case, quad, margin=request.margin)


def trial_seeds(seed: int, trials: int) -> List[int]:
    """Per-trial seeds derived from the sweep seed; independent of the worker count."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(trials)]


def run_sweep(request: SweepRequest, max_nodes: int = 4_000_000, jobs: int = 1) -> SweepReport:
    if request.trials < 1:
        raise UsageError("a sweep needs at least one trial")
    seeds = trial_seeds(request.seed, request.trials)
    logger.info(f"Sweep {request.identity} N={request.n}: {request.trials} trials, jobs={jobs}")
    if jobs > 1:
        entries = Parallel(n_jobs=jobs)(delayed(_sweep_trial)(request, s, max_nodes) for s in seeds)
    else:
        entries = [_sweep_trial(request, s, max_nodes) for s in seeds]

    counts = {status.value: 0 for status in VerificationStatus}
    for entry in entries:
        counts[entry.status.value] += 1
    deviations = [e.rel_deviation for e in entries if e.rel_deviation is not None]
    if counts[VerificationStatus.PASS.value] == len(entries):
        status = VerificationStatus.PASS
    elif counts[VerificationStatus.FAIL.value] > 0:
        status = VerificationStatus.FAIL
    else:
        status = VerificationStatus.INCONCLUSIVE
    logger.info(f"Sweep {request.identity} N={request.n}: {counts}")
    return SweepReport(
        identity=request.identity,
        N=request.n,
        trials=request.trials,
        seed=request.seed,
        counts=counts,
        worst_rel_deviation=max(deviations) if deviations else None,
        status=status,
        entries=entries,
    )


def report_document(report: Union[VerificationReport, SweepReport]) -> Dict[str, Any]:
    return report.model_dump(mode="json", by_alias=True)


def dumps_report(report: Union[VerificationReport, SweepReport]) -> str:
    return json.dumps(report_document(report), indent=2)


def write_json(path: str, report: Union[VerificationReport, SweepReport]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_report(report) + "\n")


def write_cache(cache_dir: str, run_id: str, kind: str, config: Dict[str, Any], report: Union[VerificationReport, SweepReport]) -> str:
    """Store one run as <cache_dir>/<run_id>.json; re-running the same config overwrites it."""
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"{run_id}.json")
    document = {"run_id": run_id, "kind": kind, "config": config, "report": report_document(report)}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)
    logger.debug(f"Cached {kind} run {run_id[:12]} at {path}")
    return path


def _row(document: Dict[str, Any], source: str) -> ReportRow:
    report = document["report"]
    if document.get("kind") == "sweep":
        identity, n, deviation = report["identity"], report["N"], report.get("worst_rel_deviation")
    else:
        identity, n, deviation = report["identity"], report.get("N"), report.get("rel_deviation")
    return ReportRow(
        run_id=document["run_id"],
        kind=document.get("kind", "verify"),
        identity=identity,
        N=n,
        status=report["status"],
        rel_deviation=deviation,
        source=source,
    )


def build_report(cache_dir: str) -> CacheSummary:
    """Merge cached runs into one table ordered by (identity, N, status, run_id).

    When two files carry the same run_id the one written last wins.
    """
    directory = Path(cache_dir)
    files = sorted(directory.glob("*.json")) if directory.is_dir() else []
    if not files:
        raise EmptyCache(f"no cached runs in {cache_dir}")

    chosen: Dict[str, tuple] = {}
    notes: List[str] = []
    for path in files:
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
            row = _row(document, path.name)
        except (OSError, ValueError, KeyError, TypeError) as e:
            notes.append(f"skipped {path.name}: {e}")
            logger.warning(f"Skipping unreadable cache file {path}: {e}")
            continue
        mtime = path.stat().st_mtime
        previous: Optional[tuple] = chosen.get(row.run_id)
        if previous is not None:
            newer, older = (row, previous[1]) if mtime >= previous[0] else (previous[1], row)
            notes.append(f"duplicate run {row.run_id[:12]}: kept {newer.source}, dropped {older.source}")
            if mtime < previous[0]:
                continue
        chosen[row.run_id] = (mtime, row)

    if not chosen:
        raise EmptyCache(f"no readable runs in {cache_dir}")
    rows = sorted((row for _, row in chosen.values()), key=lambda r: (r.identity, r.N or 0, r.status.value, r.run_id))
    return CacheSummary(rows=rows, notes=notes)


def format_summary(report: VerificationReport) -> str:
    """One human-readable line per report."""
    n = "" if report.N is None else f" N={report.N}"
    dev = "n/a" if report.rel_deviation is None else f"{report.rel_deviation:.3e}"
    err = "n/a" if report.rel_error is None else f"{report.rel_error:.3e}"
    line = f"{report.identity}{n}: {report.status.value.upper()} rel_dev={dev} rel_err={err} nodes={report.nodes} method={report.method or '-'}"
    extra = [report.normalization_note] if report.normalization_note else []
    extra += report.diagnostics
    return "\n".join([line] + [f"  {item}" for item in extra])


def format_table(summary: CacheSummary) -> str:
    header = f"{'identity':<12} {'N':>3} {'kind':<7} {'status':<13} {'rel_dev':>10}  run"
    lines = [header]
    for row in summary.rows:
        dev = "-" if row.rel_deviation is None else f"{row.rel_deviation:.3e}"
        lines.append(f"{row.identity:<12} {row.N if row.N is not None else '-':>3} {row.kind:<7} {row.status.value:<13} {dev:>10}  {row.run_id[:12]}")
    lines += [f"note: {note}" for note in summary.notes]
    return "\n".join(lines)
