"""Command-line front end.

    python -m app list
    python -m app verify --identity barnes1 --params '{"a":[0.5,0.7],"b":[0.6,0.9]}'
    python -m app verify --identity g1 --n 2 --seed 7 --out g1.json
    python -m app sweep --identity barnes1 --trials 20 --seed 1 --jobs 4
    python -m app report
    python -m app halfplane chain-rule --s 1 --alpha 1.5 --beta 1.5 --z '[0,1]' --zeta '[0,1]'
    python -m app halfplane transition --s 1 --nu 0.4 --p 2

Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 usage or input error.
The human summary goes to stdout, logs to stderr.
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import Settings, get_settings
from app.core.exceptions import ConstraintViolated, MBVerifyError, UsageError
from app.core.logging import setup_logging
from app.schemas.common import parse_complex
from app.schemas.halfplane import HalfPlanePoint
from app.schemas.run import RunConfig, SweepRequest
from app.services.catalog_service import list_identities
from app.services.halfplane_service import verify_chain_rule, verify_chain_rule_scaled, verify_transition_element
from app.services.run_service import (
    EXIT_PASS,
    EXIT_USAGE,
    build_report,
    exit_code,
    format_summary,
    format_table,
    quadrature_config,
    run_sweep,
    run_verify,
    write_cache,
    write_json,
)
from app.utils.params import load_params

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; route it through UsageError instead."""

    def error(self, message):
        raise UsageError(message)


def _json_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"cannot parse {text!r} as JSON: {e}")


def _complex_arg(name: str, text: str) -> complex:
    try:
        return parse_complex(_json_value(text))
    except ValueError as e:
        raise UsageError(f"--{name}: {e}")


def _point_arg(name: str, text: str) -> HalfPlanePoint:
    z = _complex_arg(name, text)
    try:
        return HalfPlanePoint(x=z.real, y=z.imag)
    except ValidationError:
        raise UsageError(f"--{name} must lie in the upper half-plane, got {z}")


def _offsets_arg(text: str) -> List[float]:
    value = _json_value(text) if text.strip().startswith("[") else text.split(",")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise UsageError(f"--offsets must be a list of numbers, got {text!r}")


def _or_default(value, fallback):
    return fallback if value is None else value


def _jobs_arg(args, settings: Settings) -> int:
    jobs = _or_default(args.jobs, settings.jobs)
    if jobs < 1:
        raise UsageError(f"--jobs must be at least 1, got {jobs}")
    return jobs


def _add_quadrature_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["auto", "tensor", "qmc"], default="auto", help="Quadrature method")
    p.add_argument("--rel-tol", type=float, default=None, help="Relative tolerance (default from MBVERIFY_REL_TOL)")
    p.add_argument("--qmc-points", type=int, default=None, help="Points per QMC randomization")
    p.add_argument("--margin", type=float, default=None, help="Contour separation margin")
    p.add_argument("--jobs", type=int, default=None, help="Parallel workers")
    p.add_argument("--out", type=str, default=None, help="Write the JSON report to this path")
    p.add_argument("--cache-dir", type=str, default=None, help="Result cache directory (default from MBVERIFY_CACHE_DIR)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="mbverify",
        description="Numerical verification of multidimensional Mellin-Barnes integral identities",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--log-level", default=None, help="Log level (default from MBVERIFY_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sub.add_parser("list", help="List catalog identities")

    p = sub.add_parser("verify", help="Verify one identity instance")
    p.add_argument("--identity", required=True, help="Identity id, see `list`")
    p.add_argument("--n", type=int, default=1, help="Size parameter N")
    p.add_argument("--params", type=str, default=None, help="Parameters: JSON file path or inline JSON object")
    p.add_argument("--seed", type=int, default=None, help="Draw parameters from this seed instead of --params")
    p.add_argument("--offsets", type=str, default=None, help="Contour offsets, e.g. '[0.1,0.2]' or 0.1,0.2")
    p.add_argument("--explain", action="store_true", help="Embed the integrand factor list in the report")
    _add_quadrature_flags(p)

    p = sub.add_parser("sweep", help="Verify seeded parameter draws")
    p.add_argument("--identity", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--trials", type=int, required=True, help="Number of parameter draws (>= 1)")
    p.add_argument("--seed", type=int, default=0, help="Sweep seed; per-trial seeds are derived from it")
    _add_quadrature_flags(p)

    p = sub.add_parser("report", help="Summarize cached runs")
    p.add_argument("--cache-dir", type=str, default=None)
    p.add_argument("--out", type=str, default=None, help="Write the merged table as JSON")

    hp = sub.add_parser("halfplane", help="Half-plane diagram checks")
    hsub = hp.add_subparsers(dest="check", parser_class=_Parser)
    c = hsub.add_parser("chain-rule", help="Convolution of two propagators")
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--alpha", type=str, required=True, help="Number or [re, im]")
    c.add_argument("--beta", type=str, required=True, help="Number or [re, im]")
    c.add_argument("--z", type=str, required=True, help="[x, y] with y > 0")
    c.add_argument("--zeta", type=str, required=True, help="[x, y] with y > 0")
    c.add_argument("--scale", type=float, default=None, help="Check scaling covariance at this factor")
    c.add_argument("--rel-tol", type=float, default=1e-6)
    c.add_argument("--jobs", type=int, default=None)
    c.add_argument("--out", type=str, default=None)
    t = hsub.add_parser("transition", help="Transition element between eigenfunctions")
    t.add_argument("--s", type=float, required=True)
    t.add_argument("--nu", type=float, required=True)
    t.add_argument("--p", type=float, required=True)
    t.add_argument("--rel-tol", type=float, default=1e-6)
    t.add_argument("--jobs", type=int, default=None)
    t.add_argument("--out", type=str, default=None)
    return parser


def cmd_list(args, settings: Settings) -> int:
    for entry in list_identities():
        params = ", ".join(f"{p.name}[{p.length}]" if p.length else f"{p.name} ({p.description})" for p in entry.parameters)
        n_range = f"N>={entry.min_n}" if entry.max_n is None else f"N={entry.min_n}" if entry.max_n == entry.min_n else f"N={entry.min_n}..{entry.max_n}"
        print(f"{entry.id:<8} dim={entry.dim_formula}  {n_range}")
        print(f"         params: {params}")
        print(f"         constraints: {'; '.join(entry.constraints) or 'none'}")
        if entry.rotation:
            print(f"         rotation: {entry.rotation}")
        print(f"         paper_anchor: {entry.anchor}")
    return EXIT_PASS


def cmd_verify(args, settings: Settings) -> int:
    if args.params is not None and args.seed is not None:
        raise UsageError("give either --params or --seed, not both")
    try:
        config = RunConfig(
            identity=args.identity,
            n=args.n,
            params=load_params(args.params) if args.params is not None else None,
            seed=args.seed,
            method=args.method,
            rel_tol=_or_default(args.rel_tol, settings.default_rel_tol),
            qmc_points=_or_default(args.qmc_points, settings.default_qmc_points),
            offsets=_offsets_arg(args.offsets) if args.offsets is not None else None,
            margin=_or_default(args.margin, settings.default_margin),
            explain=args.explain,
        )
    except ValidationError as e:
        raise UsageError(f"invalid run configuration: {e.errors()[0]['msg']}")
    report = run_verify(config, max_nodes=settings.max_nodes, jobs=_jobs_arg(args, settings))
    print(format_summary(report))
    write_cache(args.cache_dir or settings.cache_dir, config.run_id(), "verify", config.model_dump(mode="json"), report)
    if args.out:
        write_json(args.out, report)
    return exit_code(report.status)


def cmd_sweep(args, settings: Settings) -> int:
    try:
        request = SweepRequest(
            identity=args.identity,
            n=args.n,
            trials=args.trials,
            seed=args.seed,
            method=args.method,
            rel_tol=_or_default(args.rel_tol, settings.default_rel_tol),
            qmc_points=_or_default(args.qmc_points, settings.default_qmc_points),
            margin=_or_default(args.margin, settings.default_margin),
        )
    except ValidationError as e:
        raise UsageError(f"invalid sweep configuration: {e.errors()[0]['loc'][0]}: {e.errors()[0]['msg']}")
    sweep = run_sweep(request, max_nodes=settings.max_nodes, jobs=_jobs_arg(args, settings))
    for entry in sweep.entries:
        print(format_summary(entry))
    counts = sweep.counts
    print(
        f"{sweep.identity} N={sweep.N}: {counts['pass']}/{sweep.trials} pass, {counts['fail']} fail, "
        f"{counts['inconclusive']} inconclusive; worst rel_dev={sweep.worst_rel_deviation}"
    )
    write_cache(args.cache_dir or settings.cache_dir, request.run_id(), "sweep", request.model_dump(mode="json"), sweep)
    if args.out:
        write_json(args.out, sweep)
    return exit_code(sweep.status)


def cmd_report(args, settings: Settings) -> int:
    summary = build_report(args.cache_dir or settings.cache_dir)
    print(format_table(summary))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(summary.model_dump(mode="json"), f, indent=2)
    return EXIT_PASS


def cmd_halfplane(args, settings: Settings) -> int:
    if args.check is None:
        raise UsageError("halfplane needs a check: chain-rule or transition")
    try:
        config = quadrature_config(
            "auto", args.rel_tol, settings.default_qmc_points, 0, settings.max_nodes, _jobs_arg(args, settings)
        )
    except ValidationError as e:
        raise UsageError(f"invalid quadrature configuration: {e.errors()[0]['loc'][0]}: {e.errors()[0]['msg']}")
    if args.check == "chain-rule":
        alpha, beta = _complex_arg("alpha", args.alpha), _complex_arg("beta", args.beta)
        z, zeta = _point_arg("z", args.z), _point_arg("zeta", args.zeta)
        if args.scale is not None:
            report = verify_chain_rule_scaled(args.s, alpha, beta, z, zeta, args.scale, config)
        else:
            report = verify_chain_rule(args.s, alpha, beta, z, zeta, config)
    else:
        report = verify_transition_element(args.s, args.nu, args.p, config)
    print(format_summary(report))
    if args.out:
        write_json(args.out, report)
    return exit_code(report.status)


COMMANDS = {
    "list": cmd_list,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "halfplane": cmd_halfplane,
}


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        setup_logging(args.log_level or settings.log_level)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        return COMMANDS[args.command](args, settings)
    except MBVerifyError as e:
        line = f"error: {type(e).__name__}: {e.message}"
        if isinstance(e, ConstraintViolated):
            line += f" [predicate: {e.predicate}]"
        print(line, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
