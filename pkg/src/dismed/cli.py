"""Command-line front end.

Subcommands: validate, decide, conditions, optimize, pareto, sweep,
sensitivity. Every subcommand accepts --config (or the DISMED_CONFIG
environment variable), --format json|csv and --out. Verdicts are payload,
never exit status:

    0  evaluation completed
    2  validation or parse failure
    3  infeasible optimization
    4  internal error
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import os
import sys
from pathlib import Path
from typing import Any, Optional

from .conditions import (
    ConditionId,
    ConditionReport,
    ConditionSet,
    DecisionSummary,
    decide,
    eval_condition_set,
)
from .config import RunConfig
from .errors import DismedError, ParseError, ValidationError
from .io import load_scenario
from .model import ValidationReport, validate_scenario
from .optimizer import Bounds, OptResult, OptimizerConfig, ParetoPoint, optimize_broker, pareto_sweep
from .simulate import DistributionSpec, SensitivityResult, SweepStats, run_sweep, sensitivity

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def _load_json_file(path: str, what: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {what} file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} file {path}: malformed JSON: {exc}") from exc


def _load_config(args: argparse.Namespace) -> RunConfig:
    path = args.config or os.environ.get("DISMED_CONFIG")
    if not path:
        cfg = RunConfig()
    else:
        cfg = RunConfig.from_dict(_load_json_file(path, "config"))
    if args.format:
        cfg = cfg.with_overrides(output_format=args.format)
    return cfg


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def _ev_cells(pair) -> list:
    return [None, None] if pair is None else pair


def _report_rows(report: ConditionReport) -> list[list]:
    rows = []
    for v in report.verdicts:
        d = v.to_dict()
        rows.append([d["id"], d["status"], *_ev_cells(d["lhs"]), *_ev_cells(d["rhs"]),
                     d["guard_status"], "; ".join(d["notes"])])
    return rows


_REPORT_HEADER = ["id", "status", "lhs_lower", "lhs_upper",
                  "rhs_lower", "rhs_upper", "guard", "notes"]


def _to_csv(result: Any) -> str:
    if isinstance(result, ValidationReport):
        return _csv_text(["code", "message"],
                         [[v.code, v.message] for v in result.violations])
    if isinstance(result, ConditionReport):
        return _csv_text(_REPORT_HEADER, _report_rows(result))
    if isinstance(result, DecisionSummary):
        rows = []
        for name in ("buyer", "broker_web", "seller"):
            report = result.reports[name]
            rows.append([name, "aggregate", report.aggregate.value])
            rows.extend([name, v.id.label, v.status.value] for v in report.verdicts)
        return _csv_text(["set", "id", "status"], rows)
    if isinstance(result, OptResult):
        d = result.decision
        return _csv_text(
            ["feasible", "objective", "iterations", "mode",
             "B_b", "B_s", "B_i", "B_n", "state"],
            [[result.feasible, result.objective, result.iterations, result.mode,
              *((d.B_b, d.B_s, d.B_i, d.B_n, d.state) if d else (None,) * 5)]])
    if isinstance(result, list) and all(isinstance(p, ParetoPoint) for p in result):
        return _csv_text(
            ["cost", "capital", "B_b", "B_s", "B_i", "B_n", "state"],
            [[p.cost, p.capital, p.decision.B_b, p.decision.B_s,
              p.decision.B_i, p.decision.B_n, p.decision.state] for p in result])
    if isinstance(result, SweepStats):
        return _csv_text(
            ["id", "frequency", "indeterminate_rate"],
            [[label, stats["frequency"], stats["indeterminate_rate"]]
             for label, stats in result.per_condition.items()])
    if isinstance(result, SensitivityResult):
        d = result.to_dict()
        return _csv_text(
            ["condition", "parameter", "status", "margin", "elasticity",
             "delta_to_flip", "rel_step"],
            [[d["condition"], d["parameter"], d["status"], d["margin"],
              d["elasticity"], d["delta_to_flip"], d["rel_step"]]])
    raise TypeError(f"no CSV rendering for {type(result).__name__}")


def _to_payload(result: Any) -> Any:
    if isinstance(result, list):
        return [p.to_dict() for p in result]
    return result.to_dict()


def render_report(result: Any, fmt: str, out: Optional[str]) -> str:
    """Serialize a result and write it to ``out`` (or stdout). Returns the text."""
    if fmt == "json":
        text = json.dumps(_to_payload(result), indent=2, ensure_ascii=False) + "\n"
    elif fmt == "csv":
        text = _to_csv(result)
    else:
        raise ParseError(f"unknown output format {fmt!r}")
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return text


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args, cfg: RunConfig) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ValidationError as exc:
        report = ValidationReport(ok=False, violations=tuple(exc.violations))
        render_report(report, cfg.output_format, args.out)
        codes = ", ".join(report.codes())
        print(f"invalid scenario: {codes}", file=sys.stderr)
        return EXIT_INVALID
    report = validate_scenario(scenario)
    render_report(report, cfg.output_format, args.out)
    return EXIT_OK


def _cmd_decide(args, cfg: RunConfig) -> int:
    summary = decide(load_scenario(args.scenario), cfg)
    render_report(summary, cfg.output_format, args.out)
    return EXIT_OK


_SET_ALIASES = {"buyer": ConditionSet.BUYER, "broker": ConditionSet.BROKER_WEB,
                "broker_web": ConditionSet.BROKER_WEB, "seller": ConditionSet.SELLER}


def _cmd_conditions(args, cfg: RunConfig) -> int:
    report = eval_condition_set(load_scenario(args.scenario), _SET_ALIASES[args.set], cfg)
    render_report(report, cfg.output_format, args.out)
    return EXIT_OK


def _cmd_optimize(args, cfg: RunConfig) -> int:
    scenario = load_scenario(args.scenario)
    bounds = Bounds.from_dict(_load_json_file(args.bounds, "bounds"))
    result = optimize_broker(scenario, bounds, OptimizerConfig())
    render_report(result, cfg.output_format, args.out)
    if not result.feasible:
        print("optimization infeasible: commission cannot cover the cost box",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_pareto(args, cfg: RunConfig) -> int:
    scenario = load_scenario(args.scenario)
    bounds = Bounds.from_dict(_load_json_file(args.bounds, "bounds"))
    frontier = pareto_sweep(scenario, bounds, args.points, OptimizerConfig())
    render_report(frontier, cfg.output_format, args.out)
    if not frontier:
        print("pareto sweep infeasible: empty frontier", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_sweep(args, cfg: RunConfig) -> int:
    scenario = load_scenario(args.scenario)
    dist = DistributionSpec.from_dict(_load_json_file(args.dist, "distribution"))
    stats = run_sweep(scenario, dist, args.n, args.seed, cfg, workers=args.workers)
    render_report(stats, cfg.output_format, args.out)
    return EXIT_OK


def _cmd_sensitivity(args, cfg: RunConfig) -> int:
    scenario = load_scenario(args.scenario)
    cid = ConditionId.parse(args.condition)
    result = sensitivity(scenario, cid, args.param, rel_step=args.rel_step, cfg=cfg)
    render_report(result, cfg.output_format, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dismed",
        description="Evaluate, optimize and stress-test broker disintermediation scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--config", help="run-config JSON file (default: $DISMED_CONFIG)")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--out", help="write the report here instead of stdout")

    common(sub.add_parser("validate", help="validate a scenario file"))
    common(sub.add_parser("decide", help="evaluate all three condition sets"))

    p = sub.add_parser("conditions", help="evaluate one condition set")
    common(p)
    p.add_argument("--set", required=True, choices=tuple(_SET_ALIASES))

    p = sub.add_parser("optimize", help="maximize the broker objective")
    common(p)
    p.add_argument("--bounds", required=True, help="bounds JSON file")

    p = sub.add_parser("pareto", help="trace the cost/capital frontier")
    common(p)
    p.add_argument("--bounds", required=True, help="bounds JSON file")
    p.add_argument("--points", type=int, default=11, help="epsilon levels (k >= 2)")

    p = sub.add_parser("sweep", help="Monte Carlo sweep over a distribution")
    common(p)
    p.add_argument("--dist", required=True, help="distribution JSON file")
    p.add_argument("-n", type=int, required=True, help="number of draws")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sensitivity", help="margin/elasticity for one condition")
    common(p)
    p.add_argument("--condition", required=True, help="condition id, e.g. B5")
    p.add_argument("--param", required=True, help="symbol to perturb, e.g. psi_b")
    p.add_argument("--rel-step", type=float, default=0.05, dest="rel_step")

    return parser


_COMMANDS = {
    "validate": _cmd_validate,
    "decide": _cmd_decide,
    "conditions": _cmd_conditions,
    "optimize": _cmd_optimize,
    "pareto": _cmd_pareto,
    "sweep": _cmd_sweep,
    "sensitivity": _cmd_sensitivity,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        codes = ", ".join(v.code for v in exc.violations)
        print(f"error: invalid scenario: {codes}", file=sys.stderr)
        return EXIT_INVALID
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DismedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
