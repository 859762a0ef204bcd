"""Command-line entry point.

    tsow list
    tsow simulate grover --n 2 --setting 01
    tsow predict grover --n 2 --mode gf2-linear
    tsow compare grover --n 4 --format json
    tsow verify grover --n 2
    tsow probe-simon --n 2

Exit codes: 0 ok, 2 configuration, 3 layout or calibration, 4 a broken
contract. Every nonzero exit prints a JSON error object on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algorithms import (
    AlgorithmUnitary,
    build_for,
    run_extended,
    run_relativized,
    run_simon,
)
from .errors import ConfigError, ContractError, TsowError
from .oracle import ALIASES, BUILTINS, OracleProblem, fmt_bits, load_problem_file, make_builtin, parse_bits
from .rules import CSV_FIELDS, compare, predict, simon_advanced_knowledge_probe
from .statevector import dump_state
from .symmetrization import MODES
from .verify import verify_problem

SCHEMA = "tsow/1"
EXIT_OK, EXIT_CONFIG, EXIT_LAYOUT, EXIT_CONTRACT = 0, 2, 3, 4
LAYOUT_CODES = {"LAYOUT_MISMATCH", "CALIBRATION_FAILED", "PHASE_NEEDS_BINARY", "LENGTH_MISMATCH"}
CONFIG_CODES = {"CONFIG", "PROBLEM_FILE", "INVALID_SUBSET", "SIZE_LIMIT", "UNKNOWN_OUTCOME", "USE_LONG_VARIANT"}
DEFAULT_N = {"grover": 2, "dj": 2, "bv": 2, "simon": 2}
BUILTIN_RANGES = {"grover": "1..12", "dj": "1..3", "bv": "1..10", "simon": "2..3"}
COMPARE_ALL = (("grover", 2), ("grover", 4), ("dj", 2), ("dj", 3), ("bv", 2), ("bv", 4), ("simon", 2))


def exit_code(err: TsowError) -> int:
    if err.code in CONFIG_CODES:
        return EXIT_CONFIG
    if err.code in LAYOUT_CODES:
        return EXIT_LAYOUT
    return EXIT_CONTRACT


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------- plumbing


def _resolve(args) -> tuple[str | None, OracleProblem, AlgorithmUnitary | None]:
    """Problem and its standard algorithm (None for problem files)."""
    if args.problem_file:
        return None, load_problem_file(args.problem_file), None
    if not args.problem:
        raise ConfigError("name a builtin problem or pass --problem-file")
    key = ALIASES.get(args.problem, args.problem)
    if key not in BUILTINS:
        raise ConfigError(f"unknown problem {args.problem!r}; builtins are {', '.join(BUILTINS)}")
    n = args.n if args.n is not None else DEFAULT_N[key]
    problem = make_builtin(key, n)
    return key, problem, build_for(key, n, problem)


def _n(args, problem: OracleProblem, key: str | None) -> int:
    if args.n is not None:
        return args.n
    return DEFAULT_N[key] if key else problem.setting_width


def _rng_record(seed: int) -> dict:
    return {"bit_generator": "PCG64", "library": "numpy", "seed": seed}


def _envelope(command: str, args, result) -> dict:
    config = {
        "problem": None if getattr(args, "problem_file", None) else getattr(args, "problem", None),
        "problem_file": getattr(args, "problem_file", None),
        "n": getattr(args, "n", None),
        "mode": getattr(args, "mode", None),
        "setting": getattr(args, "setting", None),
        "seed": getattr(args, "seed", 0),
    }
    return {
        "schema": SCHEMA,
        "command": command,
        "version": __version__,
        "config": config,
        "rng": _rng_record(config["seed"]),
        "result": result,
    }


def _json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _csv(rows: list[dict], fields) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("; ".join(v) if isinstance(v, list) else v) for k, v in row.items()})
    return buf.getvalue()


def _table(rows: list[dict], fields) -> str:
    cells = [[str(f) for f in fields]] + [[_fmt(r.get(f)) for f in fields] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(fields))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list):
        return "; ".join(map(str, value))
    return str(value)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _render(args, command: str, result: dict, rows: list[dict], fields, extra: str = ""):
    if args.format == "json":
        text = _json(_envelope(command, args, result))
    elif args.format == "csv":
        text = _csv(rows, fields)
    else:
        text = _table(rows, fields) + extra
    _emit(args, text)


# ---------------------------------------------------------------- commands


def cmd_list(args) -> int:
    rows = []
    for key, maker in BUILTINS.items():
        p = maker(DEFAULT_N[key])
        rows.append(
            {
                "problem": key,
                "n_range": BUILTIN_RANGES[key],
                "encoding": p.encoding,
                "example_n": DEFAULT_N[key],
                "settings": len(p.settings),
                "setting_bits": p.setting_width,
                "notes": list(p.notes),
            }
        )
    fields = ("problem", "n_range", "encoding", "example_n", "settings", "setting_bits", "notes")
    _render(args, "list", {"problems": rows}, rows, fields)
    return EXIT_OK


def _simulate_simon(args, problem, n) -> int:
    rng = np.random.default_rng(args.seed)
    settings = [parse_bits(args.setting, problem.setting_width)] if args.setting else [int(b) for b in problem.settings]
    rows = []
    for b in settings:
        res = run_simon(n, setting=b, problem=problem, rng=rng)
        rows.append(
            {
                "b": fmt_bits(b, problem.setting_width),
                "queries": res.queries_used,
                "samples": [fmt_bits(y, n) for y in res.samples],
                "recovered": fmt_bits(res.sampled_solution, n),
                "solution": fmt_bits(problem.solution(b), n),
                "success": res.per_setting_success[b],
            }
        )
    result = {
        "mode": "simon-controller",
        "settings": rows,
        "all_recovered": all(r["success"] == 1.0 for r in rows),
        "worst_queries": max(r["queries"] for r in rows),
    }
    _render(args, "simulate", result, rows, ("b", "queries", "recovered", "solution", "success"))
    if not result["all_recovered"]:
        raise ContractError("period not recovered for every setting")
    return EXIT_OK


def cmd_simulate(args) -> int:
    key, problem, algo = _resolve(args)
    n = _n(args, problem, key)
    if key == "simon":
        return _simulate_simon(args, problem, n)
    if algo is None:
        raise ConfigError("custom problems have no built-in algorithm to simulate")
    dumps = ""
    if args.setting:
        if args.setting == "random":
            rng = np.random.default_rng(args.seed)
            b = int(problem.settings[rng.integers(len(problem.settings))])
        else:
            b = parse_bits(args.setting, problem.setting_width)
        res = run_extended(problem, algo, b)
        mass = res.output_state.register_mass("A")
        outcomes = {fmt_bits(a, algo.layout.a_qubits): float(m) for a, m in enumerate(mass) if m > 1e-12}
        rows = [
            {"b": fmt_bits(b, problem.setting_width), "a": a, "probability": m, "solution": problem.solution_label(problem.solution(b))}
            for a, m in outcomes.items()
        ]
        result = {
            "mode": "extended",
            "setting": fmt_bits(b, problem.setting_width),
            "queries": res.queries_used,
            "outcomes": outcomes,
            "success": res.per_setting_success[b],
        }
        fields = ("b", "a", "probability", "solution")
        extra = f"queries: {res.queries_used}\nsuccess: {res.per_setting_success[b]:.12g}\n"
    else:
        res = run_relativized(problem, algo)
        rows = [
            {"b": fmt_bits(b, problem.setting_width), "success": v} for b, v in res.per_setting_success.items()
        ]
        result = {
            "mode": "relativized",
            "queries": res.queries_used,
            "per_setting_success": {r["b"]: r["success"] for r in rows},
            "canonical": res.canonical,
            "strict_fidelity": res.strict_fidelity,
            "workspace_clean": res.workspace_clean,
            "notes": res.notes,
        }
        fields = ("b", "success")
        extra = (
            f"queries: {res.queries_used}\ncanonical: {res.canonical}\n"
            f"strict fidelity: {res.strict_fidelity:.6g}\nworkspace clean: {res.workspace_clean}\n"
        )
    if algo.params is not None and hasattr(algo.params, "phase"):
        result["long_parameters"] = {"iterations": algo.params.iterations, "phase": algo.params.phase}
    if args.dump_states:
        dumps = dump_state(res.output_state)
        result["state_dump"] = dumps
        extra += "\n" + dumps
    _render(args, "simulate", result, rows, fields, extra)
    return EXIT_OK


def cmd_predict(args) -> int:
    _, problem, _ = _resolve(args)
    report = predict(problem, args.mode, args.near_even)
    doc = report.to_dict()
    rows = [
        {
            "b": s["b"],
            "cells": [",".join(i["cell"]) for i in s["instances"]] or ["NO_VALID_PAIR"],
            "depths": [i["reduced_depth"] for i in s["instances"]],
            "agree": s["agree"],
            "prediction": s["prediction"],
        }
        for s in doc["settings"]
    ]
    extra = f"global prediction: {_fmt(report.global_prediction)}\n"
    if report.exploratory:
        extra += "exploratory: rule applied outside the checked cases\n"
    _render(args, "predict", doc, rows, ("b", "cells", "depths", "agree", "prediction"), extra)
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.problem == "all" and not args.problem_file:
        targets = []
        for key, n in COMPARE_ALL:
            p = make_builtin(key, n)
            targets.append((p, build_for(key, n, p), n))
    else:
        key, problem, algo = _resolve(args)
        targets = [(problem, algo, _n(args, problem, key))]
    rows = [compare(p, algo, n, args.mode, args.seed, args.near_even).to_dict() for p, algo, n in targets]
    _render(args, "compare", {"rows": rows}, rows, CSV_FIELDS)
    return EXIT_OK


def cmd_verify(args) -> int:
    _, problem, algo = _resolve(args)
    if algo is None:
        raise ConfigError("custom problems have no built-in algorithm to verify")
    if algo.layout.b_qubits == 0:
        raise ConfigError("verification needs the full relativized circuit; not available for this problem")
    checks = verify_problem(problem, algo, args.mode, args.seed)
    rows = [c.to_dict() for c in checks]
    ok = all(c.passed for c in checks)
    _render(args, "verify", {"checks": rows, "passed": ok}, rows, ("name", "passed", "value", "detail"))
    if not ok:
        failed = [c.name for c in checks if not c.passed]
        raise ContractError(f"failed checks: {', '.join(failed)}")
    return EXIT_OK


def cmd_probe_simon(args) -> int:
    report = simon_advanced_knowledge_probe(args.n if args.n is not None else 2)
    doc = report.to_dict()
    summary = {k: v for k, v in doc.items() if k != "instances"}
    rows = [{"field": k, "value": v} for k, v in sorted(summary.items())]
    _render(args, "probe-simon", doc, rows, ("field", "value"))
    if not report.oracle_agreement or not report.repetition_rejected:
        raise ContractError("probe cross-checks failed")
    return EXIT_OK


COMMANDS = {
    "list": cmd_list,
    "simulate": cmd_simulate,
    "predict": cmd_predict,
    "compare": cmd_compare,
    "verify": cmd_verify,
    "probe-simon": cmd_probe_simon,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsow", description="Oracle algorithms, time-symmetrized instances and query counts.")
    parser.add_argument("--version", action="version", version=f"tsow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name not in ("list", "probe-simon"):
            p.add_argument("problem", nargs="?", help="builtin problem: grover, dj, bv, simon" + (", or all" if name == "compare" else ""))
            p.add_argument("--problem-file", help="JSON problem definition")
            p.add_argument("--mode", choices=MODES, default="coordinate")
            p.add_argument("--near-even", action="store_true", help="accept share sizes differing by one")
        if name != "list":
            p.add_argument("--n", type=int)
        if name == "simulate":
            p.add_argument("--setting", help="Bob's setting (binary or 0x hex), or 'random'")
            p.add_argument("--dump-states", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("table", "csv", "json"), default="table")
        p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except TsowError as err:
        doc = {"schema": SCHEMA, "error": err.to_dict()}
        sys.stdout.write(_json(doc))
        return exit_code(err)
    except ValueError as err:
        sys.stdout.write(_json({"schema": SCHEMA, "error": {"code": "CONFIG", "message": str(err)}}))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
