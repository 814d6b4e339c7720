"""Command-line entry point: ``mutagen <subcommand> PROGRAM ...``.

Exit codes: 0 success, 1 suite did not reach the target, 2 parse/config/usage
error, 65 no mutants, 66 input file not found.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .config import load_config
from .domain import InputDomain, TestCase
from .ga import ConfigError
from .interp import ArityMismatch, ExecBudget, Fault, FuelExhausted, Value, execute
from .lang import ParseError, Program, parse, pretty_print
from .mutation import (
    ALL_OPERATORS,
    DEFAULT_SCAN_CAP,
    DomainTooLarge,
    MutationOperator,
    build_kill_matrix,
    equivalent_mutant_scan,
    generate_mutants,
    mutants_to_json,
)
from .suite import NoMutants, optimize

EXIT_OK = 0
EXIT_TARGET_MISSED = 1
EXIT_USAGE = 2
EXIT_NO_MUTANTS = 65
EXIT_NO_INPUT = 66


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_NO_INPUT) from None


def load_program(path: str) -> Program:
    source = _read_text(path)
    try:
        return parse(source)
    except ParseError as exc:
        raise CliError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def read_suite(path: str, arity: int) -> list[TestCase]:
    """One test per CSV row, one integer gene per column, no header."""
    tests = []
    for rowno, row in enumerate(csv.reader(io.StringIO(_read_text(path))), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            genes = [int(cell) for cell in row]
        except ValueError:
            raise CliError(f"{path}:{rowno}: non-integer value in row {row!r}") from None
        if len(genes) != arity:
            raise CliError(f"{path}:{rowno}: expected {arity} values, got {len(genes)}")
        tests.append(TestCase(genes))
    return tests


def _operators(text: str | None):
    if text is None:
        return ALL_OPERATORS
    try:
        ops = MutationOperator.parse_set(text)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if not ops:
        raise CliError("--operators needs at least one of aor,ror,crp")
    return ops


def _domain(text: str | None, program: Program) -> InputDomain:
    if text is None:
        return InputDomain.uniform(program.arity)
    try:
        return InputDomain.parse(text, program.arity)
    except ValueError as exc:
        raise CliError(f"--domain: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _outcome_dict(outcome) -> dict:
    if isinstance(outcome, Value):
        return {"outcome": "value", "value": outcome.value}
    if isinstance(outcome, Fault):
        return {"outcome": "error", "kind": outcome.kind.value}
    return {"outcome": "timeout"}


def _outcome_text(outcome) -> str:
    if isinstance(outcome, Value):
        return f"Value({outcome.value})"
    if isinstance(outcome, Fault):
        return f"RuntimeError({outcome.kind.value})"
    assert isinstance(outcome, FuelExhausted)
    return "FuelExhausted"


# -- subcommands ------------------------------------------------------------


def cmd_parse(args) -> int:
    program = load_program(args.program)
    _emit(pretty_print(program) + "\n", args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    program = load_program(args.program)
    try:
        outcome = execute(program, args.inputs, ExecBudget(args.fuel))
    except (ArityMismatch, ValueError) as exc:
        raise CliError(str(exc)) from None
    if args.format == "json":
        _emit(json.dumps(_outcome_dict(outcome), sort_keys=True) + "\n", args.out)
    else:
        _emit(_outcome_text(outcome) + "\n", args.out)
    return EXIT_OK


def cmd_mutants(args) -> int:
    program = load_program(args.program)
    mutants = generate_mutants(program, _operators(args.operators))
    if args.format == "json":
        text = mutants_to_json(mutants) + "\n"
    else:
        text = "".join(
            f"{m.id}\t{m.operator.value}\t{m.site}\t{m.original} -> {m.mutated}\n"
            for m in mutants
        )
    _emit(text, args.out)
    return EXIT_OK


def _select_ids(mutants, ids_text: str | None):
    if ids_text is None:
        return mutants
    try:
        wanted = [int(x) for x in ids_text.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"--ids: expected comma-separated integers, got {ids_text!r}") from None
    by_id = {m.id: m for m in mutants}
    missing = [i for i in wanted if i not in by_id]
    if missing:
        raise CliError(f"--ids: no mutant with id {missing[0]}")
    return [by_id[i] for i in wanted]


def cmd_matrix(args) -> int:
    program = load_program(args.program)
    suite = read_suite(args.suite, program.arity)
    mutants = _select_ids(generate_mutants(program, _operators(args.operators)), args.ids)
    config = _config(args)
    matrix = build_kill_matrix(program, mutants, suite, ExecBudget(config.fuel),
                               workers=args.workers)
    _emit(matrix.to_csv(), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    program = load_program(args.program)
    mutants = generate_mutants(program, _operators(args.operators))
    config = _config(args)
    try:
        equivalent = equivalent_mutant_scan(
            program, mutants, _domain(args.domain, program),
            ExecBudget(config.fuel), args.cap,
        )
    except DomainTooLarge as exc:
        raise CliError(str(exc)) from None
    chosen = [m for m in mutants if m.id in equivalent]
    if args.format == "json":
        text = mutants_to_json(chosen) + "\n"
    else:
        text = "".join(f"{m.id}\t{m.site}\t{m.original} -> {m.mutated}\n" for m in chosen)
    _emit(text, args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    program = load_program(args.program)
    config = _config(args)
    try:
        report = optimize(program, _operators(args.operators),
                          _domain(args.domain, program), config, scan_cap=args.cap,
                          workers=args.workers)
    except NoMutants as exc:
        raise CliError(str(exc), EXIT_NO_MUTANTS) from None
    except DomainTooLarge as exc:
        raise CliError(str(exc)) from None
    if args.format == "json":
        text = report.to_json()
    elif args.format == "csv":
        text = report.history_csv()
    else:
        text = report.to_text()
    _emit(text, args.out)
    return EXIT_OK if report.reached_target else EXIT_TARGET_MISSED


# -- argument parsing -------------------------------------------------------

# flag -> GaConfig field
_GA_FLAGS = {
    "seed": ("seed", int),
    "population": ("population_size", int),
    "generations": ("max_generations", int),
    "crossover_rate": ("crossover_rate", float),
    "mutation_rate": ("gene_mutation_rate", float),
    "tournament": ("tournament_size", int),
    "elitism": ("elitism_count", int),
    "drop_threshold": ("drop_threshold", float),
    "target_score": ("target_score", float),
    "best_fit_threshold": ("best_fit_display_threshold", float),
    "fuel": ("fuel", int),
}


def _config(args):
    overrides = {}
    for dest, (field_name, _) in _GA_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[field_name] = value
    if getattr(args, "scan_equivalents", None) is not None:
        overrides["scan_equivalents"] = args.scan_equivalents
    config_path = getattr(args, "config", None)
    if config_path is not None and not Path(config_path).is_file():
        raise CliError(f"{config_path}: no such config file", EXIT_NO_INPUT)
    try:
        return load_config(config_path, overrides)
    except ConfigError as exc:
        raise CliError(f"config: {exc}") from None


def _add_ga_flags(p, only=None):
    for dest, (_, kind) in _GA_FLAGS.items():
        if only is not None and dest not in only:
            continue
        p.add_argument("--" + dest.replace("_", "-"), dest=dest, type=kind, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mutagen",
        description="Mutation-score-driven test suite evolution for .tl programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(name, help_text, formats=None):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("program", help="path to a .tl source file")
        p.add_argument("--out", help="write output here instead of stdout")
        if formats:
            p.add_argument("--format", choices=formats, default=formats[0])
        return p

    p = common("parse", "print the canonical form of a program")
    p.set_defaults(func=cmd_parse)

    p = common("run", "execute a program on inputs", ["text", "json"])
    p.add_argument("inputs", nargs="*", type=int)
    p.add_argument("--fuel", type=int, default=100_000)
    p.set_defaults(func=cmd_run)

    p = common("mutants", "list first-order mutants", ["json", "text"])
    p.add_argument("--operators", help="comma list of aor,ror,crp (default: all)")
    p.set_defaults(func=cmd_mutants)

    p = common("matrix", "kill matrix of a CSV suite as CSV")
    p.add_argument("suite", help="CSV file, one test per row, no header")
    p.add_argument("--operators")
    p.add_argument("--ids", help="comma list of mutant ids to include")
    p.add_argument("--config")
    _add_ga_flags(p, only={"fuel"})
    p.add_argument("--workers", type=int, default=1, help="evaluation processes")
    p.set_defaults(func=cmd_matrix)

    p = common("scan-equivalents", "mutants no input in the domain kills",
               ["json", "text"])
    p.add_argument("--operators")
    p.add_argument("--domain", help="lo..hi[,lo..hi...] (default 1..8 each)")
    p.add_argument("--cap", type=int, default=DEFAULT_SCAN_CAP)
    p.add_argument("--config")
    _add_ga_flags(p, only={"fuel"})
    p.set_defaults(func=cmd_scan)

    p = common("optimize", "evolve a suite with the genetic algorithm",
               ["json", "csv", "text"])
    p.add_argument("--config", help="JSON object or key = value lines")
    p.add_argument("--operators")
    p.add_argument("--domain", help="lo..hi[,lo..hi...] (default 1..8 each)")
    p.add_argument("--cap", type=int, default=DEFAULT_SCAN_CAP,
                   help="execution cap for the equivalence scan")
    p.add_argument("--scan-equivalents", dest="scan_equivalents",
                   action=argparse.BooleanOptionalAction, default=None,
                   help="force the equivalent-mutant scan on or off "
                        "(default: on when the domain fits the cap)")
    p.add_argument("--workers", type=int, default=1, help="evaluation processes")
    _add_ga_flags(p)
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"mutagen: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
