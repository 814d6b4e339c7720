"""First-order mutant generation, kill decisions and kill matrices."""

from __future__ import annotations

import csv
import enum
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .domain import InputDomain, TestCase
from .interp import ArityMismatch, ExecBudget, classify, execute
from .lang import (
    ARITHMETIC_OPS,
    INT64_MAX,
    INT64_MIN,
    RELATIONAL_OPS,
    Assign,
    BinaryOp,
    If,
    IntLiteral,
    Program,
    Return,
    SourceSpan,
    While,
    format_expression,
)

DEFAULT_SCAN_CAP = 1_000_000


class MutationOperator(str, enum.Enum):
    AOR = "AOR"  # arithmetic operator replacement
    ROR = "ROR"  # relational operator replacement
    CRP = "CRP"  # constant replacement: c+1, c-1, 0, 1

    @classmethod
    def parse_set(cls, text: str) -> frozenset[MutationOperator]:
        """Parse a comma list such as ``aor,ror``."""
        names = [t.strip().upper() for t in text.split(",") if t.strip()]
        try:
            return frozenset(cls(n) for n in names)
        except ValueError:
            raise ValueError(f"unknown mutation operator in {text!r}") from None


ALL_OPERATORS = frozenset(MutationOperator)
_OPERATOR_ORDER = {op: i for i, op in enumerate(MutationOperator)}


class DomainTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Mutant:
    id: int
    operator: MutationOperator
    site: SourceSpan
    original: str
    mutated: str
    program: Program

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "operator": self.operator.value,
            "line": self.site.line,
            "column": self.site.column,
            "original": self.original,
            "mutated": self.mutated,
        }


# A path is a sequence of (field name, index or None) steps from the Program.
def _walk(node, path=()):
    yield path, node
    if isinstance(node, BinaryOp):
        yield from _walk(node.lhs, path + (("lhs", None),))
        yield from _walk(node.rhs, path + (("rhs", None),))
    elif isinstance(node, (Assign, Return)):
        yield from _walk(node.expr, path + (("expr", None),))
    elif isinstance(node, (While, If)):
        yield from _walk(node.cond, path + (("cond", None),))
        blocks = ("body",) if isinstance(node, While) else ("then", "orelse")
        for name in blocks:
            for i, stmt in enumerate(getattr(node, name)):
                yield from _walk(stmt, path + ((name, i),))
    elif isinstance(node, Program):
        for i, stmt in enumerate(node.body):
            yield from _walk(stmt, path + (("body", i),))


def replace_at(node, path, new):
    """Return a copy of ``node`` with the sub-node at ``path`` swapped for ``new``."""
    if not path:
        return new
    (name, index), rest = path[0], path[1:]
    child = getattr(node, name)
    if index is None:
        return replace(node, **{name: replace_at(child, rest, new)})
    items = list(child)
    items[index] = replace_at(items[index], rest, new)
    return replace(node, **{name: tuple(items)})


def _crp_values(c: int) -> list[int]:
    out = []
    for v in (c + 1, c - 1, 0, 1):
        if v != c and v not in out and INT64_MIN <= v <= INT64_MAX:
            out.append(v)
    return out


def _replacements(node, operators):
    if isinstance(node, BinaryOp):
        if node.op in ARITHMETIC_OPS and MutationOperator.AOR in operators:
            for op in ARITHMETIC_OPS:
                if op != node.op:
                    yield MutationOperator.AOR, replace(node, op=op)
        if node.op in RELATIONAL_OPS and MutationOperator.ROR in operators:
            for op in RELATIONAL_OPS:
                if op != node.op:
                    yield MutationOperator.ROR, replace(node, op=op)
    elif isinstance(node, IntLiteral) and MutationOperator.CRP in operators:
        for v in _crp_values(node.value):
            yield MutationOperator.CRP, replace(node, value=v)


def generate_mutants(
    program: Program, operators: Iterable[MutationOperator] = ALL_OPERATORS
) -> list[Mutant]:
    """Every first-order mutant reachable by ``operators``.

    Ordered by source position, then operator, then replacement; ids are
    dense from 0 in that order.
    """
    operators = frozenset(MutationOperator(o) for o in operators)
    sites = []
    for order, (path, node) in enumerate(_walk(program)):
        if isinstance(node, (BinaryOp, IntLiteral)):
            offset = node.span.offset if node.span is not None else 0
            sites.append((offset, order, path, node))
    sites.sort(key=lambda s: (s[0], s[1]))

    mutants = []
    for _, _, path, node in sites:
        candidates = sorted(
            enumerate(_replacements(node, operators)),
            key=lambda c: (_OPERATOR_ORDER[c[1][0]], c[0]),
        )
        for _, (op, new) in candidates:
            mutants.append(
                Mutant(
                    id=len(mutants),
                    operator=op,
                    site=node.span or SourceSpan(0, 0, 0),
                    original=format_expression(node),
                    mutated=format_expression(new),
                    program=replace_at(program, path, new),
                )
            )
    return mutants


def mutants_to_json(mutants: Sequence[Mutant]) -> str:
    return json.dumps([m.to_dict() for m in mutants], indent=2)


def _genes(test) -> tuple[int, ...]:
    return test.genes if isinstance(test, TestCase) else tuple(test)


def _check_arity(program: Program, genes) -> None:
    if len(genes) != program.arity:
        raise ArityMismatch(
            f"test {tuple(genes)} has {len(genes)} inputs, "
            f"{program.name} takes {program.arity}"
        )


def kills(
    original: Program, mutant: Mutant, test, budget: ExecBudget | None = None
) -> bool:
    """True iff ``test`` gives the mutant a different outcome class than the original."""
    genes = _genes(test)
    _check_arity(original, genes)
    budget = budget or ExecBudget()
    return classify(execute(original, genes, budget)) != classify(
        execute(mutant.program, genes, budget)
    )


def kill_row(
    original: Program, programs: Sequence[Program], genes, budget: ExecBudget
) -> np.ndarray:
    """Kill flags of one test against each mutant program."""
    expected = classify(execute(original, genes, budget))
    return np.fromiter(
        (classify(execute(p, genes, budget)) != expected for p in programs),
        dtype=bool,
        count=len(programs),
    )


def _kill_row_task(args):
    return kill_row(*args)


@dataclass(frozen=True)
class KillMatrix:
    """Boolean test x mutant table; ``killed[t, m]`` is True when test t kills mutant m.

    ``tests`` is None for a matrix read back from CSV, which carries no test inputs.
    """

    tests: tuple[TestCase, ...] | None
    mutant_ids: tuple[int, ...]
    killed: np.ndarray

    def kill_set(self, row: int) -> frozenset[int]:
        return frozenset(self.mutant_ids[j] for j in np.flatnonzero(self.killed[row]))

    def killed_ids(self) -> frozenset[int]:
        """Mutants killed by at least one test."""
        if self.killed.shape[0] == 0:
            return frozenset()
        return frozenset(
            self.mutant_ids[j] for j in np.flatnonzero(self.killed.any(axis=0))
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.mutant_ids)
        for row in self.killed:
            writer.writerow(int(x) for x in row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> KillMatrix:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty kill matrix CSV")
        ids = tuple(int(x) for x in rows[0])
        cells = [[int(x) for x in r] for r in rows[1:]]
        for i, r in enumerate(cells, start=2):
            if len(r) != len(ids) or any(x not in (0, 1) for x in r):
                raise ValueError(f"row {i}: expected {len(ids)} cells of 0/1")
        killed = np.array(cells, dtype=bool).reshape(len(cells), len(ids))
        return cls(None, ids, killed)

    def __eq__(self, other):
        if not isinstance(other, KillMatrix):
            return NotImplemented
        return (
            self.tests == other.tests
            and self.mutant_ids == other.mutant_ids
            and np.array_equal(self.killed, other.killed)
        )

    __hash__ = None


def build_kill_matrix(
    original: Program,
    mutants: Sequence[Mutant],
    suite: Sequence,
    budget: ExecBudget | None = None,
    workers: int = 1,
) -> KillMatrix:
    """Evaluate every (test, mutant) cell.

    The original program runs once per test. With ``workers > 1`` rows are
    computed in a process pool; the result is identical to the sequential one.
    """
    budget = budget or ExecBudget()
    tests = tuple(t if isinstance(t, TestCase) else TestCase(t) for t in suite)
    for t in tests:
        _check_arity(original, t.genes)
    programs = [m.program for m in mutants]
    tasks = [(original, programs, t.genes, budget) for t in tests]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (4 * workers))
            rows = list(pool.map(_kill_row_task, tasks, chunksize=chunk))
    else:
        rows = [kill_row(*task) for task in tasks]
    killed = (
        np.vstack(rows) if rows else np.zeros((0, len(mutants)), dtype=bool)
    ).reshape(len(tests), len(mutants))
    return KillMatrix(tests, tuple(m.id for m in mutants), killed)


def equivalent_mutant_scan(
    original: Program,
    mutants: Sequence[Mutant],
    domain: InputDomain,
    budget: ExecBudget | None = None,
    cap: int = DEFAULT_SCAN_CAP,
) -> frozenset[int]:
    """Ids of the mutants that no input in ``domain`` kills.

    Exact relative to the bounded domain. Raises :class:`DomainTooLarge` if
    the worst-case number of executions exceeds ``cap``.
    """
    if domain.arity != original.arity:
        raise ArityMismatch(
            f"domain has {domain.arity} intervals, {original.name} takes {original.arity}"
        )
    executions = domain.size * (len(mutants) + 1)
    if executions > cap:
        raise DomainTooLarge(
            f"scan needs up to {executions} executions, cap is {cap}"
        )
    budget = budget or ExecBudget()
    alive = {m.id: m.program for m in mutants}
    for test in domain.enumerate():
        if not alive:
            break
        expected = classify(execute(original, test.genes, budget))
        for mid in [
            mid for mid, p in alive.items()
            if classify(execute(p, test.genes, budget)) != expected
        ]:
            del alive[mid]
    return frozenset(alive)
