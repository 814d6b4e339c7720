"""Deterministic tree-walking evaluator with a step budget.

One step is one statement evaluation; every check of a ``while`` condition
also costs one step. Integers are signed 64-bit and overflow is an error,
not a wrap-around. Division truncates toward zero and ``%`` takes the sign
of the dividend.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Union

from .lang import (
    INT64_MAX,
    INT64_MIN,
    Assign,
    If,
    IntLiteral,
    Program,
    Return,
    Var,
    While,
)

DEFAULT_FUEL = 100_000


class FaultKind(str, enum.Enum):
    UNDEFINED_VARIABLE = "UndefinedVariable"
    DIVISION_BY_ZERO = "DivisionByZero"
    OVERFLOW = "Overflow"
    NO_RETURN = "NoReturn"


@dataclass(frozen=True)
class Value:
    value: int


@dataclass(frozen=True)
class Fault:
    """A runtime error inside the toy program (a first-class outcome)."""

    kind: FaultKind


@dataclass(frozen=True)
class FuelExhausted:
    pass


Outcome = Union[Value, Fault, FuelExhausted]


@dataclass(frozen=True)
class ExecBudget:
    fuel: int = DEFAULT_FUEL

    def __post_init__(self):
        if self.fuel < 1:
            raise ValueError(f"fuel must be >= 1, got {self.fuel}")


class ArityMismatch(ValueError):
    """Number of inputs does not match the program's parameter count."""


def classify(outcome: Outcome) -> tuple:
    """Map an outcome to the class compared when deciding kills."""
    if isinstance(outcome, Value):
        return ("value", outcome.value)
    if isinstance(outcome, Fault):
        return ("error", outcome.kind.value)
    return ("timeout",)


class _Stop(Exception):
    def __init__(self, outcome: Outcome):
        self.outcome = outcome


def _checked(v: int) -> int:
    if v < INT64_MIN or v > INT64_MAX:
        raise _Stop(Fault(FaultKind.OVERFLOW))
    return v


def _apply(op: str, a: int, b: int) -> int:
    if op == "+":
        return _checked(a + b)
    if op == "-":
        return _checked(a - b)
    if op == "*":
        return _checked(a * b)
    if op in ("/", "%"):
        if b == 0:
            raise _Stop(Fault(FaultKind.DIVISION_BY_ZERO))
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        q = _checked(q)
        return q if op == "/" else a - b * q
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    raise ValueError(f"unknown operator {op!r}")  # pragma: no cover


class _Machine:
    def __init__(self, fuel: int):
        self.fuel = fuel
        self.steps = 0
        self.env: dict[str, int] = {}

    def tick(self):
        if self.steps >= self.fuel:
            raise _Stop(FuelExhausted())
        self.steps += 1

    def eval(self, expr) -> int:
        if isinstance(expr, IntLiteral):
            return expr.value
        if isinstance(expr, Var):
            try:
                return self.env[expr.name]
            except KeyError:
                raise _Stop(Fault(FaultKind.UNDEFINED_VARIABLE)) from None
        return _apply(expr.op, self.eval(expr.lhs), self.eval(expr.rhs))

    def run(self, stmts):
        for stmt in stmts:
            if isinstance(stmt, While):
                while True:
                    self.tick()
                    if not self.eval(stmt.cond):
                        break
                    self.run(stmt.body)
                continue
            self.tick()
            if isinstance(stmt, Assign):
                self.env[stmt.target] = self.eval(stmt.expr)
            elif isinstance(stmt, If):
                self.run(stmt.then if self.eval(stmt.cond) else stmt.orelse)
            elif isinstance(stmt, Return):
                raise _Stop(Value(self.eval(stmt.expr)))


def execute(
    program: Program, inputs: Sequence[int], budget: ExecBudget | None = None
) -> Outcome:
    """Run ``program`` on ``inputs`` and return its :data:`Outcome`.

    Raises :class:`ArityMismatch` if the input count differs from the
    parameter count; every other failure is reported as an outcome.
    """
    if len(inputs) != len(program.params):
        raise ArityMismatch(
            f"{program.name} takes {len(program.params)} inputs, got {len(inputs)}"
        )
    machine = _Machine((budget or ExecBudget()).fuel)
    for name, value in zip(program.params, inputs):
        value = int(value)
        if not INT64_MIN <= value <= INT64_MAX:
            raise ValueError(f"input {name}={value} is outside the 64-bit range")
        machine.env[name] = value
    try:
        machine.run(program.body)
    except _Stop as stop:
        return stop.outcome
    return Fault(FaultKind.NO_RETURN)
