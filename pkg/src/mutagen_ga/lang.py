"""AST, parser and pretty-printer for the toy imperative language.

A program is a single integer function::

    fn power(a, b) {
      if (a == 1) {
        return 1
      }
      P = 1
      while (i <= b) {
        P = P * a
        i++
      }
      return P
    }

``i++`` and ``i--`` are desugared to ``i = i + 1`` / ``i = i - 1`` and
``let x = e`` is plain assignment. ``#`` starts a line comment. Statements may
be separated by newlines or ``;``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

ARITHMETIC_OPS = ("+", "-", "*", "/", "%")
RELATIONAL_OPS = ("<", "<=", ">", ">=", "==", "!=")
OPERATORS = ARITHMETIC_OPS + RELATIONAL_OPS

_PRECEDENCE = {op: 1 for op in RELATIONAL_OPS}
_PRECEDENCE.update({"+": 2, "-": 2, "*": 3, "/": 3, "%": 3})
_ATOM_PRECEDENCE = 10

KEYWORDS = frozenset({"fn", "let", "while", "if", "else", "return"})


@dataclass(frozen=True)
class SourceSpan:
    """Location of a node in the original text (1-based line and column)."""

    line: int
    column: int
    length: int
    offset: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


# Spans never take part in structural equality.
def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IntLiteral:
    value: int
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class Var:
    name: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class BinaryOp:
    op: str
    lhs: Expression
    rhs: Expression
    span: SourceSpan | None = _span_field()


Expression = Union[IntLiteral, Var, BinaryOp]


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expression
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class While:
    cond: Expression
    body: tuple[Statement, ...]
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class If:
    cond: Expression
    then: tuple[Statement, ...]
    orelse: tuple[Statement, ...] = ()
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class Return:
    expr: Expression
    span: SourceSpan | None = _span_field()


Statement = Union[Assign, While, If, Return]


@dataclass(frozen=True)
class Program:
    name: str
    params: tuple[str, ...]
    body: tuple[Statement, ...]
    span: SourceSpan | None = _span_field()

    @property
    def arity(self) -> int:
        return len(self.params)


class ParseError(Exception):
    """Malformed source text. Carries a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+\+|--|<=|>=|==|!=|[-+*/%<>=(){},;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    column: int
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        if kind in ("ws", "comment"):
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rindex("\n") + 1
        else:
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, pos - line_start + 1, pos))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos))
    return tokens


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def _describe(self, tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def _error(self, expected: str) -> ParseError:
        tok = self.tok
        return ParseError(
            f"expected {expected}, found {self._describe(tok)}", tok.line, tok.column
        )

    def _check(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def _expect(self, text: str) -> Token:
        if not self._check(text):
            raise self._error(repr(text))
        return self._advance()

    def _expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self._error("identifier")
        return self._advance()

    def _span(self, start: Token, end_offset: int) -> SourceSpan:
        return SourceSpan(start.line, start.column, end_offset - start.offset, start.offset)

    def _prev_end(self) -> int:
        return self.tokens[self.pos - 1].end

    # program := 'fn' IDENT '(' [IDENT {',' IDENT}] ')' block
    def program(self) -> Program:
        start = self._expect("fn")
        name = self._expect_ident().text
        self._expect("(")
        params: list[str] = []
        if not self._check(")"):
            while True:
                ptok = self._expect_ident()
                if ptok.text in params:
                    raise ParseError(
                        f"duplicate parameter {ptok.text!r}", ptok.line, ptok.column
                    )
                params.append(ptok.text)
                if not self._check(","):
                    break
                self._advance()
        self._expect(")")
        body = self.block()
        if self.tok.kind != "eof":
            raise self._error("end of input")
        return Program(name, tuple(params), body, self._span(start, self._prev_end()))

    def block(self) -> tuple[Statement, ...]:
        self._expect("{")
        stmts = []
        while not self._check("}"):
            if self.tok.kind == "eof":
                raise self._error("'}'")
            if self._check(";"):
                self._advance()
                continue
            stmts.append(self.statement())
        self._advance()
        return tuple(stmts)

    def statement(self) -> Statement:
        tok = self.tok
        if self._check("return"):
            self._advance()
            expr = self.expression()
            return Return(expr, self._span(tok, self._prev_end()))
        if self._check("while"):
            self._advance()
            cond = self.condition()
            body = self.block()
            return While(cond, body, self._span(tok, self._prev_end()))
        if self._check("if"):
            return self.if_statement()
        if self._check("let"):
            self._advance()
            return self.assignment(self._expect_ident(), tok)
        if tok.kind == "ident":
            return self.assignment(self._advance(), tok)
        raise self._error("statement")

    def if_statement(self) -> If:
        start = self._expect("if")
        cond = self.condition()
        then = self.block()
        orelse: tuple[Statement, ...] = ()
        if self._check("else"):
            self._advance()
            orelse = (self.if_statement(),) if self._check("if") else self.block()
        return If(cond, then, orelse, self._span(start, self._prev_end()))

    def condition(self) -> Expression:
        tok = self.tok
        cond = self.expression()
        if not (isinstance(cond, BinaryOp) and cond.op in RELATIONAL_OPS):
            raise ParseError("expected a relational condition", tok.line, tok.column)
        return cond

    def assignment(self, target: Token, start: Token) -> Assign:
        if self._check("++") or self._check("--"):
            optok = self._advance()
            span = self._span(optok, optok.end)
            op = "+" if optok.text == "++" else "-"
            expr = BinaryOp(op, Var(target.text, self._span(target, target.end)),
                            IntLiteral(1, span), span)
            return Assign(target.text, expr, self._span(start, optok.end))
        self._expect("=")
        expr = self.expression()
        return Assign(target.text, expr, self._span(start, self._prev_end()))

    def expression(self) -> Expression:
        return self._binary(1)

    def _binary(self, level: int) -> Expression:
        if level > 3:
            return self.primary()
        start = self.tok
        lhs = self._binary(level + 1)
        while self.tok.kind == "op" and _PRECEDENCE.get(self.tok.text) == level:
            op = self._advance().text
            rhs = self._binary(level + 1)
            lhs = BinaryOp(op, lhs, rhs, self._span(start, self._prev_end()))
        return lhs

    def primary(self) -> Expression:
        tok = self.tok
        if tok.kind == "int":
            self._advance()
            return IntLiteral(self._int_value(tok, int(tok.text)), self._span(tok, tok.end))
        if self._check("-") and self.tokens[self.pos + 1].kind == "int":
            self._advance()
            num = self._advance()
            return IntLiteral(self._int_value(tok, -int(num.text)), self._span(tok, num.end))
        if tok.kind == "ident":
            self._advance()
            return Var(tok.text, self._span(tok, tok.end))
        if self._check("("):
            self._advance()
            expr = self.expression()
            self._expect(")")
            return expr
        raise self._error("expression")

    def _int_value(self, tok: Token, value: int) -> int:
        if not INT64_MIN <= value <= INT64_MAX:
            raise ParseError("integer literal out of 64-bit range", tok.line, tok.column)
        return value


def parse(source: str) -> Program:
    """Parse source text into a :class:`Program`.

    Raises :class:`ParseError` with the line and column of the first
    offending token.
    """
    return _Parser(source).program()


# --------------------------------------------------------------------------
# Pretty-printer
# --------------------------------------------------------------------------


def _precedence(expr: Expression) -> int:
    if isinstance(expr, BinaryOp):
        return _PRECEDENCE[expr.op]
    return _ATOM_PRECEDENCE


def format_expression(expr: Expression) -> str:
    """Render an expression with the minimum parentheses needed to re-parse it."""
    if isinstance(expr, IntLiteral):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    prec = _PRECEDENCE[expr.op]
    lhs = format_expression(expr.lhs)
    rhs = format_expression(expr.rhs)
    if _precedence(expr.lhs) < prec:
        lhs = f"({lhs})"
    # operators are left-associative
    if _precedence(expr.rhs) <= prec:
        rhs = f"({rhs})"
    return f"{lhs} {expr.op} {rhs}"


def _format_block(stmts, depth: int) -> Iterator[str]:
    for stmt in stmts:
        yield from _format_statement(stmt, depth)


def _format_statement(stmt: Statement, depth: int) -> Iterator[str]:
    pad = "  " * depth
    if isinstance(stmt, Assign):
        yield f"{pad}{stmt.target} = {format_expression(stmt.expr)}"
    elif isinstance(stmt, Return):
        yield f"{pad}return {format_expression(stmt.expr)}"
    elif isinstance(stmt, While):
        yield f"{pad}while ({format_expression(stmt.cond)}) {{"
        yield from _format_block(stmt.body, depth + 1)
        yield f"{pad}}}"
    elif isinstance(stmt, If):
        yield f"{pad}if ({format_expression(stmt.cond)}) {{"
        yield from _format_block(stmt.then, depth + 1)
        if stmt.orelse:
            yield f"{pad}}} else {{"
            yield from _format_block(stmt.orelse, depth + 1)
        yield f"{pad}}}"
    else:  # pragma: no cover
        raise TypeError(f"not a statement: {stmt!r}")


def pretty_print(program: Program) -> str:
    """Canonical rendering; ``parse(pretty_print(p)) == p``."""
    lines = [f"fn {program.name}({', '.join(program.params)}) {{"]
    lines.extend(_format_block(program.body, 1))
    lines.append("}")
    return "\n".join(lines)


def iter_nodes(node) -> Iterator:
    """Pre-order walk over every AST node below (and including) ``node``."""
    yield node
    if isinstance(node, BinaryOp):
        yield from iter_nodes(node.lhs)
        yield from iter_nodes(node.rhs)
    elif isinstance(node, (Assign, Return)):
        yield from iter_nodes(node.expr)
    elif isinstance(node, While):
        yield from iter_nodes(node.cond)
        for s in node.body:
            yield from iter_nodes(s)
    elif isinstance(node, If):
        yield from iter_nodes(node.cond)
        for s in node.then + node.orelse:
            yield from iter_nodes(s)
    elif isinstance(node, Program):
        for s in node.body:
            yield from iter_nodes(s)
