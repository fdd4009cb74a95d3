"""A small imperative language: parser, AST, concrete interpreter.

Statements are skip, assignment, sequencing, if-then-else and while;
arithmetic is +, -, * over unbounded integers and tests are = and <.
Concrete syntax::

    # optional declaration; otherwise variables are declared in order
    # of first appearance
    vars x0, x1;
    while 0 < x0 do {
      x1 := x1 + 2;
      x0 := x0 - x1
    }

Every AST node carries a stable pre-order index (`pid`) used by the
analyzer as the program-point id, plus the source line/column.  The
interpreter is big-step with a fuel bound: each statement execution and
loop iteration costs one unit, and exhaustion reports divergence, so
every infinite run is caught by any finite fuel.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterator

from .parse import ParseError


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    pid: int
    line: int
    col: int


@dataclass(frozen=True)
class Aexp(Node):
    pass


@dataclass(frozen=True)
class IntLit(Aexp):
    value: int


@dataclass(frozen=True)
class Var(Aexp):
    name: str


@dataclass(frozen=True)
class BinOp(Aexp):
    op: str  # '+', '-', '*'
    left: Aexp
    right: Aexp


@dataclass(frozen=True)
class Bexp(Node):
    pass


@dataclass(frozen=True)
class BoolLit(Bexp):
    value: bool


@dataclass(frozen=True)
class Compare(Bexp):
    op: str  # '=', '<'
    left: Aexp
    right: Aexp


@dataclass(frozen=True)
class Stmt(Node):
    pass


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    name: str
    expr: Aexp


@dataclass(frozen=True)
class Seq(Stmt):
    first: Stmt
    second: Stmt


@dataclass(frozen=True)
class If(Stmt):
    cond: Bexp
    then: Stmt
    orelse: Stmt


@dataclass(frozen=True)
class While(Stmt):
    cond: Bexp
    body: Stmt


@dataclass(frozen=True)
class Program:
    variables: tuple[str, ...]
    body: Stmt

    def statements(self) -> Iterator[Stmt]:
        yield from _walk_statements(self.body)


def _walk_statements(s: Stmt) -> Iterator[Stmt]:
    yield s
    if isinstance(s, Seq):
        yield from _walk_statements(s.first)
        yield from _walk_statements(s.second)
    elif isinstance(s, If):
        yield from _walk_statements(s.then)
        yield from _walk_statements(s.orelse)
    elif isinstance(s, While):
        yield from _walk_statements(s.body)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_KEYWORDS = {"skip", "if", "then", "else", "while", "do", "true", "false", "vars"}


def _lex(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(("kw" if word in _KEYWORDS else "name", word, line, col))
            col += j - i
            i = j
            continue
        if text.startswith(":=", i):
            tokens.append(("op", ":=", line, col))
            i += 2
            col += 2
            continue
        if ch in "+-*<=;{}(),":
            tokens.append(("op", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.pid = 0

    def _next_pid(self) -> int:
        # placeholder; real pre-order pids are assigned after parsing
        self.pid += 1
        return self.pid - 1

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expect: str | None = None):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input" + (f", expected {expect!r}" if expect else ""))
        if expect is not None and tok[1] != expect:
            raise ParseError(f"expected {expect!r}, got {tok[1]!r}", tok[2], tok[3])
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[1] == text

    # expressions -----------------------------------------------------------

    def atom(self) -> Aexp:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected an expression")
        kind, text, line, col = tok
        if kind == "int":
            self.take()
            return IntLit(self._next_pid(), line, col, int(text))
        if text == "-":
            self.take()
            inner = self.atom()
            zero = IntLit(self._next_pid(), line, col, 0)
            return BinOp(self._next_pid(), line, col, "-", zero, inner)
        if text == "(":
            self.take()
            e = self.aexp()
            self.take(")")
            return e
        if kind == "name":
            self.take()
            return Var(self._next_pid(), line, col, text)
        raise ParseError(f"expected an expression, got {text!r}", line, col)

    def mul(self) -> Aexp:
        e = self.atom()
        while self.at("*"):
            _, _, line, col = self.take()
            rhs = self.atom()
            e = BinOp(self._next_pid(), line, col, "*", e, rhs)
        return e

    def aexp(self) -> Aexp:
        e = self.mul()
        while self.at("+") or self.at("-"):
            _, op, line, col = self.take()
            rhs = self.mul()
            e = BinOp(self._next_pid(), line, col, op, e, rhs)
        return e

    def bexp(self) -> Bexp:
        tok = self.peek()
        if tok is not None and tok[1] in ("true", "false"):
            _, text, line, col = self.take()
            return BoolLit(self._next_pid(), line, col, text == "true")
        left = self.aexp()
        tok = self.peek()
        if tok is None or tok[1] not in ("=", "<"):
            raise ParseError(
                "expected '=' or '<'",
                tok[2] if tok else None,
                tok[3] if tok else None,
            )
        _, op, line, col = self.take()
        right = self.aexp()
        return Compare(self._next_pid(), line, col, op, left, right)

    # statements --------------------------------------------------------------

    def block_or_stmt(self) -> Stmt:
        if self.at("{"):
            self.take()
            s = self.sequence(until="}")
            self.take("}")
            return s
        return self.statement()

    def statement(self) -> Stmt:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected a statement")
        kind, text, line, col = tok
        if text == "skip":
            self.take()
            return Skip(self._next_pid(), line, col)
        if text == "if":
            self.take()
            cond = self.bexp()
            self.take("then")
            then = self.block_or_stmt()
            self.take("else")
            orelse = self.block_or_stmt()
            return If(self._next_pid(), line, col, cond, then, orelse)
        if text == "while":
            self.take()
            cond = self.bexp()
            self.take("do")
            body = self.block_or_stmt()
            return While(self._next_pid(), line, col, cond, body)
        if kind == "name":
            self.take()
            _, _, aline, acol = self.take(":=")
            expr = self.aexp()
            return Assign(self._next_pid(), line, col, text, expr)
        raise ParseError(f"expected a statement, got {text!r}", line, col)

    def sequence(self, until: str | None = None) -> Stmt:
        stmts = [self.statement_entry(until)]
        while self.at(";"):
            self.take()
            if until is not None and self.at(until):
                break  # trailing separator
            if self.peek() is None and until is None:
                break
            stmts.append(self.statement_entry(until))
        out = stmts[-1]
        for s in reversed(stmts[:-1]):
            out = Seq(self._next_pid(), s.line, s.col, s, out)
        return out

    def statement_entry(self, until):
        return self.block_or_stmt()


def _renumber(program_body: Stmt) -> Stmt:
    """Assign stable pre-order pids over the whole tree."""
    counter = [0]

    def visit(node):
        pid = counter[0]
        counter[0] += 1
        if isinstance(node, Seq):
            first = visit(node.first)
            second = visit(node.second)
            return replace(node, pid=pid, first=first, second=second)
        if isinstance(node, If):
            cond = visit(node.cond)
            then = visit(node.then)
            orelse = visit(node.orelse)
            return replace(node, pid=pid, cond=cond, then=then, orelse=orelse)
        if isinstance(node, While):
            cond = visit(node.cond)
            body = visit(node.body)
            return replace(node, pid=pid, cond=cond, body=body)
        if isinstance(node, BinOp):
            left = visit(node.left)
            right = visit(node.right)
            return replace(node, pid=pid, left=left, right=right)
        if isinstance(node, Compare):
            left = visit(node.left)
            right = visit(node.right)
            return replace(node, pid=pid, left=left, right=right)
        if isinstance(node, Assign):
            expr = visit(node.expr)
            return replace(node, pid=pid, expr=expr)
        return replace(node, pid=pid)

    return visit(program_body)


def _collect_vars(s, acc: list[str]) -> None:
    if isinstance(s, Var):
        if s.name not in acc:
            acc.append(s.name)
    elif isinstance(s, (BinOp, Compare)):
        _collect_vars(s.left, acc)
        _collect_vars(s.right, acc)
    elif isinstance(s, Assign):
        if s.name not in acc:
            acc.append(s.name)
        _collect_vars(s.expr, acc)
    elif isinstance(s, Seq):
        _collect_vars(s.first, acc)
        _collect_vars(s.second, acc)
    elif isinstance(s, If):
        _collect_vars(s.cond, acc)
        _collect_vars(s.then, acc)
        _collect_vars(s.orelse, acc)
    elif isinstance(s, While):
        _collect_vars(s.cond, acc)
        _collect_vars(s.body, acc)


def parse_program(text: str) -> Program:
    tokens = _lex(text)
    parser = _Parser(tokens)
    declared: list[str] | None = None
    if parser.at("vars"):
        parser.take()
        declared = []
        while True:
            tok = parser.take()
            if tok[0] != "name":
                raise ParseError(f"expected a variable name, got {tok[1]!r}", tok[2], tok[3])
            if tok[1] in declared:
                raise ParseError(f"duplicate variable {tok[1]!r}", tok[2], tok[3])
            declared.append(tok[1])
            if parser.at(","):
                parser.take()
                continue
            parser.take(";")
            break
    body = parser.sequence()
    tok = parser.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok[1]!r}", tok[2], tok[3])
    body = _renumber(body)
    used: list[str] = []
    _collect_vars(body, used)
    if declared is None:
        declared = used
    else:
        for name in used:
            if name not in declared:
                raise ParseError(f"undeclared variable {name!r}")
    return Program(tuple(declared), body)


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

def format_aexp(e: Aexp, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    assert isinstance(e, BinOp)
    prec = 2 if e.op == "*" else 1
    left = format_aexp(e.left, prec)
    right = format_aexp(e.right, prec + 1)
    text = f"{left} {e.op} {right}"
    return f"({text})" if prec < parent_prec else text


def format_bexp(b: Bexp) -> str:
    if isinstance(b, BoolLit):
        return "true" if b.value else "false"
    assert isinstance(b, Compare)
    return f"{format_aexp(b.left)} {b.op} {format_aexp(b.right)}"


def format_stmt(s: Stmt, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(s, Skip):
        return f"{pad}skip"
    if isinstance(s, Assign):
        return f"{pad}{s.name} := {format_aexp(s.expr)}"
    if isinstance(s, Seq):
        return f"{format_stmt(s.first, indent)};\n{format_stmt(s.second, indent)}"
    if isinstance(s, If):
        return (
            f"{pad}if {format_bexp(s.cond)} then {{\n"
            f"{format_stmt(s.then, indent + 1)}\n{pad}}} else {{\n"
            f"{format_stmt(s.orelse, indent + 1)}\n{pad}}}"
        )
    assert isinstance(s, While)
    return (
        f"{pad}while {format_bexp(s.cond)} do {{\n"
        f"{format_stmt(s.body, indent + 1)}\n{pad}}}"
    )


def format_program(p: Program) -> str:
    header = "vars " + ", ".join(p.variables) + ";\n" if p.variables else ""
    return header + format_stmt(p.body) + "\n"


# ---------------------------------------------------------------------------
# Concrete interpreter
# ---------------------------------------------------------------------------

class Divergence:
    """Sentinel: the computation did not finish within the given fuel."""

    def __repr__(self):
        return "DIVERGENCE"


DIVERGENCE = Divergence()

ConcreteStore = dict[str, int]


class _OutOfFuel(Exception):
    pass


def eval_aexp(e: Aexp, store: ConcreteStore) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Var):
        return store[e.name]
    assert isinstance(e, BinOp)
    l = eval_aexp(e.left, store)
    r = eval_aexp(e.right, store)
    if e.op == "+":
        return l + r
    if e.op == "-":
        return l - r
    return l * r


def eval_bexp(b: Bexp, store: ConcreteStore) -> bool:
    if isinstance(b, BoolLit):
        return b.value
    assert isinstance(b, Compare)
    l = eval_aexp(b.left, store)
    r = eval_aexp(b.right, store)
    return l == r if b.op == "=" else l < r


def exec_program(
    program: Program,
    store: ConcreteStore,
    fuel: int,
    on_loop_entry: Callable[[int, ConcreteStore], None] | None = None,
):
    """Big-step execution; returns the final store or DIVERGENCE.

    `on_loop_entry(pid, store)` is called each time a while guard is
    about to be evaluated, which lets tests trace loop-head stores.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive at entry")
    if set(store) != set(program.variables):
        raise ValueError("store domain must equal the declared variables")
    budget = [fuel]

    def spend():
        budget[0] -= 1
        if budget[0] < 0:
            raise _OutOfFuel()

    def run(s: Stmt, sto: ConcreteStore) -> ConcreteStore:
        spend()
        if isinstance(s, Skip):
            return sto
        if isinstance(s, Assign):
            value = eval_aexp(s.expr, sto)
            out = dict(sto)
            out[s.name] = value
            return out
        if isinstance(s, Seq):
            return run(s.second, run(s.first, sto))
        if isinstance(s, If):
            branch = s.then if eval_bexp(s.cond, sto) else s.orelse
            return run(branch, sto)
        assert isinstance(s, While)
        while True:
            if on_loop_entry is not None:
                on_loop_entry(s.pid, sto)
            if not eval_bexp(s.cond, sto):
                return sto
            sto = run(s.body, sto)
            spend()  # one unit per completed iteration

    try:
        return run(program.body, dict(store))
    except _OutOfFuel:
        return DIVERGENCE
