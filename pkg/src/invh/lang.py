"""MiniWhile: a small imperative integer language with labeled locations.

The language covers exactly what the harness needs to exercise invariant
checking: integer variables of a configurable bit width, assignment,
nondeterministic assignment, if/while control flow, assert/assume, and
`@name:` labels marking control locations. Arithmetic wraps modulo 2**W;
values are the residues 0 .. 2**W-1 and comparisons are unsigned.

Source files use the `.mw` extension, UTF-8 text, `//` line comments.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Union

DEFAULT_WIDTH = 8
MIN_WIDTH = 2
MAX_WIDTH = 16


class MiniWhileError(Exception):
    """Base class for language-level errors."""


class ParseError(MiniWhileError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class ScopeError(MiniWhileError):
    """Duplicate label, unknown label, or undeclared variable."""


def check_width(width: int) -> int:
    if not (MIN_WIDTH <= width <= MAX_WIDTH):
        raise ValueError(f"width must be in [{MIN_WIDTH}, {MAX_WIDTH}], got {width}")
    return width


def mask_of(width: int) -> int:
    return (1 << width) - 1


# ---------------------------------------------------------------------------
# Expression AST. Two syntactic categories: arithmetic and boolean. The
# boolean grammar has no assignment production, which is what makes parsed
# predicates pure by construction.

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinArith:
    op: str  # + - * / %
    left: "ArithExpr"
    right: "ArithExpr"


@dataclass(frozen=True)
class Neg:
    operand: "ArithExpr"


ArithExpr = Union[IntLit, Var, BinArith, Neg]


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # == != < <= > >=
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


@dataclass(frozen=True)
class BoolBin:
    op: str  # && ||
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[BoolLit, Cmp, Not, BoolBin]


# ---------------------------------------------------------------------------
# Statements. Any statement may carry a label; a label denotes the control
# location just before the statement executes (for `while`, that is the loop
# head, reached again on every iteration).

@dataclass(frozen=True)
class Assign:
    var: str
    expr: ArithExpr
    label: Optional[str] = None


@dataclass(frozen=True)
class NondetAssign:
    var: str
    label: Optional[str] = None


@dataclass(frozen=True)
class If:
    cond: BoolExpr
    then_body: tuple["Stmt", ...]
    else_body: tuple["Stmt", ...] = ()
    label: Optional[str] = None


@dataclass(frozen=True)
class While:
    cond: BoolExpr
    body: tuple["Stmt", ...]
    label: Optional[str] = None


@dataclass(frozen=True)
class Assert:
    cond: BoolExpr
    label: Optional[str] = None


@dataclass(frozen=True)
class Assume:
    cond: BoolExpr
    label: Optional[str] = None


@dataclass(frozen=True)
class Skip:
    label: Optional[str] = None


Stmt = Union[Assign, NondetAssign, If, While, Assert, Assume, Skip]


@dataclass(frozen=True)
class Decl:
    name: str
    init: Optional[int] = None  # None means implicit 0


# A path addresses a statement inside nested blocks as a sequence of
# (container, index) pairs; the container is "top" for the program body,
# "then"/"else" for an if branch, "body" for a loop body.
Path = tuple


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...]
    body: tuple[Stmt, ...]

    @functools.cached_property
    def var_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls)

    @functools.cached_property
    def labels(self) -> dict:
        """Map label name -> statement path, in source order."""
        out: dict = {}
        for stmt, path in iter_statements(self):
            if stmt.label is not None:
                out[stmt.label] = path
        return out

    def statement_at(self, path: Path) -> Stmt:
        stmt = None
        block: tuple = self.body
        for kind, idx in path:
            if kind == "then":
                block = stmt.then_body
            elif kind == "else":
                block = stmt.else_body
            elif kind == "body":
                block = stmt.body
            stmt = block[idx]
        return stmt

    def resolve_label(self, name: str) -> Path:
        try:
            return self.labels[name]
        except KeyError:
            raise ScopeError(f"unknown label '{name}'") from None


def iter_statements(p: Program) -> Iterator[tuple]:
    """Yield (stmt, path) for every statement, in source order."""
    return _walk(p.body, (), "top")


def _walk(block: tuple, prefix: tuple, tag: str) -> Iterator[tuple]:
    for i, stmt in enumerate(block):
        path = prefix + ((tag, i),)
        yield stmt, path
        if isinstance(stmt, If):
            yield from _walk(stmt.then_body, path, "then")
            yield from _walk(stmt.else_body, path, "else")
        elif isinstance(stmt, While):
            yield from _walk(stmt.body, path, "body")


def locations_of(p: Program) -> list:
    """All label names in source order."""
    return [s.label for s, _ in iter_statements(p) if s.label is not None]


def variables_of_expr(expr) -> set:
    """Free variables of an arithmetic or boolean expression."""
    out: set = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, (BinArith, BoolBin, Cmp)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Neg, Not)):
            stack.append(node.operand)
    return out


# ---------------------------------------------------------------------------
# Lexer

_KEYWORDS = {"int", "if", "else", "while", "assert", "assume", "skip",
             "nondet", "true", "false"}

_PUNCT = ["==", "!=", "<=", ">=", "&&", "||",
          "+", "-", "*", "/", "%", "<", ">", "!", "=",
          ";", ",", "(", ")", "{", "}", "@", ":"]


@dataclass
class Token:
    kind: str  # 'int', 'ident', keyword, or punctuation itself
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            if j < 0:
                break
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in _KEYWORDS else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token(p, p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser: recursive descent with a unified precedence-climbing expression
# parser; boolean vs arithmetic shape is checked after each node is built.

_BOOL_NODES = (BoolLit, Cmp, Not, BoolBin)

# binding power of binary operators, low to high
_BINPREC = {"||": 1, "&&": 2,
            "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
            "+": 4, "-": 4,
            "*": 5, "/": 5, "%": 5}
_CMP_OPS = {"==", "!=", "<", "<=", ">", ">="}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.scope: set = set()

    def peek(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.text!r}", t.line, t.col)
        return self.advance()

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)

    # -- program -----------------------------------------------------------

    def program(self) -> Program:
        decls = []
        while self.peek().kind == "int":
            decls.append(self.decl())
        body = []
        while self.peek().kind != "eof":
            body.append(self.stmt())
        p = Program(tuple(decls), tuple(body))
        _validate(p)
        return p

    def decl(self) -> Decl:
        self.expect("int")
        name = self.expect("ident").text
        if name in self.scope:
            raise self.error(f"variable '{name}' declared twice")
        init = None
        if self.peek().kind == "=":
            self.advance()
            neg = False
            if self.peek().kind == "-":
                self.advance()
                neg = True
            lit = self.expect("int")
            init = -int(lit.text) if neg else int(lit.text)
        self.expect(";")
        self.scope.add(name)
        return Decl(name, init)

    # -- statements ---------------------------------------------------------

    def stmt(self) -> Stmt:
        label = None
        if self.peek().kind == "@":
            self.advance()
            label = self.expect("ident").text
            self.expect(":")
        s = self.core_stmt()
        if label is not None:
            s = replace(s, label=label)
        return s

    def core_stmt(self) -> Stmt:
        t = self.peek()
        if t.kind == "ident":
            name = self.advance().text
            if name not in self.scope:
                raise ParseError(f"undeclared variable '{name}'", t.line, t.col)
            self.expect("=")
            if self.peek().kind == "nondet":
                self.advance()
                self.expect("(")
                self.expect(")")
                self.expect(";")
                return NondetAssign(name)
            expr = self.arith_expr()
            self.expect(";")
            return Assign(name, expr)
        if t.kind == "if":
            self.advance()
            self.expect("(")
            cond = self.bool_expr()
            self.expect(")")
            then_body = self.block()
            else_body: tuple = ()
            if self.peek().kind == "else":
                self.advance()
                else_body = self.block()
            return If(cond, then_body, else_body)
        if t.kind == "while":
            self.advance()
            self.expect("(")
            cond = self.bool_expr()
            self.expect(")")
            body = self.block()
            return While(cond, body)
        if t.kind in ("assert", "assume"):
            self.advance()
            self.expect("(")
            cond = self.bool_expr()
            self.expect(")")
            self.expect(";")
            return Assert(cond) if t.kind == "assert" else Assume(cond)
        if t.kind == "skip":
            self.advance()
            self.expect(";")
            return Skip()
        raise self.error(f"expected a statement, found {t.text!r}")

    def block(self) -> tuple:
        self.expect("{")
        out = []
        while self.peek().kind != "}":
            out.append(self.stmt())
        self.expect("}")
        return tuple(out)

    # -- expressions ---------------------------------------------------------

    def bool_expr(self) -> BoolExpr:
        t = self.peek()
        e = self.expr_bp(0)
        if not isinstance(e, _BOOL_NODES):
            raise ParseError("expected a boolean expression", t.line, t.col)
        return e

    def arith_expr(self) -> ArithExpr:
        t = self.peek()
        e = self.expr_bp(0)
        if isinstance(e, _BOOL_NODES):
            raise ParseError("expected an arithmetic expression", t.line, t.col)
        return e

    def expr_bp(self, min_bp: int):
        lhs = self.expr_atom()
        while True:
            t = self.peek()
            bp = _BINPREC.get(t.kind)
            if bp is None or bp < min_bp:
                return lhs
            self.advance()
            rhs = self.expr_bp(bp + 1)  # all binary ops left-associative
            lhs = self._mk_bin(t, lhs, rhs)

    def _mk_bin(self, t: Token, lhs, rhs):
        op = t.kind
        if op in ("&&", "||"):
            for side in (lhs, rhs):
                if not isinstance(side, _BOOL_NODES):
                    raise ParseError(f"'{op}' needs boolean operands", t.line, t.col)
            return BoolBin(op, lhs, rhs)
        if op in _CMP_OPS:
            for side in (lhs, rhs):
                if isinstance(side, _BOOL_NODES):
                    raise ParseError(f"'{op}' compares arithmetic values", t.line, t.col)
            return Cmp(op, lhs, rhs)
        for side in (lhs, rhs):
            if isinstance(side, _BOOL_NODES):
                raise ParseError(f"'{op}' needs arithmetic operands", t.line, t.col)
        return BinArith(op, lhs, rhs)

    def expr_atom(self):
        t = self.peek()
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text))
        if t.kind == "true":
            self.advance()
            return BoolLit(True)
        if t.kind == "false":
            self.advance()
            return BoolLit(False)
        if t.kind == "ident":
            self.advance()
            if t.text not in self.scope:
                raise ParseError(f"undeclared variable '{t.text}'", t.line, t.col)
            return Var(t.text)
        if t.kind == "-":
            self.advance()
            e = self.expr_atom()
            if isinstance(e, _BOOL_NODES):
                raise ParseError("'-' needs an arithmetic operand", t.line, t.col)
            return Neg(e)
        if t.kind == "!":
            self.advance()
            e = self.expr_atom()
            if not isinstance(e, _BOOL_NODES):
                raise ParseError("'!' needs a boolean operand", t.line, t.col)
            return Not(e)
        if t.kind == "(":
            self.advance()
            e = self.expr_bp(0)
            self.expect(")")
            return e
        raise self.error(f"expected an expression, found {t.text!r}")


def _validate(p: Program) -> None:
    seen: set = set()
    declared = set(p.var_names)
    for stmt, _ in iter_statements(p):
        if stmt.label is not None:
            if stmt.label in seen:
                raise ScopeError(f"duplicate label '{stmt.label}'")
            seen.add(stmt.label)
        for v in _stmt_vars(stmt):
            if v not in declared:
                raise ScopeError(f"undeclared variable '{v}'")


def _stmt_vars(stmt: Stmt) -> set:
    if isinstance(stmt, Assign):
        return {stmt.var} | variables_of_expr(stmt.expr)
    if isinstance(stmt, NondetAssign):
        return {stmt.var}
    if isinstance(stmt, (If, While, Assert, Assume)):
        return variables_of_expr(stmt.cond)
    return set()


def parse_program(text: str) -> Program:
    """Parse MiniWhile source into a validated Program."""
    return _Parser(text).program()


def parse_expression(text: str, scope: set):
    """Parse a standalone expression against an explicit variable scope."""
    parser = _Parser("")
    parser.toks = _tokenize(text)
    parser.pos = 0
    parser.scope = set(scope)
    e = parser.expr_bp(0)
    parser.expect("eof")
    return e


# ---------------------------------------------------------------------------
# Pretty printer. Output reparses to a structurally identical AST.

_PRINT_PREC = dict(_BINPREC)


def print_expr(e) -> str:
    return _pe(e, 0)


def _pe(e, parent_bp: int) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Neg):
        return "-" + _pe(e.operand, 99)
    if isinstance(e, Not):
        return "!" + _pe(e.operand, 99)
    if isinstance(e, (BinArith, Cmp, BoolBin)):
        bp = _PRINT_PREC[e.op]
        s = f"{_pe(e.left, bp)} {e.op} {_pe(e.right, bp + 1)}"
        return f"({s})" if bp < parent_bp else s
    raise TypeError(f"not an expression node: {e!r}")


def pretty_print(p: Program) -> str:
    lines = []
    for d in p.decls:
        if d.init is None:
            lines.append(f"int {d.name};")
        else:
            lines.append(f"int {d.name} = {d.init};")
    _print_block(p.body, lines, "")
    return "\n".join(lines) + ("\n" if lines else "")


def _print_block(block: tuple, lines: list, indent: str) -> None:
    for stmt in block:
        prefix = indent + (f"@{stmt.label}: " if stmt.label else "")
        if isinstance(stmt, Assign):
            lines.append(f"{prefix}{stmt.var} = {print_expr(stmt.expr)};")
        elif isinstance(stmt, NondetAssign):
            lines.append(f"{prefix}{stmt.var} = nondet();")
        elif isinstance(stmt, Assert):
            lines.append(f"{prefix}assert({print_expr(stmt.cond)});")
        elif isinstance(stmt, Assume):
            lines.append(f"{prefix}assume({print_expr(stmt.cond)});")
        elif isinstance(stmt, Skip):
            lines.append(f"{prefix}skip;")
        elif isinstance(stmt, If):
            lines.append(f"{prefix}if ({print_expr(stmt.cond)}) {{")
            _print_block(stmt.then_body, lines, indent + "  ")
            if stmt.else_body:
                lines.append(indent + "} else {")
                _print_block(stmt.else_body, lines, indent + "  ")
            lines.append(indent + "}")
        elif isinstance(stmt, While):
            lines.append(f"{prefix}while ({print_expr(stmt.cond)}) {{")
            _print_block(stmt.body, lines, indent + "  ")
            lines.append(indent + "}")
        else:
            raise TypeError(f"not a statement node: {stmt!r}")
