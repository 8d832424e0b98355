"""Text syntax for polynomials, differential forms and problem files.

Polynomial grammar (LL(1), whitespace-insensitive)::

    expr  := term (('+' | '-') term)*
    term  := unary ('*' unary)*
    unary := ('+' | '-') unary | power
    power := atom ('^' INT)?
    atom  := INT | NAME | '(' expr ')'

The literal ``p`` denotes the prime of the problem.  Forms extend a term with
a trailing wedge of differentials, e.g. ``3*x1^2*x2 dx1^dx3``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseError
from .poly import PolyForm

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*^()/]))")


@dataclass
class Token:
    kind: str  # INT, NAME, DX, OP, END
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1, dx_names: dict | None = None) -> list[Token]:
    """Split ``text``; positions are reported relative to (line, column)."""
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, column + pos, text[pos])
        start = m.start(m.lastindex)
        tok = m.group(m.lastindex)
        if m.group(1):
            kind = "INT"
        elif m.group(2):
            kind = "DX" if dx_names and tok in dx_names else "NAME"
        else:
            kind = "OP"
            if tok == "**":
                tok = "^"
        tokens.append(Token(kind, tok, line, column + start))
        pos = m.end()
    tokens.append(Token("END", "", line, column + len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, names, p, allow_forms):
        self.tokens = tokens
        self.i = 0
        self.names = {n: k for k, n in enumerate(names)}
        self.nvars = len(names)
        self.p = p
        self.dx = {"d" + n: k for n, k in self.names.items()}
        self.allow_forms = allow_forms

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(f"{msg} (found {tok.text or 'end of input'!r})", tok.line, tok.column, tok.text)

    def take(self, text=None, kind=None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            self.error(f"expected {text or kind}")
        self.i += 1
        return t

    def parse(self) -> PolyForm:
        out = self.expr()
        if self.tok.kind != "END":
            self.error("unexpected token")
        return out

    def const(self, c) -> PolyForm:
        return PolyForm.constant(self.nvars, c)

    def expr(self) -> PolyForm:
        out = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            out = _combine(out, rhs, 1 if op == "+" else -1, self)
        return out

    def term(self) -> PolyForm:
        if self.allow_forms and self.tok.kind == "DX":
            return self.wedge(self.const(1))
        out = self.unary()
        while True:
            if self.tok.text == "*":
                self.take()
                if self.allow_forms and self.tok.kind == "DX":
                    return self.wedge(out)
                out = out.wedge(self.unary())
            elif self.tok.text == "/":
                t = self.take()
                divisor = self.unary()
                if divisor.degree or any(k != ((0,) * self.nvars, ()) for k in divisor.terms):
                    self.error("can only divide by a constant", t)
                if divisor.is_zero():
                    self.error("division by zero", t)
                out = out.scale(Fraction(1) / Fraction(divisor.terms[((0,) * self.nvars, ())]))
            elif self.allow_forms and self.tok.kind == "DX":
                return self.wedge(out)
            else:
                return out

    def wedge(self, coeff: PolyForm) -> PolyForm:
        out = coeff
        while True:
            t = self.take(kind="DX")
            factor = PolyForm.dx(self.nvars, self.dx[t.text])
            if out.degree + 1 > self.nvars:
                self.error("too many differentials", t)
            out = out.wedge(factor)
            if self.tok.text == "^" and self.tokens[self.i + 1].kind == "DX":
                self.take("^")
                continue
            return out

    def unary(self) -> PolyForm:
        if self.tok.text in ("+", "-"):
            sign = self.take().text
            inner = self.unary()
            return -inner if sign == "-" else inner
        return self.power()

    def power(self) -> PolyForm:
        base = self.atom()
        if self.tok.text == "^":
            self.take()
            t = self.tok
            if t.kind != "INT":
                self.error("expected a nonnegative integer exponent")
            self.take()
            base = base ** int(t.text)
        return base

    def atom(self) -> PolyForm:
        t = self.tok
        if t.kind == "INT":
            self.take()
            return self.const(int(t.text))
        if t.kind == "NAME":
            self.take()
            if t.text in self.names:
                return PolyForm.var(self.nvars, self.names[t.text])
            if t.text == "p" and self.p is not None:
                return self.const(self.p)
            self.error("unknown variable", t)
        if t.text == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        self.error("expected a number, variable or '('")


def _combine(a: PolyForm, b: PolyForm, sign: int, parser: _Parser) -> PolyForm:
    if a.is_zero():
        return b if sign > 0 else -b
    if b.is_zero():
        return a
    if a.degree != b.degree:
        parser.error("terms of different form degree")
    return a + b if sign > 0 else a - b


def parse_poly(text: str, names, p: int | None = None, line: int = 1, column: int = 1) -> PolyForm:
    names = list(names)
    return _Parser(tokenize(text, line, column), names, p, False).parse()


def parse_form(text: str, names, p: int | None = None, line: int = 1, column: int = 1) -> PolyForm:
    names = list(names)
    dx = {"d" + n for n in names} - set(names)
    return _Parser(tokenize(text, line, column, dx), names, p, True).parse()


# ---------------------------------------------------------------------------
# problem files

_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")

LIST_KEYS = ("D", "nMax", "e", "c0", "N", "mMax")


@dataclass
class ProblemSpec:
    """Parsed, still symbolic, contents of a problem file."""

    p: int | None = None
    variables: list = field(default_factory=list)
    relations: list = field(default_factory=list)  # (text, line, column)
    alt_variables: list = field(default_factory=list)
    alt_relations: list = field(default_factory=list)
    section: dict = field(default_factory=dict)  # name -> (text, line, column)
    mode: str = "padic"
    cone: str = "full"
    oracle: bool = False
    levels: int | None = None
    gamma: Fraction | None = None
    schedule: dict = field(default_factory=dict)  # key -> list[int]
    label: str = ""
    max_generators: int | None = None


def _split_statements(text: str):
    """Yield (statement, line, column) for ';' or newline separated statements."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        col = 0
        for piece in line.split(";"):
            stripped = piece.strip()
            if stripped:
                yield stripped, lineno, col + piece.index(stripped) + 1
            col += len(piece) + 1


def _split_top(value: str, sep: str = ","):
    """Split at ``sep`` outside parentheses, yielding (piece, offset)."""
    depth, start = 0, 0
    for i, ch in enumerate(value):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            yield value[start:i], start
            start = i + 1
    yield value[start:], start


def _pieces(value: str, line: int, col: int, sep: str = ","):
    for piece, off in _split_top(value, sep):
        s = piece.strip()
        if s:
            yield s, line, col + off + piece.index(s)


_STMT = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)\s*(?:[=:]\s*|\s+|$)")


def parse_problem(text: str) -> ProblemSpec:
    spec = ProblemSpec()
    for stmt, line, col in _split_statements(text):
        m = _STMT.match(stmt)
        if not m:
            raise ParseError(f"expected 'key value', got {stmt!r}", line, col, stmt[:1])
        key = m.group(1)
        value = stmt[m.end():]
        vcol = col + m.end()
        _apply(spec, key, value, line, col, vcol)
    if spec.p is None:
        raise ParseError("missing prime: add a 'p = <prime>' line", 1, 1, "")
    if not spec.variables:
        raise ParseError("missing variables: add a 'vars x, y' line", 1, 1, "")
    return spec


def _names(value, line, vcol):
    out = []
    for piece, l, c in _pieces(value.replace(" ", ",") if "," not in value else value, line, vcol):
        if not _NAME.match(piece) or piece == "p":
            raise ParseError(f"invalid variable name {piece!r}", l, c, piece)
        if piece in out:
            raise ParseError(f"duplicate variable {piece!r}", l, c, piece)
        out.append(piece)
    return out


def _int(value, line, col, key):
    try:
        return int(value.strip())
    except ValueError:
        raise ParseError(f"{key} expects an integer", line, col, value.strip()) from None


def _apply(spec: ProblemSpec, key: str, value: str, line: int, col: int, vcol: int):
    v = value.strip()
    if key == "p":
        spec.p = _int(v, line, vcol, key)
    elif key in ("vars", "variables"):
        spec.variables = _names(value, line, vcol)
    elif key in ("alt_vars", "alt_variables"):
        spec.alt_variables = _names(value, line, vcol)
    elif key in ("relations", "alt_relations"):
        rels = [] if v.lower() == "none" else list(_pieces(value, line, vcol))
        setattr(spec, key, rels)
    elif key == "section":
        for piece, l, c in _pieces(value, line, vcol):
            if "->" not in piece:
                raise ParseError("section entries look like 'u -> x + y'", l, c, piece)
            name, rhs = piece.split("->", 1)
            name = name.strip()
            spec.section[name] = (rhs.strip(), l, c + piece.index("->") + 2 + (len(rhs) - len(rhs.lstrip())))
    elif key == "mode":
        if v not in ("padic", "exact"):
            raise ParseError("mode is 'padic' or 'exact'", line, vcol, v)
        spec.mode = v
    elif key == "cone":
        if v not in ("full", "single"):
            raise ParseError("cone is 'full' or 'single'", line, vcol, v)
        spec.cone = v
    elif key == "oracle":
        if v not in ("on", "off"):
            raise ParseError("oracle is 'on' or 'off'", line, vcol, v)
        spec.oracle = v == "on"
    elif key == "levels":
        spec.levels = _int(v, line, vcol, key)
    elif key == "max_generators":
        spec.max_generators = _int(v, line, vcol, key)
    elif key == "gamma":
        try:
            spec.gamma = Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise ParseError("gamma expects a rational such as 1/2", line, vcol, v) from None
        if spec.gamma <= 0:
            raise ParseError("gamma must be positive", line, vcol, v)
    elif key == "label":
        spec.label = v
    elif key in LIST_KEYS:
        spec.schedule[key] = [_int(s, l, c, key) for s, l, c in _pieces(value, line, vcol)]
    else:
        raise ParseError(f"unknown key {key!r}", line, col, key)
