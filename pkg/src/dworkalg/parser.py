"""Recursive-descent parser for the operator expression language.

    expr   := ['-'] term (('+'|'-') term)*
    term   := factor (('*' factor) | ('/' factor))*
    factor := scalar | var power? | dop | dwork | '(' expr ')' power?
    var    := x | y | x<i> | y<i> | x' | t
    power  := '^' ['-'] int
    dop    := d<var> ('^[' nat ']' | '^<' nat ';' nat '>')?
    dwork  := 'H' ('(' var ')')? | 'Hx^-{' nat (',' nat)* '}'
    scalar := int | p | pi power? | zeta power?

Division is only by constants.  Everything is evaluated as a DiffOp and
downcast at the end: no derivatives gives a LaurentPoly, no variables a scalar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .dwork import dwork_dual, dwork_H
from .errors import DworkAlgError, Overflow, ParseError
from .operator_algebra import Caps, DiffOp, LaurentPoly, op_mul
from .padic_core import TruncationParams, roots_of_unity

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) |
    (?P<int>\d+) |
    (?P<name>[A-Za-z]+\d*'?) |
    (?P<sym>[-+*/^()\[\]<>;,{}])
""", re.VERBOSE)

_VAR = re.compile(r"^(x|y)(\d*)$|^x'$|^t$")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line, col = line + 1, 1
        elif kind != "ws":
            out.append(Token(kind, m.group(), line, col))
            col += len(m.group())
        else:
            col += len(m.group())
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


def infer_names(text: str) -> tuple:
    """Coordinate names implied by the identifiers in ``text``."""
    names = set()
    for tok in tokenize(text):
        if tok.kind != "name":
            continue
        t = tok.text
        if t.startswith("d") and len(t) > 1:
            t = t[1:]
        if _VAR.match(t):
            names.add(t)
    if names & {"x'", "t"}:
        return ("x'", "t")
    indexed = sorted((n for n in names if re.match(r"^[xy]\d+$", n)), key=lambda n: (n[0], int(n[1:])))
    if indexed:
        letters = {n[0] for n in indexed}
        if len(letters) > 1 or names - set(indexed):
            raise ParseError("mixing indexed and plain coordinates")
        n = max(int(v[1:]) for v in indexed)
        return tuple(f"{indexed[0][0]}{i + 1}" for i in range(n))
    if "y" in names and "x" not in names:
        return ("y",)
    if "y" in names:
        return ("x", "y")
    return ("x",)


class Parser:
    def __init__(self, text: str, params: TruncationParams, names: Sequence[str] | None = None,
                 caps: Caps | None = None):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.params = params
        self.names = tuple(names) if names else infer_names(text)
        self.dim = len(self.names)
        self.ring = params.ring()
        order = max(params.order, params.hi)
        self.caps = caps or Caps.uniform(self.dim, params.lo, params.hi, order)

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg, expected=()):
        raise ParseError(msg, self.tok.line, self.tok.col, expected)

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"unexpected {self.tok.text or 'end of input'!r}", [text])

    def integer(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "int":
            self.error("expected an integer", ["<int>"])
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    def nat(self) -> int:
        if self.tok.kind != "int":
            self.error("expected a natural number", ["<nat>"])
        v = int(self.tok.text)
        self.i += 1
        return v

    # -- grammar ------------------------------------------------------------

    def parse(self) -> DiffOp:
        out = self.expr()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}", ["+", "-", "*", "/", "<end>"])
        return out

    def expr(self) -> DiffOp:
        neg = self.accept("-")
        out = self.term()
        if neg:
            out = -out
        while True:
            if self.accept("+"):
                out = out + self.term()
            elif self.accept("-"):
                out = out - self.term()
            else:
                return out

    def term(self) -> DiffOp:
        out = self.factor()
        while True:
            if self.accept("*"):
                out = op_mul(out, self.factor())
            elif self.tok.text == "/":
                t = self.tok
                self.i += 1
                d = self.factor()
                if not d.is_function() or any(any(a) for a, _ in d.terms) or d.is_zero():
                    raise ParseError("division only by nonzero constants", t.line, t.col)
                out = out.scale(d.coeff((0,) * self.dim, (0,) * self.dim).inverse())
            else:
                return out

    def _power(self) -> int | None:
        if self.tok.text == "^" and self.tokens[self.i + 1].text not in ("[", "<"):
            self.i += 1
            return self.integer()
        return None

    def _const(self, c) -> DiffOp:
        return DiffOp.scalar(self.ring, self.dim, c, self.caps, self.names)

    def factor(self) -> DiffOp:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return self._const(int(tok.text))
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            n = self._power()
            if n is not None:
                if n < 0:
                    self.error("negative power of a parenthesized expression")
                inner = inner ** n
            return inner
        if tok.kind != "name":
            self.error(f"unexpected {tok.text or 'end of input'!r}",
                       ["<int>", "(", "p", "pi", "zeta", "H", "Hx", "<var>", "d<var>"])
        name = tok.text
        self.i += 1
        if name == "p":
            return self._const(self.params.p)
        if name in ("pi", "zeta"):
            base = self.ring.pi() if name == "pi" else roots_of_unity(self.params.q, self.ring)[1]
            n = self._power()
            return self._const(base ** (1 if n is None else n))
        if name == "H":
            if self.accept("("):
                v = self.tok.text
                self.i += 1
                idx = self._index(v, tok)
                self.expect(")")
                return self._dwork(dwork_H(idx, self.params, self.dim))
            return self._dwork(dwork_H(None, self.params, self.dim))
        if name == "Hx":
            self.expect("^")
            self.expect("-")
            self.expect("{")
            ks = [self.nat()]
            while self.accept(","):
                ks.append(self.nat())
            self.expect("}")
            if len(ks) != self.dim:
                raise ParseError(f"dual index needs {self.dim} entries", tok.line, tok.col)
            return self._dwork(dwork_dual(tuple(ks), self.params, self.dim))
        if name.startswith("d") and name[1:] in self.names:
            idx = self.names.index(name[1:])
            k, m = 1, None
            if self.tok.text == "^":
                self.i += 1
                if self.accept("["):
                    k = self.nat()
                    self.expect("]")
                elif self.accept("<"):
                    k = self.nat()
                    self.expect(";")
                    m = self.nat()
                    self.expect(">")
                else:
                    self.error("expected a divided or level power", ["^[", "^<"])
            op = DiffOp.d(self.ring, self.dim, idx, k, self.caps, self.names)
            if m is not None:
                from .operator_algebra import qfact_int
                op = op.scale(qfact_int(k, self.params.p, m))
            return op
        if name in self.names:
            idx = self.names.index(name)
            n = self._power()
            return DiffOp.x(self.ring, self.dim, idx, 1 if n is None else n, self.caps, self.names)
        raise ParseError(f"unknown identifier {name!r}", tok.line, tok.col)

    def _index(self, v: str, tok: Token) -> int:
        if v not in self.names:
            raise ParseError(f"unknown coordinate {v!r}", tok.line, tok.col)
        return self.names.index(v)

    def _dwork(self, op: DiffOp) -> DiffOp:
        # room for one product with another materialized series
        order = max(op.caps.order)
        room = Caps.uniform(self.dim, self.params.lo - order, self.params.hi + 2 * order, 2 * order)
        return op.with_caps(op.caps.join(self.caps).join(room)).renamed(self.names)


def parse_operator(text: str, params: TruncationParams | None = None,
                   names: Sequence[str] | None = None, caps: Caps | None = None) -> DiffOp:
    params = params or TruncationParams()
    try:
        return Parser(text, params, names, caps).parse()
    except Overflow as exc:
        raise ParseError(f"value outside caps: {exc}") from exc


def parse(text: str, params: TruncationParams | None = None, names: Sequence[str] | None = None,
          caps: Caps | None = None):
    """Parse to the narrowest type: PadicScalar, LaurentPoly or DiffOp."""
    op = parse_operator(text, params, names, caps)
    if not op.is_function():
        return op
    if all(not any(a) for a, _ in op.terms):
        return op.coeff((0,) * op.dim, (0,) * op.dim)
    return op.to_poly()


def show(value) -> str:
    """Canonical text of any parsed value (inverse of ``parse``)."""
    from .padic_core import PadicScalar, format_scalar

    if isinstance(value, PadicScalar):
        return format_scalar(value)
    return repr(value)
