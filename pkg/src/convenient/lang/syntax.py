"""Concrete syntax: tokens, abstract syntax with source spans, parser, printer.

Types::

    type  := tbin ["-o" type]
    tbin  := tun {("(x)" | "&") tun}
    tun   := "!" tun | "I" | "R^" nat | "(" type ")"

Terms::

    term  := "\\" ident ":" type "." term
           | "let" ident "(x)" ident "=" term "in" term
           | sum
    sum   := tens {"+" tens}
    tens  := app {"(x)" app}
    app   := atom {atom}
    atom  := ident | rational | "[" [rational {"," rational}] "]"
           | "(" term [":" type] ")" | "<" term "," term ">"
           | "coder" "(" term ")" | "derelict" "(" term ")" | "diff" "(" term ")"
           | "coweaken" "(" [term] ")" | "cocontract" "(" term "," term ")"
           | "weaken" "(" term ")" | "contract" "(" term ")"
           | "seely" "(" term ")" | "unseely" "(" term ")"
           | "fst" "(" term ")" | "snd" "(" term ")"
           | "bang" <polynomial JSON object>

The printer emits a canonical form that the parser reads back to the same
tree, and printing that tree again gives the same bytes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from ..poly import PolyMap, poly_from_json, poly_to_json
from ..spaces import format_scalar
from .types import Bang, Lolli, RealT, TensorT, Type, Unit, With, show_type


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _span():
    return field(default=None, compare=False, repr=False)


# -- abstract syntax ----------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Lam:
    var: str
    ty: Type
    body: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class TensorPair:
    left: "Term"
    right: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class LetTensor:
    left: str
    right: str
    value: "Term"
    body: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Coder:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Derelict:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Coweaken:
    arg: "Term | None" = None
    span: Span = _span()


@dataclass(frozen=True)
class Cocontract:
    left: "Term"
    right: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Diff:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Weaken:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Contract:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Seely:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Unseely:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Fst:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Snd:
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class BangLit:
    poly: PolyMap
    span: Span = _span()


@dataclass(frozen=True)
class WithPair:
    left: "Term"
    right: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Sum:
    left: "Term"
    right: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Scalar:
    value: Fraction
    span: Span = _span()


@dataclass(frozen=True)
class VecLit:
    values: tuple
    span: Span = _span()


@dataclass(frozen=True)
class Ascribe:
    term: "Term"
    ty: Type
    span: Span = _span()


Term = Union[
    Var, Lam, App, TensorPair, LetTensor, Coder, Derelict, Coweaken, Cocontract, Diff,
    Weaken, Contract, Seely, Unseely, Fst, Snd, BangLit, WithPair, Sum, Scalar, VecLit, Ascribe,
]

UNARY = {
    "coder": Coder, "derelict": Derelict, "diff": Diff, "weaken": Weaken, "contract": Contract,
    "seely": Seely, "unseely": Unseely, "fst": Fst, "snd": Snd,
}
KEYWORDS = set(UNARY) | {"let", "in", "coweaken", "cocontract", "bang"}


def children(t: Term) -> list:
    if isinstance(t, (Var, BangLit, Scalar, VecLit)):
        return []
    if isinstance(t, Lam):
        return [t.body]
    if isinstance(t, App):
        return [t.fn, t.arg]
    if isinstance(t, LetTensor):
        return [t.value, t.body]
    if isinstance(t, Coweaken):
        return [] if t.arg is None else [t.arg]
    if isinstance(t, (TensorPair, Cocontract, WithPair, Sum)):
        return [t.left, t.right]
    if isinstance(t, Ascribe):
        return [t.term]
    return [t.arg]


# -- tokens ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.line, self.col = line, col
        self.expected = tuple(sorted(set(expected)))
        self.message = message
        hint = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{hint}")


@dataclass(frozen=True)
class Token:
    kind: str  # ident, num, rtype, json, sym, eof
    text: str
    line: int
    col: int
    end_col: int


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<rtype>R\^\d+)
  | (?P<num>-?\d+(?:/\d+)?)
  | (?P<sym>\(x\)|-o|[\\:.()<>,+=\[\]!&])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


def _scan_json(text: str, pos: int) -> int:
    """End offset of the JSON object starting at ``text[pos] == '{'``."""
    depth, i, in_str = 0, pos, False
    while i < len(text):
        ch = text[i]
        if in_str:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i + 1
        elif ch == "\n":
            break
        i += 1
    return -1


def _ends_operand(t: Token) -> bool:
    if t.kind in ("rtype", "num", "json"):
        return True
    if t.kind == "ident":
        return t.text not in KEYWORDS
    return t.text in (")", "]", ">")


def tokenize(text: str, line: int = 1, col: int = 1) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos] == "{" and tokens and tokens[-1].text == "bang":
            end = _scan_json(text, pos)
            if end < 0:
                raise ParseError("unterminated polynomial literal", line, col, ["}"])
            tokens.append(Token("json", text[pos:end], line, col, col + end - pos))
            col += end - pos
            pos = end
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if s == "(x)" and not (tokens and _ends_operand(tokens[-1])):
            # where an operand is expected, "(x)" is the variable x in parentheses
            for k, (kd, piece) in enumerate((("sym", "("), ("ident", "x"), ("sym", ")"))):
                tokens.append(Token(kd, piece, line, col + k, col + k + 1))
            col += 3
            pos = m.end()
            continue
        if kind == "nl":
            line, col = line + 1, 1
        elif kind != "ws":
            tokens.append(Token(kind, s, line, col, col + len(s)))
            col += len(s)
        else:
            col += len(s)
        pos = m.end()
    tokens.append(Token("eof", "", line, col, col))
    return tokens


# -- parser -----------------------------------------------------------------------------

_ATOM_START = {"(", "[", "<"}


class Parser:
    def __init__(self, tokens: list):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected) -> None:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"syntax error: unexpected {found}", t.line, t.col, expected)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("sym", "ident"):
            self.fail([repr(text)])
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident" or self.tok.text in KEYWORDS:
            self.fail(["identifier"])
        return self.advance()

    def span(self, start: Token) -> Span:
        prev = self.toks[self.i - 1]
        return Span(start.line, start.col, prev.line, prev.end_col)

    def at_end(self, what: str = "end of input") -> None:
        if self.tok.kind != "eof":
            self.fail([what])

    # types

    def type_(self) -> Type:
        left = self.tbin()
        if self.tok.text == "-o":
            self.advance()
            return Lolli(left, self.type_())
        return left

    def tbin(self) -> Type:
        t = self.tun()
        while self.tok.text in ("(x)", "&"):
            op = self.advance().text
            r = self.tun()
            t = TensorT(t, r) if op == "(x)" else With(t, r)
        return t

    def tun(self) -> Type:
        tok = self.tok
        if tok.text == "!":
            self.advance()
            return Bang(self.tun())
        if tok.kind == "ident" and tok.text == "I":
            self.advance()
            return Unit()
        if tok.kind == "rtype":
            self.advance()
            return RealT(int(tok.text[2:]))
        if tok.text == "(":
            self.advance()
            t = self.type_()
            self.expect(")")
            return t
        self.fail(["'!'", "'I'", "'R^n'", "'('"])

    # terms

    def term(self) -> Term:
        start = self.tok
        if start.text == "\\":
            self.advance()
            name = self.ident().text
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            body = self.term()
            return Lam(name, ty, body, self.span(start))
        if start.kind == "ident" and start.text == "let":
            self.advance()
            a = self.ident().text
            self.expect("(x)")
            b = self.ident().text
            self.expect("=")
            value = self.term()
            self.expect("in")
            body = self.term()
            return LetTensor(a, b, value, body, self.span(start))
        return self.sum_()

    def sum_(self) -> Term:
        start = self.tok
        t = self.tens()
        while self.tok.text == "+":
            self.advance()
            t = Sum(t, self.tens(), self.span(start))
        return t

    def tens(self) -> Term:
        start = self.tok
        t = self.app()
        while self.tok.text == "(x)":
            self.advance()
            t = TensorPair(t, self.app(), self.span(start))
        return t

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("num",):
            return True
        if t.kind == "ident":
            return t.text not in ("let", "in")
        return t.kind == "sym" and t.text in _ATOM_START

    def app(self) -> Term:
        start = self.tok
        t = self.atom()
        while self.starts_atom() or self.tok.text == "\\":
            arg = self.term() if self.tok.text == "\\" else self.atom()
            t = App(t, arg, self.span(start))
        return t

    def atom(self) -> Term:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Scalar(Fraction(tok.text), self.span(tok))
        if tok.text == "[":
            self.advance()
            vals = []
            if self.tok.text != "]":
                vals.append(self.number())
                while self.tok.text == ",":
                    self.advance()
                    vals.append(self.number())
            self.expect("]")
            return VecLit(tuple(vals), self.span(tok))
        if tok.text == "<":
            self.advance()
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(">")
            return WithPair(a, b, self.span(tok))
        if tok.text == "(" and tok.kind == "sym":
            self.advance()
            t = self.term()
            if self.tok.text == ":":
                self.advance()
                ty = self.type_()
                self.expect(")")
                return Ascribe(t, ty, self.span(tok))
            self.expect(")")
            return t
        if tok.kind == "ident":
            if tok.text in UNARY:
                self.advance()
                self.expect("(")
                a = self.term()
                self.expect(")")
                return UNARY[tok.text](a, self.span(tok))
            if tok.text == "coweaken":
                self.advance()
                self.expect("(")
                arg = None
                if self.tok.text != ")":
                    arg = self.term()
                self.expect(")")
                return Coweaken(arg, self.span(tok))
            if tok.text == "cocontract":
                self.advance()
                self.expect("(")
                a = self.term()
                self.expect(",")
                b = self.term()
                self.expect(")")
                return Cocontract(a, b, self.span(tok))
            if tok.text == "bang":
                self.advance()
                if self.tok.kind != "json":
                    self.fail(["polynomial JSON object"])
                js = self.advance()
                try:
                    poly = poly_from_json(json.loads(js.text))
                except (ValueError, KeyError, TypeError) as exc:
                    raise ParseError(f"bad polynomial literal: {exc}", js.line, js.col) from None
                return BangLit(poly, self.span(tok))
            if tok.text not in KEYWORDS:
                self.advance()
                return Var(tok.text, self.span(tok))
        self.fail(["identifier", "rational", "'('", "'['", "'<'", "'\\\\'", "keyword"])

    def number(self) -> Fraction:
        if self.tok.kind != "num":
            self.fail(["rational"])
        return Fraction(self.advance().text)


def parse_term(text: str, line: int = 1, col: int = 1) -> Term:
    p = Parser(tokenize(text, line, col))
    t = p.term()
    p.at_end()
    return t


def parse_type(text: str) -> Type:
    p = Parser(tokenize(text))
    t = p.type_()
    p.at_end()
    return t


def parse(text: str):
    """A term, or a type when the text is not a term."""
    try:
        return parse_term(text)
    except ParseError as term_err:
        try:
            return parse_type(text)
        except ParseError:
            raise term_err from None


# -- printer -------------------------------------------------------------------------------

_P_TERM, _P_SUM, _P_TENS, _P_APP, _P_ATOM = range(5)


def show(t: Term) -> str:
    return _show(t, _P_TERM)


def _wrap(s: str, need: bool) -> str:
    return f"({s})" if need else s


def _show(t: Term, prec: int) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Scalar):
        return format_scalar(t.value)
    if isinstance(t, VecLit):
        return "[" + ", ".join(format_scalar(v) for v in t.values) + "]"
    if isinstance(t, Lam):
        return _wrap(f"\\{t.var}:{show_type(t.ty)}. {_show(t.body, _P_TERM)}", prec > _P_TERM)
    if isinstance(t, LetTensor):
        s = f"let {t.left} (x) {t.right} = {_show(t.value, _P_TERM)} in {_show(t.body, _P_TERM)}"
        return _wrap(s, prec > _P_TERM)
    if isinstance(t, Sum):
        return _wrap(f"{_show(t.left, _P_SUM)} + {_show(t.right, _P_TENS)}", prec > _P_SUM)
    if isinstance(t, TensorPair):
        return f"({_show(t.left, _P_TENS)} (x) {_show(t.right, _P_APP)})"
    if isinstance(t, App):
        return _wrap(f"{_show(t.fn, _P_APP)} {_show(t.arg, _P_ATOM)}", prec > _P_APP)
    if isinstance(t, Ascribe):
        return f"({_show(t.term, _P_TERM)} : {show_type(t.ty)})"
    if isinstance(t, WithPair):
        return f"<{_show(t.left, _P_TERM)}, {_show(t.right, _P_TERM)}>"
    if isinstance(t, Coweaken):
        return "coweaken()" if t.arg is None else f"coweaken({_show(t.arg, _P_TERM)})"
    if isinstance(t, Cocontract):
        return f"cocontract({_show(t.left, _P_TERM)}, {_show(t.right, _P_TERM)})"
    if isinstance(t, BangLit):
        return "bang" + json.dumps(poly_to_json(t.poly), separators=(",", ":"))
    for kw, cls in UNARY.items():
        if isinstance(t, cls):
            return f"{kw}({_show(t.arg, _P_TERM)})"
    raise TypeError(f"not a term: {t!r}")
