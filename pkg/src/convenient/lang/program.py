"""Term files and environment files.

A term file holds one declaration per line, ``name : type = term``, or a bare
term; ``#`` starts a comment.  Later lines may use earlier names.  Each line is
checked in the context of the environment and earlier declarations restricted
to the variables it mentions.

An environment file is a JSON object ``{"name": {"type": T, "value": V}}``.
``V`` uses the point encodings of :mod:`convenient.exponential.serial`; a map
type ``!R^n -o R^m`` or ``R^n -o R^m`` takes ``{"poly": <polynomial JSON>}``
(lifted, or required to be linear, respectively).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..exponential.elements import Pair
from ..exponential.serial import decode, encode
from ..exponential.structure import lift
from ..poly import poly_eval, poly_from_json
from .check import free_vars, typecheck
from .evaluate import EvalError, LinFun, evaluate
from .syntax import Ascribe, Parser, Term, parse_type, tokenize
from .types import Bang, Lolli, RealT, Type, With, is_space_type, show_type, to_space


@dataclass(frozen=True)
class Declaration:
    name: str | None
    ty: Type | None
    term: Term
    line: int


def parse_program(text: str) -> list:
    decls = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        p = Parser(tokenize(raw, lineno, 1))
        name = ty = None
        toks = p.toks
        if len(toks) > 2 and toks[0].kind == "ident" and toks[1].text == ":":
            name = p.ident().text
            p.expect(":")
            ty = p.type_()
            p.expect("=")
        term = p.term()
        p.at_end()
        decls.append(Declaration(name, ty, term, lineno))
    return decls


def decode_value(ty: Type, data):
    if is_space_type(ty):
        return decode(to_space(ty), data)
    if isinstance(ty, Lolli) and isinstance(data, dict) and "poly" in data:
        poly = poly_from_json(data["poly"])
        if isinstance(ty.dom, Bang) and ty.dom.inner == RealT(poly.nvars) and ty.cod == RealT(poly.nout):
            return LinFun(ty.dom, ty.cod, lift(poly), f"bang {poly}")
        if ty.dom == RealT(poly.nvars) and ty.cod == RealT(poly.nout):
            if not poly.is_linear():
                raise ValueError(f"{poly} is not linear, so not a value of {show_type(ty)}")
            return LinFun(ty.dom, ty.cod, lambda x: poly_eval(poly, x), str(poly))
        raise ValueError(f"polynomial {poly.nvars} -> {poly.nout} does not have type {show_type(ty)}")
    if isinstance(ty, With) and isinstance(data, list) and len(data) == 2:
        return Pair(decode_value(ty.left, data[0]), decode_value(ty.right, data[1]))
    raise ValueError(f"cannot decode a value of type {show_type(ty)} from {data!r}")


def encode_value(ty: Type, x):
    if is_space_type(ty):
        return encode(to_space(ty), x)
    if isinstance(ty, Lolli):
        return {"linear_map": x.label}
    if isinstance(ty, With):
        return [encode_value(ty.left, x.left), encode_value(ty.right, x.right)]
    raise EvalError(f"no encoding for {show_type(ty)}")


def parse_env(data: dict) -> tuple:
    """``(types, values)`` from a decoded environment document."""
    if not isinstance(data, dict):
        raise ValueError("environment must be a JSON object")
    types, values = {}, {}
    for name, entry in data.items():
        try:
            ty = parse_type(entry["type"])
            values[name] = decode_value(ty, entry["value"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"environment entry '{name}': {exc}") from None
        types[name] = ty
    return types, values


def load_env(path) -> tuple:
    return parse_env(json.loads(Path(path).read_text()))


def run_program(text: str, types: dict, values: dict) -> list:
    """Check and evaluate every line; returns ``[{name, type, value}]``.

    Raises ``ParseError``, ``TypeCheckError`` or ``EvalError`` on the first bad line.
    """
    types, values = dict(types), dict(values)
    out = []
    for d in parse_program(text):
        term = d.term if d.ty is None else Ascribe(d.term, d.ty, d.term.span)
        used = free_vars(term)
        ctx = {k: types[k] for k in used if k in types}
        checked = typecheck(ctx, term)
        value = evaluate(checked, {k: values[k] for k in ctx})
        if d.name is not None:
            types[d.name], values[d.name] = checked.type, value
        out.append({
            "line": d.line,
            "name": d.name,
            "type": show_type(checked.type),
            "value": encode_value(checked.type, value),
        })
    return out

