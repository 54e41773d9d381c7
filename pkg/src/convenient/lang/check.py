"""Linear type checking with an exponential zone.

Variables of type ``!A`` live in the exponential zone and may be used any
number of times (the evaluator routes the copies through the comultiplication
and drops unused ones with the counit).  Every other variable is linear and
must be used exactly once.  ``+`` and ``<_, _>`` are additive: both branches
see the whole context and must use the same linear variables.

``coweaken()`` has type ``!?`` with the space left to unification; an
ascription or the surrounding term must pin it down.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .syntax import (
    App, Ascribe, BangLit, Cocontract, Coder, Contract, Coweaken, Derelict, Diff, Fst, Lam,
    LetTensor, Scalar, Seely, Snd, Span, Sum, TensorPair, Term, Unseely, Var, VecLit, Weaken,
    WithPair, children,
)
from .types import Bang, Lolli, Meta, RealT, TensorT, Type, Unit, With, is_space_type, show_type


class TypeCheckError(ValueError):
    def __init__(self, kind: str, message: str, span: Span | None):
        self.kind = kind  # unbound | linearity | mismatch | ambiguous
        self.span = span
        where = f"{span}: " if span else ""
        super().__init__(f"{where}{kind} error: {message}")


@dataclass
class Checked:
    """A checked term with the resolved type of every node."""

    term: Term
    type: Type
    context: dict
    node_types: dict = field(repr=False)

    def type_of(self, node: Term) -> Type:
        return self.node_types[id(node)]


def is_exponential(t: Type) -> bool:
    return isinstance(t, Bang)


class Checker:
    def __init__(self):
        self.subst: dict = {}
        self.counter = 0
        self.node_types: dict = {}
        self.nodes: list = []  # keeps ids stable

    def fresh(self) -> Meta:
        self.counter += 1
        return Meta(self.counter)

    def resolve(self, t: Type) -> Type:
        while isinstance(t, Meta) and t in self.subst:
            t = self.subst[t]
        return t

    def zonk(self, t: Type) -> Type:
        t = self.resolve(t)
        if isinstance(t, Bang):
            return Bang(self.zonk(t.inner))
        if isinstance(t, Lolli):
            return Lolli(self.zonk(t.dom), self.zonk(t.cod))
        if isinstance(t, TensorT):
            return TensorT(self.zonk(t.left), self.zonk(t.right))
        if isinstance(t, With):
            return With(self.zonk(t.left), self.zonk(t.right))
        return t

    def occurs(self, m: Meta, t: Type) -> bool:
        t = self.resolve(t)
        if t == m:
            return True
        if isinstance(t, Bang):
            return self.occurs(m, t.inner)
        if isinstance(t, Lolli):
            return self.occurs(m, t.dom) or self.occurs(m, t.cod)
        if isinstance(t, (TensorT, With)):
            return self.occurs(m, t.left) or self.occurs(m, t.right)
        return False

    def unify(self, a: Type, b: Type, span: Span | None, what: str) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, Meta) or isinstance(b, Meta):
            m, t = (a, b) if isinstance(a, Meta) else (b, a)
            if self.occurs(m, t):
                raise TypeCheckError("mismatch", f"infinite type in {what}", span)
            self.subst[m] = t
            return
        if type(a) is type(b):
            if isinstance(a, Bang):
                return self.unify(a.inner, b.inner, span, what)
            if isinstance(a, Lolli):
                self.unify(a.dom, b.dom, span, what)
                return self.unify(a.cod, b.cod, span, what)
            if isinstance(a, (TensorT, With)):
                self.unify(a.left, b.left, span, what)
                return self.unify(a.right, b.right, span, what)
        raise TypeCheckError(
            "mismatch", f"{what}: expected {show_type(self.zonk(b))}, got {show_type(self.zonk(a))}", span
        )

    def expect_bang(self, t: Type, span, what) -> Type:
        r = self.resolve(t)
        if not isinstance(r, (Bang, Meta)):
            raise TypeCheckError("mismatch", f"{what}: expected a ! type, got {show_type(self.zonk(r))}", span)
        inner = self.fresh()
        self.unify(t, Bang(inner), span, what)
        return inner

    # -- inference ---------------------------------------------------------------

    def infer(self, t: Term, ctx: dict) -> tuple:
        ty, use = self._infer(t, ctx)
        self.node_types[id(t)] = ty
        self.nodes.append(t)
        return ty, use

    def _bind(self, name: str, ty: Type, use: Counter, scope: Term, span) -> None:
        if not is_exponential(self.resolve(ty)):
            _check_once(name, use.get(name, 0), scope, span)
        use.pop(name, None)

    def _additive(self, ua: Counter, ub: Counter, ctx: dict, span, left: Term, right: Term) -> Counter:
        for name in sorted(set(ua) | set(ub)):
            if name not in ctx or is_exponential(self.resolve(ctx[name])):
                continue
            for use, branch in ((ua, left), (ub, right)):
                if use[name] > 1:
                    _check_once(name, use[name], branch, span)
            if ua[name] != ub[name]:
                raise TypeCheckError(
                    "linearity", f"additive branches use linear variable '{name}' differently", span
                )
        return ua | ub

    def _infer(self, t: Term, ctx: dict) -> tuple:
        sp = t.span
        if isinstance(t, Var):
            if t.name not in ctx:
                raise TypeCheckError("unbound", f"unbound variable '{t.name}'", sp)
            return ctx[t.name], Counter({t.name: 1})
        if isinstance(t, Scalar):
            return Unit(), Counter()
        if isinstance(t, VecLit):
            return RealT(len(t.values)), Counter()
        if isinstance(t, Lam):
            ty, use = self.infer(t.body, {**ctx, t.var: t.ty})
            self._bind(t.var, t.ty, use, t.body, sp)
            return Lolli(t.ty, ty), use
        if isinstance(t, App):
            f, uf = self.infer(t.fn, ctx)
            a, ua = self.infer(t.arg, ctx)
            cod = self.fresh()
            self.unify(f, Lolli(a, cod), sp, "application")
            return cod, uf + ua
        if isinstance(t, TensorPair):
            a, ua = self.infer(t.left, ctx)
            b, ub = self.infer(t.right, ctx)
            return TensorT(a, b), ua + ub
        if isinstance(t, LetTensor):
            if t.left == t.right:
                raise TypeCheckError("linearity", f"'{t.left}' bound twice", sp)
            p, up = self.infer(t.value, ctx)
            a, b = self.fresh(), self.fresh()
            self.unify(p, TensorT(a, b), t.value.span, "let (x)")
            ty, ub = self.infer(t.body, {**ctx, t.left: a, t.right: b})
            self._bind(t.left, a, ub, t.body, sp)
            self._bind(t.right, b, ub, t.body, sp)
            return ty, up + ub
        if isinstance(t, Coder):
            a, u = self.infer(t.arg, ctx)
            return Bang(a), u
        if isinstance(t, Derelict):
            a, u = self.infer(t.arg, ctx)
            return self.expect_bang(a, t.arg.span, "derelict"), u
        if isinstance(t, Coweaken):
            if t.arg is None:
                return Bang(self.fresh()), Counter()
            a, u = self.infer(t.arg, ctx)
            self.unify(a, Unit(), t.arg.span, "coweaken")
            return Bang(self.fresh()), u
        if isinstance(t, Cocontract):
            a, ua = self.infer(t.left, ctx)
            b, ub = self.infer(t.right, ctx)
            inner = self.expect_bang(a, t.left.span, "cocontract")
            self.unify(b, Bang(inner), t.right.span, "cocontract")
            return Bang(inner), ua + ub
        if isinstance(t, Diff):
            f, u = self.infer(t.arg, ctx)
            a, b = self.fresh(), self.fresh()
            self.unify(f, Lolli(Bang(a), b), t.arg.span, "diff")
            return Lolli(TensorT(a, Bang(a)), b), u
        if isinstance(t, BangLit):
            return Lolli(Bang(RealT(t.poly.nvars)), RealT(t.poly.nout)), Counter()
        if isinstance(t, Weaken):
            a, u = self.infer(t.arg, ctx)
            self.expect_bang(a, t.arg.span, "weaken")
            return Unit(), u
        if isinstance(t, Contract):
            a, u = self.infer(t.arg, ctx)
            inner = self.expect_bang(a, t.arg.span, "contract")
            return TensorT(Bang(inner), Bang(inner)), u
        if isinstance(t, Seely):
            a, u = self.infer(t.arg, ctx)
            x, y = self.fresh(), self.fresh()
            self.unify(a, Bang(With(x, y)), t.arg.span, "seely")
            return TensorT(Bang(x), Bang(y)), u
        if isinstance(t, Unseely):
            a, u = self.infer(t.arg, ctx)
            x, y = self.fresh(), self.fresh()
            self.unify(a, TensorT(Bang(x), Bang(y)), t.arg.span, "unseely")
            return Bang(With(x, y)), u
        if isinstance(t, WithPair):
            a, ua = self.infer(t.left, ctx)
            b, ub = self.infer(t.right, ctx)
            return With(a, b), self._additive(ua, ub, ctx, sp, t.left, t.right)
        if isinstance(t, (Fst, Snd)):
            p, u = self.infer(t.arg, ctx)
            x, y = self.fresh(), self.fresh()
            self.unify(p, With(x, y), t.arg.span, "projection")
            return (x if isinstance(t, Fst) else y), u
        if isinstance(t, Sum):
            a, ua = self.infer(t.left, ctx)
            b, ub = self.infer(t.right, ctx)
            self.unify(b, a, t.right.span, "sum")
            return a, self._additive(ua, ub, ctx, sp, t.left, t.right)
        if isinstance(t, Ascribe):
            a, u = self.infer(t.term, ctx)
            self.unify(a, t.ty, sp, "ascription")
            return t.ty, u
        raise TypeError(f"not a term: {t!r}")


def _occurrences(t: Term, name: str) -> list:
    """Spans of the free occurrences of ``name`` in source order."""
    if isinstance(t, Var):
        return [t.span] if t.name == name else []
    if isinstance(t, Lam) and t.var == name:
        return []
    if isinstance(t, LetTensor) and name in (t.left, t.right):
        return _occurrences(t.value, name)
    return [s for c in children(t) for s in _occurrences(c, name)]


def _check_once(name: str, count: int, scope: Term, span) -> None:
    if count == 1:
        return
    if count > 1:
        spans = _occurrences(scope, name)
        span = spans[1] if len(spans) > 1 else span
    raise TypeCheckError(
        "linearity", f"linear variable '{name}' used {count} times (exactly once required)", span
    )


def _has_meta(t: Type) -> bool:
    if isinstance(t, Meta):
        return True
    if isinstance(t, Bang):
        return _has_meta(t.inner)
    if isinstance(t, Lolli):
        return _has_meta(t.dom) or _has_meta(t.cod)
    if isinstance(t, (TensorT, With)):
        return _has_meta(t.left) or _has_meta(t.right)
    return False


def _bang_of_function(t: Type):
    if isinstance(t, Bang):
        return t if not is_space_type(t.inner) else None
    if isinstance(t, Lolli):
        return _bang_of_function(t.dom) or _bang_of_function(t.cod)
    if isinstance(t, (TensorT, With)):
        return _bang_of_function(t.left) or _bang_of_function(t.right)
    return None


def typecheck(ctx: dict, term: Term) -> Checked:
    """Check ``ctx |- term``; every linear variable of ``ctx`` is used once."""
    ch = Checker()
    ty, use = ch.infer(term, dict(ctx))
    for name, t in ctx.items():
        if not is_exponential(t):
            _check_once(name, use.get(name, 0), term, term.span)
    types = {k: ch.zonk(v) for k, v in ch.node_types.items()}
    for node in ch.nodes:
        nt = types[id(node)]
        if _has_meta(nt):
            raise TypeCheckError(
                "ambiguous", f"cannot infer the type {show_type(nt)}; add an ascription", node.span
            )
        bad = _bang_of_function(nt)
        if bad is not None:
            raise TypeCheckError("mismatch", f"! applies to spaces only, got {show_type(bad)}", node.span)
    return Checked(term, types[id(term)], dict(ctx), types)


def free_vars(t: Term, memo: dict | None = None) -> frozenset:
    memo = {} if memo is None else memo
    key = id(t)
    if key in memo:
        return memo[key]
    if isinstance(t, Var):
        out = frozenset([t.name])
    elif isinstance(t, Lam):
        out = free_vars(t.body, memo) - {t.var}
    elif isinstance(t, LetTensor):
        out = free_vars(t.value, memo) | (free_vars(t.body, memo) - {t.left, t.right})
    else:
        out = frozenset().union(*(free_vars(c, memo) for c in children(t)))
    memo[key] = out
    return out
