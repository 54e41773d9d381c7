"""Evaluation of checked terms into the semantic modules.

Values follow the type: spaces give their elements (``Vector``, ``Fraction``,
``Distribution``, ``Pair``, ``Tensor``), ``A -o B`` gives a :class:`LinFun`
and ``A & B`` of non-space components gives a :class:`Pair` of values.

Exponential variables are routed explicitly.  Every node first restricts its
environment to its free variables; an exponential variable dropped there
contributes the factor ``e(u)``.  A multiplicative node (application, tensor
pair, let, cocontraction) whose children share an exponential variable splits
its value with the comultiplication, one factor per child, and sums the
results.  Additive nodes (``+`` and ``<_, _>``) hand the whole environment to
both branches.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable

from ..exponential import elements as el
from ..exponential.elements import Distribution, Pair, Tensor
from ..exponential.structure import (
    coder, comul_delta, conv_nabla, counit_e, derive_dA, eps, lift, seely_merge, seely_split, unit_nu,
)
from ..spaces import Vector
from .check import Checked, free_vars
from .syntax import (
    App, Ascribe, BangLit, Cocontract, Coder, Contract, Coweaken, Derelict, Diff, Fst, Lam,
    LetTensor, Scalar, Seely, Snd, Sum, TensorPair, Term, Unseely, Var, VecLit, Weaken, WithPair,
)
from .types import Bang, Lolli, Type, With, is_space_type, show_type, to_space

_ZERO = Fraction(0)
_ONE = Fraction(1)


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class LinFun:
    """A linear map between the values of ``dom`` and ``cod``."""

    dom: Type
    cod: Type
    fn: Callable
    label: str = "<linear map>"

    def __call__(self, x):
        return self.fn(x)


# -- value algebra ----------------------------------------------------------------------


def sem_zero(ty: Type):
    if is_space_type(ty):
        return el.zero(to_space(ty))
    if isinstance(ty, Lolli):
        z = sem_zero(ty.cod)
        return LinFun(ty.dom, ty.cod, lambda _x: z, "0")
    if isinstance(ty, With):
        return Pair(sem_zero(ty.left), sem_zero(ty.right))
    raise EvalError(f"no values of type {show_type(ty)}")


def sem_combination(ty: Type, pairs) -> object:
    """``sum c_i * x_i`` for values ``x_i`` of ``ty``."""
    pairs = [(Fraction(c), x) for c, x in pairs if c]
    if is_space_type(ty):
        return el.linear_combination(to_space(ty), pairs)
    if not pairs:
        return sem_zero(ty)
    if isinstance(ty, Lolli):
        def fn(x):
            return sem_combination(ty.cod, [(c, f(x)) for c, f in pairs])

        return LinFun(ty.dom, ty.cod, fn, " + ".join(f"{c}*{f.label}" for c, f in pairs))
    if isinstance(ty, With):
        return Pair(
            sem_combination(ty.left, [(c, x.left) for c, x in pairs]),
            sem_combination(ty.right, [(c, x.right) for c, x in pairs]),
        )
    raise EvalError(f"no values of type {show_type(ty)}")


def check_value(ty: Type, x) -> None:
    """Raise :class:`EvalError` unless ``x`` is a value of ``ty``."""
    if is_space_type(ty):
        try:
            el.check_element(to_space(ty), x)
        except (ValueError, TypeError) as exc:
            raise EvalError(f"value does not match {show_type(ty)}: {exc}") from None
        return
    if isinstance(ty, Lolli):
        if not isinstance(x, LinFun) or (x.dom, x.cod) != (ty.dom, ty.cod):
            raise EvalError(f"expected a linear map of type {show_type(ty)}, got {x!r}")
        return
    if isinstance(ty, With):
        if not isinstance(x, Pair):
            raise EvalError(f"expected a pair of type {show_type(ty)}, got {x!r}")
        check_value(ty.left, x.left)
        check_value(ty.right, x.right)
        return
    raise EvalError(f"no values of type {show_type(ty)}")


def _basis(space, atom):
    return el.element_of_atom(space, atom)


def _tensor_terms(ty: Type, x: Tensor):
    """``(c, left, right)`` for a tensor value, expanded over atoms."""
    ls, rs = to_space(ty.left), to_space(ty.right)
    return [(c, _basis(ls, a), _basis(rs, b)) for (a, b), c in x.terms]


def _pure_tensor(ty: Type, a, b) -> Tensor:
    if not is_space_type(ty):
        raise EvalError(f"tensors of {show_type(ty)} are not representable")
    return Tensor.pure((to_space(ty.left), to_space(ty.right)), (a, b))


def split(u: Distribution, k: int) -> list:
    """``(c, [u_1, ..., u_k])`` with ``sum c u_1 (x) ... (x) u_k`` the iterated comultiplication."""
    if k == 1:
        return [(_ONE, [u])]
    out = []
    for (a, b), c in comul_delta(u).terms:
        left = Distribution.from_atoms(u.space, {a: _ONE})
        right = Distribution.from_atoms(u.space, {b: _ONE})
        out.extend((c * cr, [left] + rest) for cr, rest in split(right, k - 1))
    return out


# -- evaluator --------------------------------------------------------------------------


class Evaluator:
    def __init__(self, checked: Checked, check: bool = True):
        self.checked = checked
        self.check = check
        self.fv: dict = {}

    def ty(self, node: Term) -> Type:
        return self.checked.type_of(node)

    def free(self, node) -> frozenset:
        if isinstance(node, _Scope):
            return free_vars(node.let.body, self.fv) - {node.let.left, node.let.right}
        return free_vars(node, self.fv)

    def run(self, env: dict):
        for name, ty in self.checked.context.items():
            if name not in env:
                raise EvalError(f"no value for '{name}' in the environment")
            check_value(ty, env[name])
        return self.eval(self.checked.term, dict(env), dict(self.checked.context))

    # env: name -> value, tys: name -> type (both for variables in scope)
    def eval(self, node: Term, env: dict, tys: dict):
        fv = self.free(node)
        factor = _ONE
        for name in list(env):
            if name not in fv:
                if not isinstance(tys[name], Bang):
                    raise EvalError(f"linear variable '{name}' dropped")
                factor *= counit_e(env.pop(name))
        ty = self.ty(node)
        if factor == 0:
            return sem_zero(ty)
        out = self._eval(node, env, tys)
        if factor != 1:
            out = sem_combination(ty, [(factor, out)])
        if self.check:
            check_value(ty, out)
        return out

    def _routes(self, kids: list, env: dict, tys: dict):
        """Split the environment among children; yields ``(c, [env_i])``."""
        fvs = [self.free(k) for k in kids]
        shared = []
        base = [dict() for _ in kids]
        for name, value in env.items():
            users = [i for i, f in enumerate(fvs) if name in f]
            if len(users) == 1:
                base[users[0]][name] = value
            elif len(users) > 1:
                shared.append((name, users, split(value, len(users))))
        for combo in product(*(parts for _, _, parts in shared)):
            c = _ONE
            envs = [dict(b) for b in base]
            for (name, users, _), (cp, pieces) in zip(shared, combo):
                c *= cp
                for i, piece in zip(users, pieces):
                    envs[i][name] = piece
            yield c, envs

    def _multi(self, node: Term, kids: list, env: dict, tys: dict, combine: Callable):
        ty = self.ty(node)
        terms = []
        for c, envs in self._routes(kids, env, tys):
            vals = [self.eval(k, e, tys) for k, e in zip(kids, envs)]
            terms.append((c, combine(*vals)))
        return sem_combination(ty, terms)

    def _eval(self, t: Term, env: dict, tys: dict):
        ty = self.ty(t)
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, Scalar):
            return t.value
        if isinstance(t, VecLit):
            return Vector(tuple(t.values))
        if isinstance(t, BangLit):
            return LinFun(ty.dom, ty.cod, lift(t.poly), f"bang {t.poly}")
        if isinstance(t, Lam):
            return self._closure(t, env, tys, ty)
        if isinstance(t, App):
            return self._multi(t, [t.fn, t.arg], env, tys, lambda f, a: f(a))
        if isinstance(t, TensorPair):
            return self._multi(t, [t.left, t.right], env, tys, lambda a, b: _pure_tensor(ty, a, b))
        if isinstance(t, LetTensor):
            pty = self.ty(t.value)
            inner = {**tys, t.left: pty.left, t.right: pty.right}

            def body(p, benv):
                return sem_combination(ty, [
                    (c, self.eval(t.body, {**benv, t.left: a, t.right: b}, inner))
                    for c, a, b in _tensor_terms(pty, p)
                ])

            terms = []
            for c, (venv, benv) in self._routes([t.value, _Scope(t)], env, tys):
                terms.append((c, body(self.eval(t.value, venv, tys), benv)))
            return sem_combination(ty, terms)
        if isinstance(t, Cocontract):
            d = to_space(ty)
            return self._multi(t, [t.left, t.right], env, tys, lambda a, b: conv_nabla(Tensor.pure((d, d), (a, b))))
        if isinstance(t, WithPair):
            return Pair(self.eval(t.left, dict(env), tys), self.eval(t.right, dict(env), tys))
        if isinstance(t, Sum):
            return sem_combination(ty, [
                (_ONE, self.eval(t.left, dict(env), tys)),
                (_ONE, self.eval(t.right, dict(env), tys)),
            ])
        if isinstance(t, Coweaken):
            delta0 = unit_nu(to_space(ty).inner)
            if t.arg is None:
                return delta0
            return delta0.scale(self.eval(t.arg, env, tys))
        if isinstance(t, Ascribe):
            return self.eval(t.term, env, tys)
        x = self.eval(t.arg, env, tys)
        aty = self.ty(t.arg)
        if isinstance(t, Coder):
            return coder(x, to_space(aty))
        if isinstance(t, Derelict):
            return eps(x)
        if isinstance(t, Weaken):
            return counit_e(x)
        if isinstance(t, Contract):
            return comul_delta(x)
        if isinstance(t, Seely):
            return seely_split(x)
        if isinstance(t, Unseely):
            return seely_merge(x)
        if isinstance(t, Fst):
            return x.left
        if isinstance(t, Snd):
            return x.right
        if isinstance(t, Diff):
            return _differential(x, ty)
        raise EvalError(f"cannot evaluate {t!r}")

    def _closure(self, t: Lam, env: dict, tys: dict, ty: Lolli) -> LinFun:
        inner = {**tys, t.var: t.ty}
        captured = dict(env)

        def fn(x):
            return self.eval(t.body, {**captured, t.var: x}, inner)

        return LinFun(ty.dom, ty.cod, fn, f"\\{t.var}")


@dataclass(frozen=True)
class _Scope:
    """The body of a let, seen from outside: its free variables minus the binders."""

    let: LetTensor


def _differential(f: LinFun, ty: Lolli) -> LinFun:
    """``(v (x) u) -> f(d(v, u))`` extended bilinearly."""
    a = ty.dom.left
    space = to_space(a)

    def fn(p: Tensor):
        return sem_combination(ty.cod, [
            (c, f(derive_dA(v, Distribution.from_atoms(space, {b: _ONE}))))
            for (va, b), c in p.terms
            for v in [_basis(space, va)]
        ])

    return LinFun(ty.dom, ty.cod, fn, f"diff({f.label})")


def evaluate(checked: Checked, env: dict, check: bool = True):
    """Value of a checked term; ``env`` maps every context variable to a value."""
    return Evaluator(checked, check).run(env)
