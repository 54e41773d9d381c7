"""Types of the term language and their reading as spaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..spaces import Dist, Prod, RealN, Space, TensorSp, UnitSp


@dataclass(frozen=True)
class Unit:
    pass


@dataclass(frozen=True)
class RealT:
    dim: int


@dataclass(frozen=True)
class TensorT:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class Lolli:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class Bang:
    inner: "Type"


@dataclass(frozen=True)
class With:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class Meta:
    """Unification variable; never appears in a checked result."""

    ident: int


Type = Union[Unit, RealT, TensorT, Lolli, Bang, With, Meta]


def show_type(t: Type) -> str:
    if isinstance(t, Unit):
        return "I"
    if isinstance(t, RealT):
        return f"R^{t.dim}"
    if isinstance(t, Meta):
        return f"?{t.ident}"
    if isinstance(t, Bang):
        inner = show_type(t.inner)
        return "!" + (f"({inner})" if isinstance(t.inner, (TensorT, With, Lolli)) else inner)
    if isinstance(t, Lolli):
        dom = show_type(t.dom)
        if isinstance(t.dom, Lolli):
            dom = f"({dom})"
        return f"{dom} -o {show_type(t.cod)}"
    op = "(x)" if isinstance(t, TensorT) else "&"
    left, right = show_type(t.left), show_type(t.right)
    if isinstance(t.left, Lolli) or (isinstance(t.left, (TensorT, With)) and type(t.left) is not type(t)):
        left = f"({left})"
    if isinstance(t.right, (Lolli, TensorT, With)):
        right = f"({right})"
    return f"{left} {op} {right}"


def to_space(t: Type) -> Space:
    if isinstance(t, Unit):
        return UnitSp()
    if isinstance(t, RealT):
        return RealN(t.dim)
    if isinstance(t, Bang):
        return Dist(to_space(t.inner))
    if isinstance(t, TensorT):
        return TensorSp(to_space(t.left), to_space(t.right))
    if isinstance(t, With):
        return Prod(to_space(t.left), to_space(t.right))
    raise TypeError(f"{show_type(t)} is not a space")


def of_space(s: Space) -> Type:
    if isinstance(s, UnitSp):
        return Unit()
    if isinstance(s, RealN):
        return RealT(s.dim)
    if isinstance(s, Dist):
        return Bang(of_space(s.inner))
    if isinstance(s, TensorSp):
        return TensorT(of_space(s.left), of_space(s.right))
    if isinstance(s, Prod):
        return With(of_space(s.left), of_space(s.right))
    raise TypeError(f"unknown space {s!r}")


def is_space_type(t: Type) -> bool:
    if isinstance(t, (Unit, RealT)):
        return True
    if isinstance(t, Bang):
        return is_space_type(t.inner)
    if isinstance(t, (TensorT, With)):
        return is_space_type(t.left) and is_space_type(t.right)
    return False
