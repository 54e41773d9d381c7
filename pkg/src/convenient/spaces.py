"""Scalars, space descriptors and coordinate vectors."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Scalar = Fraction


class DimensionError(ValueError):
    """Raised when objects living in incompatible spaces are combined."""


def scalar(x) -> Fraction:
    """Coerce an int, a ``"p/q"`` string or a Fraction to an exact scalar.

    Floats are rejected: the exact path never rounds.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {x!r} as an exact scalar")


def cached_hash(obj, key) -> int:
    """Hash of ``key`` memoized on a frozen instance (Fraction hashing is slow)."""
    h = obj.__dict__.get("_hash")
    if h is None:
        h = hash(key)
        object.__setattr__(obj, "_hash", h)
    return h


def format_scalar(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, order=True)
class RealN:
    dim: int

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("dimension must be non-negative")

    def __str__(self) -> str:
        return f"R^{self.dim}"


@dataclass(frozen=True, order=True)
class Dist:
    inner: "Space"

    def __str__(self) -> str:
        return f"!{_wrap(self.inner)}"


@dataclass(frozen=True, order=True)
class Prod:
    left: "Space"
    right: "Space"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True, order=True)
class TensorSp:
    left: "Space"
    right: "Space"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} (x) {_wrap(self.right)}"


@dataclass(frozen=True, order=True)
class UnitSp:
    def __str__(self) -> str:
        return "I"


Space = Union[RealN, Dist, Prod, TensorSp, UnitSp]


def _wrap(s: Space) -> str:
    if isinstance(s, (Prod, TensorSp)):
        return f"({s})"
    return str(s)


@dataclass(frozen=True, order=True)
class Vector:
    """A point of ``R^n``.

    Coordinates are Fractions on the exact path; the numeric paths of the
    difference-quotient engine also put floats here.
    """

    coords: tuple

    def __hash__(self) -> int:
        return cached_hash(self, self.coords)

    @classmethod
    def of(cls, *xs) -> Vector:
        return cls(tuple(scalar(x) for x in xs))

    @classmethod
    def from_iter(cls, xs: Iterable) -> Vector:
        return cls(tuple(scalar(x) for x in xs))

    @classmethod
    def zeros(cls, n: int) -> Vector:
        return cls((Fraction(0),) * n)

    @classmethod
    def unit(cls, n: int, i: int) -> Vector:
        return cls(tuple(Fraction(int(j == i)) for j in range(n)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def space(self) -> RealN:
        return RealN(len(self.coords))

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def _check(self, other: Vector) -> None:
        if len(other.coords) != len(self.coords):
            raise DimensionError(f"{self.space} vs {other.space}")

    def __add__(self, other: Vector) -> Vector:
        self._check(other)
        return Vector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: Vector) -> Vector:
        self._check(other)
        return Vector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> Vector:
        return Vector(tuple(-a for a in self.coords))

    def scale(self, c) -> Vector:
        return Vector(tuple(c * a for a in self.coords))

    def dot(self, other: Vector):
        self._check(other)
        return sum((a * b for a, b in zip(self.coords, other.coords)), Fraction(0))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def __str__(self) -> str:
        return "[" + ", ".join(
            format_scalar(a) if isinstance(a, Fraction) else repr(a) for a in self.coords
        ) + "]"


_SPACE_TOKEN = re.compile(r"\s*(R\^\d+|I|!|\(x\)|&|\(|\))")


def parse_space(text: str) -> Space:
    """Parse a space written in type syntax: ``I``, ``R^n``, ``!S``, ``A & B``, ``A (x) B``."""
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _SPACE_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad space {text!r} at offset {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    tokens.append("<end>")
    i = 0

    def atom() -> Space:
        nonlocal i
        tok = tokens[i]
        i += 1
        if tok == "I":
            return UnitSp()
        if tok.startswith("R^"):
            return RealN(int(tok[2:]))
        if tok == "!":
            return Dist(atom())
        if tok == "(":
            s = binary()
            if tokens[i] != ")":
                raise ValueError(f"bad space {text!r}: expected ')'")
            i += 1
            return s
        raise ValueError(f"bad space {text!r}: unexpected {tok!r}")

    def binary() -> Space:
        nonlocal i
        s = atom()
        while tokens[i] in ("&", "(x)"):
            op = tokens[i]
            i += 1
            s = Prod(s, atom()) if op == "&" else TensorSp(s, atom())
        return s

    out = binary()
    if tokens[i] != "<end>":
        raise ValueError(f"bad space {text!r}: trailing {tokens[i]!r}")
    return out
