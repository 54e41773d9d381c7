"""Elements of spaces as finite linear combinations of atoms.

Every supported space has a canonical basis of *atoms*:

* ``R^n``: the indices ``0..n-1``;
* ``I``: the single atom ``0``;
* ``!S``: unit derivative-of-Dirac terms ``(base, dirs)`` where ``base`` is a
  point of ``S`` and ``dirs`` a sorted tuple of atoms of ``S``;
* ``A & B``: ``(0, a)`` and ``(1, b)``;
* ``A (x) B``: pairs ``(a, b)``.

Distributions store their derivative directions as sorted atom tuples, so
multilinearity in the direction slots is built into the canonical form and
two distributions are equal iff their term tuples are equal.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from ..spaces import DimensionError, cached_hash, Dist, Prod, RealN, Space, TensorSp, UnitSp, Vector

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True, order=True)
class Pair:
    """A point of a product space ``A & B``."""

    left: object
    right: object

    def __hash__(self) -> int:
        return cached_hash(self, (self.left, self.right))

    def __str__(self) -> str:
        return f"<{self.left}, {self.right}>"


def _canon(coeffs: Mapping) -> tuple:
    return tuple(sorted((k, c) for k, c in coeffs.items() if c))


@dataclass(frozen=True, order=True)
class Distribution:
    """A finite sum of ``coeff * D_{dirs} delta_base`` on the space ``space``.

    ``space`` is the space the deltas sit on, so the distribution itself is
    an element of ``Dist(space)``.  ``terms`` is a sorted tuple of
    ``((base, dirs), coeff)`` with every coefficient nonzero.
    """

    space: Space
    terms: tuple = ()

    def __hash__(self) -> int:
        return cached_hash(self, (self.space, self.terms))

    @classmethod
    def from_atoms(cls, space: Space, coeffs: Mapping) -> Distribution:
        return cls(space, _canon(coeffs))

    @classmethod
    def build(cls, space: Space, raw: Iterable) -> Distribution:
        """Canonicalize ``(coeff, base, directions)`` triples.

        Directions are arbitrary tangent elements of ``space``; they are
        expanded multilinearly over atoms.
        """
        acc: dict = defaultdict(Fraction)
        for coeff, base, dirs in raw:
            check_element(space, base)
            expansions = [atoms(space, d) for d in dirs]
            for combo in product(*(e.items() for e in expansions)):
                w = Fraction(coeff)
                for _, c in combo:
                    w *= c
                if w:
                    acc[(base, tuple(sorted(a for a, _ in combo)))] += w
        return cls.from_atoms(space, acc)

    @property
    def order(self) -> int:
        return max((len(d) for (_, d), _ in self.terms), default=0)

    def coeffs(self) -> dict:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: Distribution) -> None:
        if not isinstance(other, Distribution) or other.space != self.space:
            raise DimensionError(f"distributions on {self.space} and {getattr(other, 'space', other)}")

    def __add__(self, other: Distribution) -> Distribution:
        self._check(other)
        acc = defaultdict(Fraction, self.terms)
        for k, c in other.terms:
            acc[k] += c
        return Distribution.from_atoms(self.space, acc)

    def __sub__(self, other: Distribution) -> Distribution:
        return self + other.scale(-1)

    def __neg__(self) -> Distribution:
        return self.scale(-1)

    def scale(self, c) -> Distribution:
        c = Fraction(c)
        if not c:
            return Distribution(self.space)
        return Distribution(self.space, tuple((k, c * v) for k, v in self.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (base, dirs), c in self.terms:
            d = "".join(f"D[{element_of_atom(self.space, a)}]" for a in dirs)
            parts.append(f"{c}*{d}delta[{base}]")
        return " + ".join(parts)


@dataclass(frozen=True, order=True)
class Tensor:
    """A finite sum of pure tensors of atoms over ``factors``.

    With ``k`` factors, ``terms`` holds ``((a1, ..., ak), coeff)`` sorted.
    Bilinearity is built in because factors are expanded over atoms.  A
    zero-factor tensor is a scalar.
    """

    factors: tuple
    terms: tuple = ()

    @classmethod
    def from_atoms(cls, factors: Sequence[Space], coeffs: Mapping) -> Tensor:
        return cls(tuple(factors), _canon(coeffs))

    @classmethod
    def pure(cls, factors: Sequence[Space], elements: Sequence) -> Tensor:
        """``x1 (x) ... (x) xk`` for elements of the respective factors."""
        if len(factors) != len(elements):
            raise DimensionError("one element per tensor factor expected")
        acc: dict = defaultdict(Fraction)
        expansions = [atoms(s, x).items() for s, x in zip(factors, elements)]
        for combo in product(*expansions):
            w = _ONE
            for _, c in combo:
                w *= c
            acc[tuple(a for a, _ in combo)] += w
        return cls.from_atoms(factors, acc)

    @classmethod
    def scalar(cls, c) -> Tensor:
        return cls.from_atoms((), {(): Fraction(c)})

    @property
    def arity(self) -> int:
        return len(self.factors)

    def _check(self, other: Tensor) -> None:
        if not isinstance(other, Tensor) or other.factors != self.factors:
            raise DimensionError("tensors over different factors")

    def __add__(self, other: Tensor) -> Tensor:
        self._check(other)
        acc = defaultdict(Fraction, self.terms)
        for k, c in other.terms:
            acc[k] += c
        return Tensor.from_atoms(self.factors, acc)

    def __sub__(self, other: Tensor) -> Tensor:
        return self + other.scale(-1)

    def scale(self, c) -> Tensor:
        c = Fraction(c)
        return Tensor.from_atoms(self.factors, {k: c * v for k, v in self.terms})

    def __matmul__(self, other: Tensor) -> Tensor:
        """Tensor product, concatenating factors."""
        acc: dict = {}
        for ka, ca in self.terms:
            for kb, cb in other.terms:
                acc[ka + kb] = ca * cb
        return Tensor.from_atoms(self.factors + other.factors, acc)

    def permute(self, perm: Sequence[int]) -> Tensor:
        """Reorder factors: new factor ``i`` is old factor ``perm[i]``."""
        factors = tuple(self.factors[p] for p in perm)
        return Tensor.from_atoms(
            factors, {tuple(k[p] for p in perm): c for k, c in self.terms}
        )

    def apply(self, blocks: Sequence[tuple[int, Callable]], factors: Sequence[Space]) -> Tensor:
        """Apply a multilinear map to consecutive blocks of factors.

        ``blocks`` is a list of ``(width, fn)``; ``fn`` receives a tuple of
        ``width`` atoms and returns a Tensor.  ``factors`` are the factors of
        the result (needed when the input is zero).
        """
        if sum(w for w, _ in blocks) != self.arity:
            raise DimensionError("blocks do not cover the tensor factors")
        factors = tuple(factors)
        acc: dict = defaultdict(Fraction)
        cache: dict = {}
        for key, c in self.terms:
            pieces = []
            pos = 0
            for i, (w, fn) in enumerate(blocks):
                sub = key[pos:pos + w]
                pos += w
                if (i, sub) not in cache:
                    cache[(i, sub)] = fn(sub)
                pieces.append(cache[(i, sub)])
            got = tuple(s for p in pieces for s in p.factors)
            if got != factors:
                raise DimensionError(f"block maps produced {got}, expected {factors}")
            for combo in product(*(p.terms for p in pieces)):
                w = c
                k: tuple = ()
                for kp, cp in combo:
                    w *= cp
                    k += kp
                acc[k] += w
        return Tensor.from_atoms(factors, acc)

    def single(self):
        """Convert a one-factor tensor back to an element of its factor."""
        if self.arity != 1:
            raise DimensionError("not a one-factor tensor")
        return from_atoms(self.factors[0], {k[0]: c for k, c in self.terms})

    def value(self) -> Fraction:
        """Convert a zero-factor tensor to a scalar."""
        if self.arity != 0:
            raise DimensionError("not a scalar tensor")
        return dict(self.terms).get((), _ZERO)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key, c in self.terms:
            pieces = [str(element_of_atom(s, a)) for s, a in zip(self.factors, key)]
            parts.append(f"{c}*(" + " (x) ".join(pieces) + ")")
        return " + ".join(parts)


def as_tensor(space: Space, x) -> Tensor:
    return Tensor.from_atoms((space,), {(a,): c for a, c in atoms(space, x).items()})


# -- generic element algebra --------------------------------------------------


def atoms(space: Space, x) -> dict:
    """Coordinates of ``x`` over the atoms of ``space``."""
    if isinstance(space, RealN):
        if not isinstance(x, Vector) or len(x) != space.dim:
            raise DimensionError(f"{x!r} is not a point of {space}")
        return {i: c for i, c in enumerate(x.coords) if c}
    if isinstance(space, UnitSp):
        x = Fraction(x)
        return {0: x} if x else {}
    if isinstance(space, Dist):
        if not isinstance(x, Distribution) or x.space != space.inner:
            raise DimensionError(f"{x!r} is not a distribution on {space.inner}")
        return dict(x.terms)
    if isinstance(space, Prod):
        if not isinstance(x, Pair):
            raise DimensionError(f"{x!r} is not a point of {space}")
        out = {(0, a): c for a, c in atoms(space.left, x.left).items()}
        out.update({(1, b): c for b, c in atoms(space.right, x.right).items()})
        return out
    if isinstance(space, TensorSp):
        if not isinstance(x, Tensor) or x.factors != (space.left, space.right):
            raise DimensionError(f"{x!r} is not an element of {space}")
        return dict(x.terms)
    raise TypeError(f"unknown space {space!r}")


def from_atoms(space: Space, coeffs: Mapping):
    if isinstance(space, RealN):
        coords = [_ZERO] * space.dim
        for i, c in coeffs.items():
            coords[i] += c
        return Vector(tuple(coords))
    if isinstance(space, UnitSp):
        return sum(coeffs.values(), _ZERO)
    if isinstance(space, Dist):
        return Distribution.from_atoms(space.inner, coeffs)
    if isinstance(space, Prod):
        left = {a: c for (s, a), c in coeffs.items() if s == 0}
        right = {a: c for (s, a), c in coeffs.items() if s == 1}
        return Pair(from_atoms(space.left, left), from_atoms(space.right, right))
    if isinstance(space, TensorSp):
        return Tensor.from_atoms((space.left, space.right), coeffs)
    raise TypeError(f"unknown space {space!r}")


def element_of_atom(space: Space, atom):
    return from_atoms(space, {atom: _ONE})


def zero(space: Space):
    return from_atoms(space, {})


def add(space: Space, x, y):
    if isinstance(space, RealN) and isinstance(x, Vector) and isinstance(y, Vector):
        if len(x) != space.dim or len(y) != space.dim:
            raise DimensionError(f"points of different dimension added in {space}")
        return x + y
    acc = defaultdict(Fraction, atoms(space, x))
    for a, c in atoms(space, y).items():
        acc[a] += c
    return from_atoms(space, {a: c for a, c in acc.items() if c})


def scale(space: Space, c, x):
    c = Fraction(c)
    return from_atoms(space, {a: c * v for a, v in atoms(space, x).items() if c * v})


def linear_combination(space: Space, pairs: Iterable) -> object:
    acc: dict = defaultdict(Fraction)
    for c, x in pairs:
        for a, v in atoms(space, x).items():
            acc[a] += c * v
    return from_atoms(space, {a: v for a, v in acc.items() if v})


def check_element(space: Space, x) -> None:
    atoms(space, x)


def space_of(x) -> Space:
    """Infer the space of a point (zero-factor and n-ary tensors excluded)."""
    if isinstance(x, Vector):
        return x.space
    if isinstance(x, Fraction):
        return UnitSp()
    if isinstance(x, Distribution):
        return Dist(x.space)
    if isinstance(x, Pair):
        return Prod(space_of(x.left), space_of(x.right))
    if isinstance(x, Tensor) and x.arity == 2:
        return TensorSp(*x.factors)
    raise TypeError(f"cannot infer the space of {x!r}")


def residual(a, b) -> Fraction:
    """Largest absolute atom coefficient of ``a - b`` (0 iff equal)."""
    if isinstance(a, Tensor):
        d = a - b
        return max((abs(c) for _, c in d.terms), default=_ZERO)
    if isinstance(a, Fraction) or isinstance(b, Fraction):
        return abs(Fraction(a) - Fraction(b))
    space = space_of(a)
    diff = add(space, a, scale(space, -1, b))
    return max((abs(c) for c in atoms(space, diff).values()), default=_ZERO)
