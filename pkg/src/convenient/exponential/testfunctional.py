"""Smooth scalar probes and their pairing with distributions.

A test functional on a space ``E`` is ``P(l_1(x), ..., l_m(x))`` with ``P`` a
scalar polynomial and each ``l_i`` a *linear* coordinate on ``E``:

* on ``R^n`` a covector;
* on ``!S`` the pairing coordinate ``u -> <u, g>`` for a test functional
  ``g`` on ``S`` (the cylinder functionals);
* on ``A & B`` a coordinate of one factor, tagged ``(0, l)`` or ``(1, l)``;
* on ``I`` a scalar multiplier.

Because the coordinates are linear, the directional derivative of
``l_i`` along an atom is the constant ``l_i(atom)``, and pairing a
derivative-of-Dirac term reduces to a directional derivative of ``P``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..poly import PolyMap, directional, linear_map, poly_compose, poly_eval, stack, variable
from ..spaces import DimensionError, Dist, Prod, RealN, Space, UnitSp, Vector
from .elements import Distribution, Tensor, atoms

_ZERO = Fraction(0)


@dataclass(frozen=True)
class TestFunctional:
    __test__ = False  # not a pytest class

    space: Space
    poly: PolyMap
    coords: tuple

    def __post_init__(self):
        if self.poly.nout != 1:
            raise DimensionError("test functionals are scalar-valued")
        if self.poly.nvars != len(self.coords):
            raise DimensionError("one polynomial variable per coordinate expected")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_poly(cls, space: Space, p: PolyMap) -> TestFunctional:
        """A polynomial in the standard coordinates of ``R^n`` or ``R^a & R^b``."""
        return cls(space, p, standard_coords(space))

    @classmethod
    def cylinder(cls, inner: Space, p: PolyMap, probes: Sequence[TestFunctional]) -> TestFunctional:
        """``u -> P(<u, g_1>, ..., <u, g_m>)`` on ``!inner``."""
        for g in probes:
            if g.space != inner:
                raise DimensionError(f"probe on {g.space}, expected {inner}")
        return cls(Dist(inner), p, tuple(probes))

    @classmethod
    def constant(cls, space: Space, c) -> TestFunctional:
        return cls(space, PolyMap.build(0, 1, {(0, ()): c}), ())

    @classmethod
    def linear(cls, space: Space, coord) -> TestFunctional:
        return cls(space, variable(1, 0), (coord,))

    def __mul__(self, other: TestFunctional) -> TestFunctional:
        """Pointwise product."""
        if other.space != self.space:
            raise DimensionError("product of functionals on different spaces")
        m, k = self.poly.nvars, other.poly.nvars
        left = poly_compose(self.poly, _select(m + k, range(m)))
        right = poly_compose(other.poly, _select(m + k, range(m, m + k)))
        return TestFunctional(self.space, left * right, self.coords + other.coords)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x) -> Fraction:
        y = Vector(tuple(coord_value(self.space, c, x) for c in self.coords))
        return poly_eval(self.poly, y)[0]

    def as_poly(self) -> PolyMap:
        """The functional as a polynomial on ``R^n`` (or ``R^(a+b)`` for products of ``R``'s)."""
        n = flat_dim(self.space)
        rows = [_covector(self.space, c, n) for c in self.coords]
        inner = linear_map(rows, n) if rows else PolyMap(n, 0, ())
        return poly_compose(self.poly, inner)

    def precompose(self, f: PolyMap) -> TestFunctional:
        """``self o f`` for a polynomial map ``f`` into this ``R^m``."""
        return TestFunctional.from_poly(RealN(f.nvars), poly_compose(self.as_poly(), f))

    def after_dirac(self) -> TestFunctional:
        """``F o dirac`` for a cylinder functional ``F`` on ``!R^n``."""
        if not isinstance(self.space, Dist) or not isinstance(self.space.inner, RealN):
            raise DimensionError("after_dirac needs a functional on !R^n")
        n = self.space.inner.dim
        inner = stack([g.as_poly() for g in self.coords], n) if self.coords else PolyMap(n, 0, ())
        return TestFunctional.from_poly(self.space.inner, poly_compose(self.poly, inner))


def _select(n: int, idx) -> PolyMap:
    idx = list(idx)
    return linear_map([[int(j == i) for j in range(n)] for i in idx], n) if idx else PolyMap(n, 0, ())


def flat_dim(space: Space) -> int:
    if isinstance(space, RealN):
        return space.dim
    if isinstance(space, UnitSp):
        return 1
    if isinstance(space, Prod):
        return flat_dim(space.left) + flat_dim(space.right)
    raise DimensionError(f"{space} is not a finite product of lines")


def _covector(space: Space, coord, n: int, offset: int = 0) -> list:
    row = [Fraction(0)] * n
    if isinstance(space, RealN):
        row[offset:offset + space.dim] = list(coord)
    elif isinstance(space, UnitSp):
        row[offset] = Fraction(coord)
    elif isinstance(space, Prod):
        side, c = coord
        if side == 0:
            return _merge(row, _covector(space.left, c, n, offset))
        return _merge(row, _covector(space.right, c, n, offset + flat_dim(space.left)))
    else:
        raise DimensionError(f"{space} is not a finite product of lines")
    return row


def _merge(a: list, b: list) -> list:
    return [x + y for x, y in zip(a, b)]


def standard_coords(space: Space) -> tuple:
    if isinstance(space, RealN):
        return tuple(Vector.unit(space.dim, i) for i in range(space.dim))
    if isinstance(space, UnitSp):
        return (Fraction(1),)
    if isinstance(space, Prod):
        return tuple((0, c) for c in standard_coords(space.left)) + tuple(
            (1, c) for c in standard_coords(space.right)
        )
    raise DimensionError(f"{space} has no standard coordinates")


def coord_on_atom(space: Space, coord, atom) -> Fraction:
    if isinstance(space, RealN):
        return coord[atom]
    if isinstance(space, UnitSp):
        return Fraction(coord)
    if isinstance(space, Dist):
        return pair_atom(space.inner, atom, coord)
    if isinstance(space, Prod):
        side, c = coord
        s, a = atom
        if s != side:
            return _ZERO
        return coord_on_atom(space.left if s == 0 else space.right, c, a)
    raise DimensionError(f"no linear coordinates on {space}")


def coord_value(space: Space, coord, x) -> Fraction:
    return sum(
        (c * coord_on_atom(space, coord, a) for a, c in atoms(space, x).items()), _ZERO
    )


def _derivative_value(f: TestFunctional, base, dirs: tuple, cache: dict) -> Fraction:
    key = (base, dirs)
    if key in cache:
        return cache[key]
    q = f.poly
    for a in dirs:
        eta = Vector(tuple(coord_on_atom(f.space, c, a) for c in f.coords))
        if eta.is_zero():
            cache[key] = _ZERO
            return _ZERO
        q = directional(q, eta)
        if not q.terms:
            cache[key] = _ZERO
            return _ZERO
    y = Vector(tuple(coord_value(f.space, c, base) for c in f.coords))
    val = poly_eval(q, y)[0]
    cache[key] = val
    return val


def pair_atom(space: Space, atom, f: TestFunctional) -> Fraction:
    """``<D_dirs delta_base, f>`` for a unit term ``atom = (base, dirs)``."""
    if f.space != space:
        raise DimensionError(f"functional on {f.space} paired with a distribution on {space}")
    base, dirs = atom
    return _derivative_value(f, base, dirs, {})


def pair(u: Distribution, f: TestFunctional) -> Fraction:
    """``<u, f>``: each term contributes ``coeff * d^k f(base)(dirs)``."""
    if not isinstance(u, Distribution):
        raise TypeError("pair expects a Distribution")
    if f.space != u.space:
        raise DimensionError(f"functional on {f.space} paired with a distribution on {u.space}")
    cache: dict = {}
    return sum((c * _derivative_value(f, b, d, cache) for (b, d), c in u.terms), _ZERO)


def pair_tensor(t: Tensor, fs: Sequence[TestFunctional]) -> Fraction:
    """``<t, f_1 (x) ... (x) f_k>`` for a tensor of distributions."""
    if len(fs) != t.arity:
        raise DimensionError("one functional per tensor factor expected")
    for s, f in zip(t.factors, fs):
        if s != Dist(f.space):
            raise DimensionError(f"functional on {f.space} for factor {s}")
    caches = [dict() for _ in fs]
    total = _ZERO
    for key, c in t.terms:
        w = c
        for (base, dirs), f, cache in zip(key, fs, caches):
            w *= _derivative_value(f, base, dirs, cache)
            if not w:
                break
        total += w
    return total
